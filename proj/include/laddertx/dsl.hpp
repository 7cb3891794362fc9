#ifndef LADDERTX_DSL_HPP
#define LADDERTX_DSL_HPP

// Textual front end for `.mt` documents: metamodels, instances and ordered
// transformations. Grammar (informal):
//
//   document   := (metamodel | instance | transform)*
//   metamodel  := 'metamodel' ID '{' 'root' ID ';' class* '}'
//   class      := 'class' ID '{' ('flag' ID ';' | 'rel' ID ':' ID ('one'|'many') ';')* '}'
//   instance   := 'instance' ID ':' ID '{' object* '}'
//   object     := ID '#' NAT '{' [item (',' item)*] '}'
//   item       := ID '=' ('true' | 'false' | '[' [ref (',' ref)*] ']')
//   ref        := ID '#' NAT
//   transform  := 'transform' ID ':' ID '->' ID '{' rung* 'ladder' ':' ladder ';' '}'
//   rung       := 'rung' ID ':' ID '->' ID '{' ['pre' ':' expr ';'] ['post' ':' expr ';'] 'map' mapbody '}'
//   mapbody    := '{' (ID '<-' expr ';' | 'emit' ('first'|'last') ID mapbody [';'])* '}'
//   ladder     := 'base' '(' ID 'via' path '/' ID ')'
//               | 'step' '(' ID 'via' path '/' ID ',' ladder ')'
//               | 'join' '(' ladder ',' ladder ')'
//   path       := ID ('.' ID)*
//   expr       := or ['->' expr]
//   or         := and ('\/' and)*
//   and        := unary ('/\' unary)*
//   unary      := 'not' unary | atom ['=' atom]
//   atom       := 'true' | 'false' | NAT | ('src'|'tgt') '.' ID | 'succ' '(' expr ')' | '(' expr ')'
//
// The root rung of a transformation is the rung mapping the source root
// class to the target root class. `//` starts a comment.

#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "laddertx/contracts.hpp"
#include "laddertx/error.hpp"
#include "laddertx/instance.hpp"
#include "laddertx/ladder.hpp"
#include "laddertx/metamodel.hpp"

namespace laddertx {

struct SourcePos {
    std::string file;
    int line = 1;
    int col = 1;
};

struct Diagnostic {
    SourcePos pos;
    std::string message;

    std::string to_string() const {
        return pos.file + ":" + std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": error: " + message;
    }
};

class ParseError : public Error {
public:
    explicit ParseError(std::vector<Diagnostic> diags)
        : Error(diags.empty() ? "parse error" : diags.front().to_string()), diagnostics_(std::move(diags)) {}

    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

struct Document {
    std::vector<std::shared_ptr<const Metamodel>> metamodels;
    std::vector<ModelInstance> instances;
    std::vector<OrderedTransformation> transformations;
    /// File each instance was declared in, parallel to `instances`.
    std::vector<std::string> instance_files;
    /// File each transformation was declared in, parallel to `transformations`.
    std::vector<std::string> transformation_files;

    const Metamodel* find_metamodel(const std::string& name) const {
        for (const auto& m : metamodels)
            if (m->name == name) return m.get();
        return nullptr;
    }

    const ModelInstance* find_instance(const std::string& name) const {
        for (const auto& i : instances)
            if (i.name() == name) return &i;
        return nullptr;
    }

    const OrderedTransformation* find_transformation(const std::string& name) const {
        for (const auto& t : transformations)
            if (t.name == name) return &t;
        return nullptr;
    }

    /// Structural equality of the abstract forms; file origins are ignored.
    bool operator==(const Document& o) const {
        if (metamodels.size() != o.metamodels.size()) return false;
        for (std::size_t i = 0; i < metamodels.size(); ++i)
            if (*metamodels[i] != *o.metamodels[i]) return false;
        return instances == o.instances && transformations == o.transformations;
    }
};

struct SourceFile {
    std::string name;
    std::string text;
};

struct ParseResult {
    Document document;
    std::vector<Diagnostic> diagnostics;
    std::vector<std::string> warnings;

    bool ok() const { return diagnostics.empty(); }
};

namespace dsl_detail {

enum class Tok { Ident, Nat, Sym, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    Nat value = 0;
    SourcePos pos;
};

struct Abort {};

class Lexer {
public:
    Lexer(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

    std::vector<Token> run(std::vector<Diagnostic>& diags) {
        std::vector<Token> out;
        while (true) {
            skip_space();
            SourcePos pos{file_, line_, col_};
            if (i_ >= text_.size()) {
                out.push_back({Tok::End, "end of input", 0, pos});
                return out;
            }
            char c = text_[i_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string word;
                while (i_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_'))
                    word += advance();
                out.push_back({Tok::Ident, word, 0, pos});
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string digits;
                while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) digits += advance();
                if (digits.size() > 19) {
                    diags.push_back({pos, "natural number literal too large"});
                    throw Abort{};
                }
                out.push_back({Tok::Nat, digits, std::stoull(digits), pos});
            } else {
                static const char* multi[] = {"->", "<-", "/\\", "\\/"};
                std::string sym;
                for (const char* m : multi)
                    if (text_.substr(i_, 2) == m) sym = m;
                if (sym.empty() && std::string_view("{}()[];:,=#./").find(c) != std::string_view::npos) sym = c;
                if (sym.empty()) {
                    diags.push_back({pos, std::string("unexpected character '") + c + "'"});
                    throw Abort{};
                }
                for (std::size_t k = 0; k < sym.size(); ++k) advance();
                out.push_back({Tok::Sym, sym, 0, pos});
            }
        }
    }

private:
    char advance() {
        char c = text_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (i_ < text_.size()) {
            if (std::isspace(static_cast<unsigned char>(text_[i_]))) {
                advance();
            } else if (text_.substr(i_, 2) == "//") {
                while (i_ < text_.size() && text_[i_] != '\n') advance();
            } else {
                return;
            }
        }
    }

    std::string_view text_;
    std::string file_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// Unresolved syntax trees, carrying positions for semantic diagnostics.

struct RawName {
    std::string text;
    SourcePos pos;
};

struct RawRel {
    RawName name;
    RawName target;
    Multiplicity mult = Multiplicity::Many;
};

struct RawClass {
    RawName name;
    std::vector<RawName> flags;
    std::vector<RawRel> rels;
};

struct RawMetamodel {
    RawName name;
    RawName root;
    std::vector<RawClass> classes;
};

struct RawRef {
    RawName cls;
    Nat id = 0;
};

struct RawItem {
    RawName name;
    bool is_list = false;
    bool flag = false;
    std::vector<RawRef> refs;
};

struct RawObject {
    RawRef ref;
    std::vector<RawItem> items;
};

struct RawInstance {
    RawName name;
    RawName mm;
    std::vector<RawObject> objects;
};

struct RawMap {
    SourcePos pos;
    std::vector<std::pair<RawName, Expr>> assignments;
    struct Emit {
        Placement placement;
        RawName rel;
        std::shared_ptr<RawMap> map;
    };
    std::vector<Emit> emits;
};

struct RawRung {
    RawName name;
    RawName src;
    RawName tgt;
    Expr pre = Expr::boolean(true);
    Expr post = Expr::boolean(true);
    RawMap map;
};

struct RawLadder {
    Ladder::Kind kind = Ladder::Kind::Base;
    SourcePos pos;
    RawName rung;
    std::vector<RawName> nav;
    RawName s;
    std::vector<RawLadder> subs;
};

struct RawTransform {
    RawName name;
    RawName src;
    RawName tgt;
    std::vector<RawRung> rungs;
    RawLadder ladder;
};

struct RawDocument {
    std::vector<RawMetamodel> metamodels;
    std::vector<RawInstance> instances;
    std::vector<RawTransform> transforms;
    std::vector<std::string> instance_files;
    std::vector<std::string> transform_files;
};

inline bool is_reserved_in_expr(const std::string& s) {
    return s == "true" || s == "false" || s == "not" || s == "succ" || s == "src" || s == "tgt";
}

class Parser {
public:
    Parser(std::vector<Token> toks, std::vector<Diagnostic>& diags) : toks_(std::move(toks)), diags_(diags) {}

    void document(RawDocument& doc) {
        while (peek().kind != Tok::End) {
            if (is_word("metamodel"))
                doc.metamodels.push_back(metamodel());
            else if (is_word("instance")) {
                doc.instances.push_back(instance());
                doc.instance_files.push_back(doc.instances.back().name.pos.file);
            } else if (is_word("transform")) {
                doc.transforms.push_back(transform());
                doc.transform_files.push_back(doc.transforms.back().name.pos.file);
            } else
                error("expected 'metamodel', 'instance' or 'transform'");
        }
    }

private:
    const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }

    bool is_word(const char* w, std::size_t k = 0) const { return peek(k).kind == Tok::Ident && peek(k).text == w; }
    bool is_sym(const char* s, std::size_t k = 0) const { return peek(k).kind == Tok::Sym && peek(k).text == s; }

    [[noreturn]] void error(const std::string& what) {
        const auto& t = peek();
        diags_.push_back({t.pos, what + ", found '" + t.text + "'"});
        throw Abort{};
    }

    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    void expect_sym(const char* s) {
        if (!is_sym(s)) error(std::string("expected '") + s + "'");
        next();
    }

    void expect_word(const char* w) {
        if (!is_word(w)) error(std::string("expected '") + w + "'");
        next();
    }

    RawName ident(const char* what) {
        if (peek().kind != Tok::Ident) error(std::string("expected ") + what);
        auto t = next();
        return {t.text, t.pos};
    }

    Nat nat() {
        if (peek().kind != Tok::Nat) error("expected a natural number");
        return next().value;
    }

    RawMetamodel metamodel() {
        expect_word("metamodel");
        RawMetamodel mm;
        mm.name = ident("metamodel name");
        expect_sym("{");
        expect_word("root");
        mm.root = ident("root class name");
        expect_sym(";");
        while (is_word("class")) {
            next();
            RawClass c;
            c.name = ident("class name");
            expect_sym("{");
            while (!is_sym("}")) {
                if (is_word("flag")) {
                    next();
                    c.flags.push_back(ident("flag name"));
                    expect_sym(";");
                } else if (is_word("rel")) {
                    next();
                    RawRel r;
                    r.name = ident("relationship name");
                    expect_sym(":");
                    r.target = ident("target class name");
                    if (is_word("one"))
                        r.mult = Multiplicity::One;
                    else if (is_word("many"))
                        r.mult = Multiplicity::Many;
                    else
                        error("expected 'one' or 'many'");
                    next();
                    expect_sym(";");
                    c.rels.push_back(std::move(r));
                } else {
                    error("expected 'flag', 'rel' or '}'");
                }
            }
            next();
            mm.classes.push_back(std::move(c));
        }
        expect_sym("}");
        return mm;
    }

    RawRef object_ref() {
        RawRef r;
        r.cls = ident("class name");
        expect_sym("#");
        r.id = nat();
        return r;
    }

    RawInstance instance() {
        expect_word("instance");
        RawInstance inst;
        inst.name = ident("instance name");
        expect_sym(":");
        inst.mm = ident("metamodel name");
        expect_sym("{");
        while (!is_sym("}")) {
            RawObject obj;
            obj.ref = object_ref();
            expect_sym("{");
            if (!is_sym("}")) {
                while (true) {
                    RawItem item;
                    item.name = ident("flag or relationship name");
                    expect_sym("=");
                    if (is_word("true") || is_word("false")) {
                        item.flag = next().text == "true";
                    } else if (is_sym("[")) {
                        next();
                        item.is_list = true;
                        if (!is_sym("]")) {
                            item.refs.push_back(object_ref());
                            while (is_sym(",")) {
                                next();
                                item.refs.push_back(object_ref());
                            }
                        }
                        expect_sym("]");
                    } else {
                        error("expected 'true', 'false' or '['");
                    }
                    obj.items.push_back(std::move(item));
                    if (!is_sym(",")) break;
                    next();
                }
            }
            expect_sym("}");
            inst.objects.push_back(std::move(obj));
        }
        next();
        return inst;
    }

    Expr expr() {
        auto lhs = disjunction();
        if (is_sym("->")) {
            next();
            return Expr::implies(lhs, expr());
        }
        return lhs;
    }

    Expr disjunction() {
        auto lhs = conjunction();
        while (is_sym("\\/")) {
            next();
            lhs = Expr::disj(lhs, conjunction());
        }
        return lhs;
    }

    Expr conjunction() {
        auto lhs = unary();
        while (is_sym("/\\")) {
            next();
            lhs = Expr::conj(lhs, unary());
        }
        return lhs;
    }

    Expr unary() {
        if (is_word("not")) {
            next();
            return Expr::negate(unary());
        }
        auto lhs = atom();
        if (is_sym("=")) {
            next();
            return Expr::eq(lhs, atom());
        }
        return lhs;
    }

    Expr atom() {
        if (is_word("true")) return next(), Expr::boolean(true);
        if (is_word("false")) return next(), Expr::boolean(false);
        if (peek().kind == Tok::Nat) return Expr::nat(nat());
        if (is_word("src") || is_word("tgt")) {
            Side side = next().text == "src" ? Side::Src : Side::Tgt;
            expect_sym(".");
            return Expr::attr(side, ident("attribute name").text);
        }
        if (is_word("succ")) {
            next();
            expect_sym("(");
            auto e = expr();
            expect_sym(")");
            return Expr::succ(e);
        }
        if (is_sym("(")) {
            next();
            auto e = expr();
            expect_sym(")");
            return e;
        }
        error("expected an expression");
    }

    RawMap map_body() {
        RawMap m;
        m.pos = peek().pos;
        expect_sym("{");
        while (!is_sym("}")) {
            if (is_word("emit") && !is_sym("<-", 1)) {
                next();
                RawMap::Emit e;
                if (is_word("first"))
                    e.placement = Placement::First;
                else if (is_word("last"))
                    e.placement = Placement::Last;
                else
                    error("expected 'first' or 'last'");
                next();
                e.rel = ident("relationship name");
                e.map = std::make_shared<RawMap>(map_body());
                if (is_sym(";")) next();
                m.emits.push_back(std::move(e));
            } else {
                auto attr = ident("attribute name");
                expect_sym("<-");
                auto value = expr();
                expect_sym(";");
                m.assignments.emplace_back(std::move(attr), std::move(value));
            }
        }
        next();
        return m;
    }

    RawLadder ladder() {
        RawLadder l;
        l.pos = peek().pos;
        if (is_word("join")) {
            next();
            l.kind = Ladder::Kind::Join;
            expect_sym("(");
            l.subs.push_back(ladder());
            expect_sym(",");
            l.subs.push_back(ladder());
            expect_sym(")");
            return l;
        }
        if (is_word("base"))
            l.kind = Ladder::Kind::Base;
        else if (is_word("step"))
            l.kind = Ladder::Kind::Step;
        else
            error("expected 'base', 'step' or 'join'");
        next();
        expect_sym("(");
        l.rung = ident("rung name");
        expect_word("via");
        l.nav.push_back(ident("source relationship"));
        while (is_sym(".")) {
            next();
            l.nav.push_back(ident("source relationship"));
        }
        expect_sym("/");
        l.s = ident("target relationship");
        if (l.kind == Ladder::Kind::Step) {
            expect_sym(",");
            l.subs.push_back(ladder());
        }
        expect_sym(")");
        return l;
    }

    RawTransform transform() {
        expect_word("transform");
        RawTransform t;
        t.name = ident("transformation name");
        expect_sym(":");
        t.src = ident("source metamodel name");
        expect_sym("->");
        t.tgt = ident("target metamodel name");
        expect_sym("{");
        while (is_word("rung")) {
            next();
            RawRung r;
            r.name = ident("rung name");
            expect_sym(":");
            r.src = ident("source class");
            expect_sym("->");
            r.tgt = ident("target class");
            expect_sym("{");
            if (is_word("pre")) {
                next();
                expect_sym(":");
                r.pre = expr();
                expect_sym(";");
            }
            if (is_word("post")) {
                next();
                expect_sym(":");
                r.post = expr();
                expect_sym(";");
            }
            expect_word("map");
            r.map = map_body();
            expect_sym("}");
            t.rungs.push_back(std::move(r));
        }
        expect_word("ladder");
        expect_sym(":");
        t.ladder = ladder();
        if (is_sym(";")) next();
        expect_sym("}");
        return t;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::vector<Diagnostic>& diags_;
};

class Resolver {
public:
    explicit Resolver(ParseResult& out) : out_(out) {}

    void run(const RawDocument& raw) {
        for (const auto& m : raw.metamodels) metamodel(m);
        for (std::size_t i = 0; i < raw.instances.size(); ++i) instance(raw.instances[i], raw.instance_files[i]);
        for (std::size_t i = 0; i < raw.transforms.size(); ++i) transform(raw.transforms[i], raw.transform_files[i]);
    }

private:
    void diag(const SourcePos& pos, std::string msg) { out_.diagnostics.push_back({pos, std::move(msg)}); }

    std::shared_ptr<const Metamodel> lookup(const RawName& name) {
        for (const auto& m : out_.document.metamodels)
            if (m->name == name.text) return m;
        diag(name.pos, "unknown metamodel '" + name.text + "'");
        return nullptr;
    }

    void metamodel(const RawMetamodel& raw) {
        if (out_.document.find_metamodel(raw.name.text)) {
            diag(raw.name.pos, "duplicate metamodel '" + raw.name.text + "'");
            return;
        }
        Metamodel mm{raw.name.text, raw.root.text, {}};
        std::map<std::string, SourcePos> class_pos;
        for (const auto& c : raw.classes) class_pos.emplace(c.name.text, c.name.pos);
        bool ok = true;
        for (const auto& c : raw.classes) {
            ClassSchema cs{c.name.text, {}, {}};
            for (const auto& f : c.flags) cs.flags.push_back(f.text);
            for (const auto& r : c.rels) {
                if (!class_pos.count(r.target.text)) {
                    diag(r.target.pos, "relationship '" + r.name.text + "' targets undeclared class '" +
                                           r.target.text + "'");
                    ok = false;
                }
                cs.relationships.push_back({r.name.text, r.target.text, r.mult});
            }
            mm.classes.push_back(std::move(cs));
        }
        if (!class_pos.count(raw.root.text)) {
            diag(raw.root.pos, "root class '" + raw.root.text + "' is not declared");
            ok = false;
        }
        if (ok) {
            auto report = validate_metamodel(mm);
            for (const auto& v : report.violations) {
                auto it = class_pos.find(v.subject.substr(0, v.subject.find('.')));
                diag(it != class_pos.end() ? it->second : raw.name.pos, v.subject + ": " + v.message);
            }
            for (const auto& w : report.warnings) out_.warnings.push_back("metamodel " + mm.name + ": " + w);
        }
        out_.document.metamodels.push_back(std::make_shared<const Metamodel>(std::move(mm)));
    }

    void instance(const RawInstance& raw, const std::string& file) {
        auto mm = lookup(raw.mm);
        if (!mm) return;
        if (out_.document.find_instance(raw.name.text)) {
            diag(raw.name.pos, "duplicate instance '" + raw.name.text + "'");
            return;
        }
        ModelInstance inst(mm, raw.name.text);
        std::size_t before = out_.diagnostics.size();
        std::vector<std::optional<ObjectKey>> keys;
        for (const auto& obj : raw.objects) {
            std::map<std::string, bool> flags;
            const auto* cls = mm->find_class(obj.ref.cls.text);
            if (!cls) {
                diag(obj.ref.cls.pos, "unknown class '" + obj.ref.cls.text + "' in metamodel '" + mm->name + "'");
                keys.push_back(std::nullopt);
                continue;
            }
            for (const auto& item : obj.items) {
                if (item.is_list) continue;
                if (!cls->has_flag(item.name.text))
                    diag(item.name.pos, "class '" + cls->name + "' has no flag '" + item.name.text + "'");
                else
                    flags[item.name.text] = item.flag;
            }
            try {
                keys.push_back(inst.build_object(cls->name, obj.ref.id, flags));
            } catch (const ModelError& err) {
                diag(obj.ref.cls.pos, err.what());
                keys.push_back(std::nullopt);
            }
        }
        for (std::size_t i = 0; i < raw.objects.size(); ++i) {
            if (!keys[i]) continue;
            const auto& obj = raw.objects[i];
            const auto& cls = mm->get_class(obj.ref.cls.text);
            std::set<std::string> seen;
            for (const auto& item : obj.items) {
                if (!seen.insert(item.name.text).second) {
                    diag(item.name.pos, "'" + item.name.text + "' given twice");
                    continue;
                }
                if (!item.is_list) continue;
                if (!cls.find_relationship(item.name.text)) {
                    diag(item.name.pos, "class '" + cls.name + "' has no relationship '" + item.name.text + "'");
                    continue;
                }
                std::vector<ObjectKey> targets;
                bool ok = true;
                for (const auto& r : item.refs) {
                    auto k = inst.find({r.cls.text, r.id});
                    if (!k) {
                        diag(r.cls.pos, "dangling reference " + ObjectRef{r.cls.text, r.id}.to_string());
                        ok = false;
                    } else {
                        targets.push_back(*k);
                    }
                }
                if (!ok) continue;
                try {
                    inst.set_refs(*keys[i], item.name.text, targets);
                } catch (const ModelError& err) {
                    diag(item.name.pos, err.what());
                }
            }
        }
        if (out_.diagnostics.size() == before) {
            auto report = inst.validate();
            for (const auto& v : report.violations) diag(raw.name.pos, v.subject + ": " + v.message);
            for (const auto& w : report.warnings) out_.warnings.push_back("instance " + inst.name() + ": " + w);
        }
        inst.freeze();
        out_.document.instances.push_back(std::move(inst));
        out_.document.instance_files.push_back(file);
    }

    std::optional<MapExpr> map(const RawMap& raw, const std::string& target_class, const Metamodel& tgt_mm) {
        MapExpr m{target_class, {}, {}};
        for (const auto& [attr, value] : raw.assignments) m.assignments.push_back({attr.text, value});
        const auto* cls = tgt_mm.find_class(target_class);
        for (const auto& e : raw.emits) {
            const auto* rel = cls ? cls->find_relationship(e.rel.text) : nullptr;
            if (!rel) {
                diag(e.rel.pos, "class '" + target_class + "' has no relationship '" + e.rel.text + "' to emit into");
                return std::nullopt;
            }
            auto sub = map(*e.map, rel->target_class, tgt_mm);
            if (!sub) return std::nullopt;
            m.emits.push_back({e.rel.text, e.placement, std::move(*sub)});
        }
        return m;
    }

    std::optional<Ladder> ladder(const RawLadder& raw, const LadderIndex& idx, const std::map<std::string, Rung>& rungs,
                                 const Metamodel& src, const Metamodel& tgt) {
        try {
            if (raw.kind == Ladder::Kind::Join) {
                auto l = ladder(raw.subs[0], idx, rungs, src, tgt);
                auto r = ladder(raw.subs[1], idx, rungs, src, tgt);
                if (!l || !r) return std::nullopt;
                return join(*l, *r);
            }
            auto it = rungs.find(raw.rung.text);
            if (it == rungs.end()) {
                diag(raw.rung.pos, "unknown rung '" + raw.rung.text + "'");
                return std::nullopt;
            }
            Navigation nav;
            for (const auto& n : raw.nav) nav.push_back(n.text);
            if (raw.kind == Ladder::Kind::Base) return base(src, tgt, idx, it->second, nav, raw.s.text);
            auto rest = ladder(raw.subs[0], index_of(it->second), rungs, src, tgt);
            if (!rest) return std::nullopt;
            return step(src, tgt, idx, it->second, nav, raw.s.text, *rest);
        } catch (const LadderError& err) {
            std::string msg = err.what();
            while (!msg.empty() && msg.back() == '\n') msg.pop_back();
            diag(raw.pos, msg);
            return std::nullopt;
        }
    }

    void transform(const RawTransform& raw, const std::string& file) {
        auto src = lookup(raw.src);
        auto tgt = lookup(raw.tgt);
        if (!src || !tgt) return;
        if (out_.document.find_transformation(raw.name.text)) {
            diag(raw.name.pos, "duplicate transformation '" + raw.name.text + "'");
            return;
        }
        OrderedTransformation ot;
        ot.name = raw.name.text;
        ot.src_mm = src;
        ot.tgt_mm = tgt;
        std::map<std::string, Rung> rungs;
        std::size_t before = out_.diagnostics.size();
        for (const auto& rr : raw.rungs) {
            if (rungs.count(rr.name.text)) {
                diag(rr.name.pos, "duplicate rung '" + rr.name.text + "'");
                continue;
            }
            Rung r{rr.name.text, rr.src.text, rr.tgt.text, rr.pre, rr.post, {}};
            if (!src->find_class(rr.src.text)) {
                diag(rr.src.pos, "unknown source class '" + rr.src.text + "'");
                continue;
            }
            if (!tgt->find_class(rr.tgt.text)) {
                diag(rr.tgt.pos, "unknown target class '" + rr.tgt.text + "'");
                continue;
            }
            auto m = map(rr.map, rr.tgt.text, *tgt);
            if (!m) continue;
            r.map = std::move(*m);
            auto report = check_rung(r, *src, *tgt);
            for (const auto& v : report.violations) diag(rr.name.pos, v.subject + ": " + v.message);
            ot.rungs.push_back(r);
            rungs.emplace(r.name, std::move(r));
        }
        if (out_.diagnostics.size() != before) return;

        std::vector<const Rung*> roots;
        for (const auto& r : ot.rungs)
            if (r.src_class == src->root_class && r.tgt_class == tgt->root_class) roots.push_back(&r);
        if (roots.size() != 1) {
            diag(raw.name.pos, "expected exactly one rung mapping root '" + src->root_class + "' to root '" +
                                   tgt->root_class + "', found " + std::to_string(roots.size()));
            return;
        }
        ot.root_rung = *roots.front();
        auto body = ladder(raw.ladder, index_of(ot.root_rung), rungs, *src, *tgt);
        if (!body) return;
        ot.body = *body;
        auto report = well_formed(ot);
        for (const auto& v : report.violations) diag(raw.name.pos, v.subject + ": " + v.message);
        if (!report.ok()) return;
        out_.document.transformations.push_back(std::move(ot));
        out_.document.transformation_files.push_back(file);
    }

    ParseResult& out_;
};

}  // namespace dsl_detail

/// Parses and resolves several files as one document; names may refer to
/// declarations in any of the files.
inline ParseResult parse_files(const std::vector<SourceFile>& files) {
    ParseResult out;
    dsl_detail::RawDocument raw;
    for (const auto& f : files) {
        try {
            auto toks = dsl_detail::Lexer(f.text, f.name).run(out.diagnostics);
            dsl_detail::Parser(std::move(toks), out.diagnostics).document(raw);
        } catch (const dsl_detail::Abort&) {
        }
    }
    if (!out.ok()) return out;
    dsl_detail::Resolver(out).run(raw);
    return out;
}

inline ParseResult parse(std::string_view text, std::string file = "<input>") {
    return parse_files({{std::move(file), std::string(text)}});
}

/// Parses or throws ParseError carrying every diagnostic.
inline Document parse_or_throw(std::string_view text, std::string file = "<input>") {
    auto r = parse(text, std::move(file));
    if (!r.ok()) throw ParseError(std::move(r.diagnostics));
    return std::move(r.document);
}

namespace dsl_detail {

inline void print_map(std::ostringstream& out, const MapExpr& m, const std::string& indent) {
    out << "{\n";
    for (const auto& a : m.assignments) out << indent << "  " << a.attribute << " <- " << to_string(a.value) << ";\n";
    for (const auto& e : m.emits) {
        out << indent << "  emit " << (e.placement == Placement::First ? "first " : "last ") << e.relationship << " ";
        print_map(out, e.map, indent + "  ");
        out << ";\n";
    }
    out << indent << "}";
}

inline void print_ladder(std::ostringstream& out, const Ladder& t, const std::string& indent) {
    switch (t.kind()) {
        case Ladder::Kind::Base:
            out << "base(" << t.child().name << " via " << to_string(t.src_nav()) << " / " << t.tgt_rel() << ")";
            return;
        case Ladder::Kind::Step:
            out << "step(" << t.child().name << " via " << to_string(t.src_nav()) << " / " << t.tgt_rel() << ",\n"
                << indent << "  ";
            print_ladder(out, t.rest(), indent + "  ");
            out << ")";
            return;
        case Ladder::Kind::Join:
            out << "join(";
            print_ladder(out, t.left(), indent + "  ");
            out << ",\n" << indent << "  ";
            print_ladder(out, t.right(), indent + "  ");
            out << ")";
            return;
    }
}

}  // namespace dsl_detail

inline std::string print(const Metamodel& mm) {
    std::ostringstream out;
    out << "metamodel " << mm.name << " {\n  root " << mm.root_class << ";\n";
    for (const auto& c : mm.classes) {
        out << "  class " << c.name << " {";
        if (c.flags.empty() && c.relationships.empty()) {
            out << " }\n";
            continue;
        }
        out << "\n";
        for (const auto& f : c.flags) out << "    flag " << f << ";\n";
        for (const auto& r : c.relationships)
            out << "    rel " << r.name << " : " << r.target_class << " " << to_string(r.multiplicity) << ";\n";
        out << "  }\n";
    }
    out << "}\n";
    return out.str();
}

/// Objects are listed by (class, id); flags and relationships follow the
/// class declaration.
inline std::string print(const ModelInstance& inst) {
    std::ostringstream out;
    out << "instance " << inst.name() << " : " << inst.metamodel().name << " {\n";
    // The root goes first so that reparsing selects the same root object.
    auto keys = inst.canonical_keys();
    if (auto root = inst.root()) {
        keys.erase(std::find(keys.begin(), keys.end(), *root));
        keys.insert(keys.begin(), *root);
    }
    for (auto k : keys) {
        const auto& n = inst.object(k);
        const auto& cls = inst.metamodel().get_class(n.class_name);
        out << "  " << inst.ref(k).to_string() << " {";
        bool first = true;
        for (const auto& f : cls.flags) {
            out << (first ? " " : ", ") << f << "=" << (n.flags.at(f) ? "true" : "false");
            first = false;
        }
        for (const auto& r : cls.relationships) {
            out << (first ? " " : ", ") << r.name << "=[";
            const auto& list = n.refs.at(r.name);
            for (std::size_t i = 0; i < list.size(); ++i) out << (i ? ", " : "") << inst.ref(list[i]).to_string();
            out << "]";
            first = false;
        }
        out << (first ? "}\n" : " }\n");
    }
    out << "}\n";
    return out.str();
}

inline std::string print(const OrderedTransformation& ot) {
    std::ostringstream out;
    out << "transform " << ot.name << " : " << ot.src_mm->name << " -> " << ot.tgt_mm->name << " {\n";
    for (const auto& r : ot.rungs) {
        out << "  rung " << r.name << " : " << r.src_class << " -> " << r.tgt_class << " {\n"
            << "    pre: " << to_string(r.pre) << ";\n"
            << "    post: " << to_string(r.post) << ";\n"
            << "    map ";
        dsl_detail::print_map(out, r.map, "    ");
        out << "\n  }\n";
    }
    out << "  ladder:\n    ";
    dsl_detail::print_ladder(out, ot.body, "    ");
    out << ";\n}\n";
    return out.str();
}

/// Canonical text of a whole document: metamodels, then transformations,
/// then instances, each in stored order, separated by blank lines.
inline std::string print(const Document& doc) {
    std::string out;
    auto add = [&](const std::string& s) {
        if (!out.empty()) out += "\n";
        out += s;
    };
    for (const auto& m : doc.metamodels) add(print(*m));
    for (const auto& t : doc.transformations) add(print(t));
    for (const auto& i : doc.instances) add(print(i));
    return out;
}

}  // namespace laddertx

#endif
