#ifndef LADDERTX_CONTRACTS_HPP
#define LADDERTX_CONTRACTS_HPP

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "laddertx/error.hpp"
#include "laddertx/instance.hpp"
#include "laddertx/metamodel.hpp"

namespace laddertx {

enum class ExprKind { BoolLit, NatLit, Attr, Succ, Eq, And, Or, Implies, Not };
enum class Side { Src, Tgt };
enum class ValueType { Bool, Nat };

/// Immutable expression tree shared by preconditions, postconditions and map
/// assignments. Copies share structure; equality is structural.
class Expr {
public:
    Expr() : Expr(boolean(true)) {}

    static Expr boolean(bool b) { return Expr(Node{ExprKind::BoolLit, b, 0, Side::Src, {}, {}}); }
    static Expr nat(Nat n) { return Expr(Node{ExprKind::NatLit, false, n, Side::Src, {}, {}}); }
    static Expr attr(Side side, std::string name) {
        return Expr(Node{ExprKind::Attr, false, 0, side, std::move(name), {}});
    }
    static Expr succ(Expr e) { return unary(ExprKind::Succ, std::move(e)); }
    static Expr negate(Expr e) { return unary(ExprKind::Not, std::move(e)); }
    static Expr eq(Expr a, Expr b) { return binary(ExprKind::Eq, std::move(a), std::move(b)); }
    static Expr conj(Expr a, Expr b) { return binary(ExprKind::And, std::move(a), std::move(b)); }
    static Expr disj(Expr a, Expr b) { return binary(ExprKind::Or, std::move(a), std::move(b)); }
    static Expr implies(Expr a, Expr b) { return binary(ExprKind::Implies, std::move(a), std::move(b)); }

    ExprKind kind() const { return node_->kind; }
    bool bool_value() const { return node_->b; }
    Nat nat_value() const { return node_->n; }
    Side side() const { return node_->side; }
    const std::string& attribute() const { return node_->name; }
    std::size_t arity() const { return node_->args.size(); }
    const Expr& operand(std::size_t i) const { return node_->args.at(i); }

    bool mentions(Side s) const {
        if (kind() == ExprKind::Attr) return side() == s;
        for (const auto& a : node_->args)
            if (a.mentions(s)) return true;
        return false;
    }

    std::size_t size() const {
        std::size_t n = 1;
        for (const auto& a : node_->args) n += a.size();
        return n;
    }

    bool operator==(const Expr& o) const {
        if (node_ == o.node_) return true;
        const auto& a = *node_;
        const auto& b = *o.node_;
        return a.kind == b.kind && a.b == b.b && a.n == b.n && a.side == b.side && a.name == b.name &&
               a.args == b.args;
    }

private:
    struct Node {
        ExprKind kind;
        bool b;
        Nat n;
        Side side;
        std::string name;
        std::vector<Expr> args;
    };

    explicit Expr(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

    static Expr unary(ExprKind k, Expr e) { return Expr(Node{k, false, 0, Side::Src, {}, {std::move(e)}}); }
    static Expr binary(ExprKind k, Expr a, Expr b) {
        return Expr(Node{k, false, 0, Side::Src, {}, {std::move(a), std::move(b)}});
    }

    std::shared_ptr<const Node> node_;
};

using Value = std::variant<bool, Nat>;

namespace detail {

inline int precedence(ExprKind k) {
    switch (k) {
        case ExprKind::Implies: return 1;
        case ExprKind::Or: return 2;
        case ExprKind::And: return 3;
        case ExprKind::Not: return 4;
        case ExprKind::Eq: return 5;
        default: return 6;
    }
}

inline const char* op_text(ExprKind k) {
    switch (k) {
        case ExprKind::Implies: return " -> ";
        case ExprKind::Or: return " \\/ ";
        case ExprKind::And: return " /\\ ";
        case ExprKind::Eq: return " = ";
        default: return "";
    }
}

}  // namespace detail

/// Concrete syntax of an expression. Parentheses are emitted exactly where the
/// tree shape requires them, so printing then parsing yields the same tree.
inline std::string to_string(const Expr& e) {
    using detail::precedence;
    auto wrap = [](const Expr& child, bool paren) { return paren ? "(" + to_string(child) + ")" : to_string(child); };
    switch (e.kind()) {
        case ExprKind::BoolLit: return e.bool_value() ? "true" : "false";
        case ExprKind::NatLit: return std::to_string(e.nat_value());
        case ExprKind::Attr: return std::string(e.side() == Side::Src ? "src." : "tgt.") + e.attribute();
        case ExprKind::Succ: return "succ(" + to_string(e.operand(0)) + ")";
        case ExprKind::Not: {
            const auto& a = e.operand(0);
            return "not " + wrap(a, precedence(a.kind()) < precedence(ExprKind::Not));
        }
        case ExprKind::Eq: {
            // `=` does not associate and binds tighter than the connectives.
            const auto& l = e.operand(0);
            const auto& r = e.operand(1);
            return wrap(l, precedence(l.kind()) <= precedence(ExprKind::Eq)) + " = " +
                   wrap(r, precedence(r.kind()) <= precedence(ExprKind::Eq));
        }
        case ExprKind::And:
        case ExprKind::Or: {
            // Left associative.
            const auto& l = e.operand(0);
            const auto& r = e.operand(1);
            int p = precedence(e.kind());
            return wrap(l, precedence(l.kind()) < p) + detail::op_text(e.kind()) + wrap(r, precedence(r.kind()) <= p);
        }
        case ExprKind::Implies: {
            // Right associative.
            const auto& l = e.operand(0);
            const auto& r = e.operand(1);
            int p = precedence(e.kind());
            return wrap(l, precedence(l.kind()) <= p) + " -> " + wrap(r, precedence(r.kind()) < p);
        }
    }
    return "?";
}

/// Static type of `e` against the classes bound to `src` and `tgt`; a null
/// schema means that side is not in scope.
inline ValueType typecheck(const Expr& e, const ClassSchema* src, const ClassSchema* tgt) {
    auto expect = [&](const Expr& sub, ValueType want, const char* what) {
        if (typecheck(sub, src, tgt) != want)
            throw ContractError(std::string(what) + " expects a " + (want == ValueType::Bool ? "boolean" : "natural") +
                                " operand in '" + to_string(e) + "'");
    };
    switch (e.kind()) {
        case ExprKind::BoolLit: return ValueType::Bool;
        case ExprKind::NatLit: return ValueType::Nat;
        case ExprKind::Attr: {
            const ClassSchema* schema = e.side() == Side::Src ? src : tgt;
            const char* var = e.side() == Side::Src ? "src" : "tgt";
            if (!schema) throw ContractError(std::string("'") + var + "' is not in scope in '" + to_string(e) + "'");
            if (e.attribute() == kBaseAttribute) return ValueType::Nat;
            if (schema->has_flag(e.attribute())) return ValueType::Bool;
            throw ContractError(std::string("unresolved attribute ") + var + "." + e.attribute() + " on class '" +
                                schema->name + "'");
        }
        case ExprKind::Succ: expect(e.operand(0), ValueType::Nat, "succ"); return ValueType::Nat;
        case ExprKind::Not: expect(e.operand(0), ValueType::Bool, "not"); return ValueType::Bool;
        case ExprKind::Eq: {
            auto l = typecheck(e.operand(0), src, tgt);
            if (typecheck(e.operand(1), src, tgt) != l)
                throw ContractError("type mismatch in '" + to_string(e) + "'");
            return ValueType::Bool;
        }
        case ExprKind::And:
        case ExprKind::Or:
        case ExprKind::Implies:
            expect(e.operand(0), ValueType::Bool, "connective");
            expect(e.operand(1), ValueType::Bool, "connective");
            return ValueType::Bool;
    }
    throw ContractError("malformed expression");
}

inline Value eval(const Expr& e, const ObjectNode* src, const ObjectNode* tgt) {
    auto as_bool = [&](const Expr& sub) {
        auto v = eval(sub, src, tgt);
        if (!std::holds_alternative<bool>(v)) throw ContractError("type mismatch: expected boolean in '" + to_string(e) + "'");
        return std::get<bool>(v);
    };
    switch (e.kind()) {
        case ExprKind::BoolLit: return e.bool_value();
        case ExprKind::NatLit: return e.nat_value();
        case ExprKind::Attr: {
            const ObjectNode* obj = e.side() == Side::Src ? src : tgt;
            const char* var = e.side() == Side::Src ? "src" : "tgt";
            if (!obj) throw ContractError(std::string("unresolved attribute ") + var + "." + e.attribute() + ": no object");
            if (e.attribute() == kBaseAttribute) return obj->id;
            auto it = obj->flags.find(e.attribute());
            if (it == obj->flags.end())
                throw ContractError(std::string("unresolved attribute ") + var + "." + e.attribute() + " on class '" +
                                    obj->class_name + "'");
            return it->second;
        }
        case ExprKind::Succ: {
            auto v = eval(e.operand(0), src, tgt);
            if (!std::holds_alternative<Nat>(v)) throw ContractError("type mismatch: succ of a boolean");
            return std::get<Nat>(v) + 1;
        }
        case ExprKind::Not: return !as_bool(e.operand(0));
        case ExprKind::Eq: {
            auto l = eval(e.operand(0), src, tgt);
            auto r = eval(e.operand(1), src, tgt);
            if (l.index() != r.index()) throw ContractError("type mismatch in '" + to_string(e) + "'");
            return l == r;
        }
        case ExprKind::And: return as_bool(e.operand(0)) && as_bool(e.operand(1));
        case ExprKind::Or: return as_bool(e.operand(0)) || as_bool(e.operand(1));
        case ExprKind::Implies: return !as_bool(e.operand(0)) || as_bool(e.operand(1));
    }
    throw ContractError("malformed expression");
}

/// Evaluates a predicate. Either object may be absent when the predicate does
/// not mention it.
inline bool eval_pred(const Expr& p, const ObjectNode* src, const ObjectNode* tgt) {
    auto v = eval(p, src, tgt);
    if (!std::holds_alternative<bool>(v)) throw ContractError("type mismatch: predicate '" + to_string(p) + "' is not boolean");
    return std::get<bool>(v);
}

enum class Placement { First, Last };

struct EmitClause;

struct Assignment {
    std::string attribute;
    Expr value;

    bool operator==(const Assignment&) const = default;
};

/// Builder for one target object: attribute assignments over `src` plus
/// extra objects emitted into MANY relationships of the new object.
struct MapExpr {
    std::string target_class;
    std::vector<Assignment> assignments;
    std::vector<EmitClause> emits;

    bool operator==(const MapExpr& o) const;
};

struct EmitClause {
    std::string relationship;
    Placement placement = Placement::First;
    MapExpr map;

    bool operator==(const EmitClause&) const = default;
};

inline bool MapExpr::operator==(const MapExpr& o) const {
    return target_class == o.target_class && assignments == o.assignments && emits == o.emits;
}

/// One class-to-class transformation with its contract.
struct Rung {
    std::string name;
    std::string src_class;
    std::string tgt_class;
    Expr pre = Expr::boolean(true);
    Expr post = Expr::boolean(true);
    MapExpr map;

    bool operator==(const Rung&) const = default;
};

/// Copy-id rung: pre true, post `src.id = tgt.id`, map `id <- src.id`.
inline Rung copy_id_rung(std::string name, std::string src_class, std::string tgt_class) {
    Rung r;
    r.name = std::move(name);
    r.src_class = std::move(src_class);
    r.tgt_class = tgt_class;
    r.post = Expr::eq(Expr::attr(Side::Src, kBaseAttribute), Expr::attr(Side::Tgt, kBaseAttribute));
    r.map.target_class = std::move(tgt_class);
    r.map.assignments.push_back({kBaseAttribute, Expr::attr(Side::Src, kBaseAttribute)});
    return r;
}

namespace detail {

inline void check_map(const MapExpr& m, const Metamodel& tgt_mm, const ClassSchema* src, const std::string& where,
                      ValidationReport& report) {
    const auto* cls = tgt_mm.find_class(m.target_class);
    if (!cls) {
        report.add(where, "map targets undeclared class '" + m.target_class + "'");
        return;
    }
    std::set<std::string> assigned;
    for (const auto& a : m.assignments) {
        if (!assigned.insert(a.attribute).second) {
            report.add(where, "attribute '" + a.attribute + "' assigned twice");
            continue;
        }
        if (a.value.mentions(Side::Tgt)) report.add(where, "map expression for '" + a.attribute + "' mentions tgt");
        ValueType want;
        if (a.attribute == kBaseAttribute)
            want = ValueType::Nat;
        else if (cls->has_flag(a.attribute))
            want = ValueType::Bool;
        else {
            report.add(where, "assignment to undeclared attribute '" + m.target_class + "." + a.attribute + "'");
            continue;
        }
        try {
            if (typecheck(a.value, src, nullptr) != want)
                report.add(where, "assignment to '" + a.attribute + "' has the wrong type");
        } catch (const ContractError& err) {
            report.add(where, err.what());
        }
    }
    if (!assigned.count(kBaseAttribute)) report.add(where, "map does not assign the base attribute 'id'");
    for (std::size_t i = 0; i < m.emits.size(); ++i) {
        const auto& emit = m.emits[i];
        std::string sub = where + ".emit[" + std::to_string(i) + "]";
        const auto* rel = cls->find_relationship(emit.relationship);
        if (!rel) {
            report.add(sub, "emit into undeclared relationship '" + m.target_class + "." + emit.relationship + "'");
            continue;
        }
        if (rel->multiplicity != Multiplicity::Many)
            report.add(sub, "emit into ONE relationship '" + emit.relationship + "'");
        if (emit.map.target_class != rel->target_class)
            report.add(sub, "emitted class '" + emit.map.target_class + "' does not match relationship target '" +
                                rel->target_class + "'");
        check_map(emit.map, tgt_mm, src, sub, report);
    }
}

}  // namespace detail

/// Static checks of a rung against the source and target metamodels.
inline ValidationReport check_rung(const Rung& r, const Metamodel& src_mm, const Metamodel& tgt_mm) {
    ValidationReport report;
    const auto* src = src_mm.find_class(r.src_class);
    const auto* tgt = tgt_mm.find_class(r.tgt_class);
    if (!src) report.add(r.name, "source class '" + r.src_class + "' is not declared in '" + src_mm.name + "'");
    if (!tgt) report.add(r.name, "target class '" + r.tgt_class + "' is not declared in '" + tgt_mm.name + "'");
    if (!src || !tgt) return report;
    if (r.map.target_class != r.tgt_class)
        report.add(r.name, "map builds '" + r.map.target_class + "' but the rung targets '" + r.tgt_class + "'");
    if (r.pre.mentions(Side::Tgt)) report.add(r.name, "precondition mentions tgt");
    try {
        if (typecheck(r.pre, src, nullptr) != ValueType::Bool) report.add(r.name, "precondition is not boolean");
    } catch (const ContractError& err) {
        report.add(r.name, std::string("precondition: ") + err.what());
    }
    try {
        if (typecheck(r.post, src, tgt) != ValueType::Bool) report.add(r.name, "postcondition is not boolean");
    } catch (const ContractError& err) {
        report.add(r.name, std::string("postcondition: ") + err.what());
    }
    detail::check_map(r.map, tgt_mm, src, r.name + ".map", report);
    return report;
}

/// Attribute values the map assigns for `src`; unassigned flags are false.
inline ObjectValue compute_map(const MapExpr& m, const ObjectNode& src, const Metamodel& tgt_mm) {
    const auto& cls = tgt_mm.get_class(m.target_class);
    ObjectValue out{m.target_class, 0, {}};
    for (const auto& f : cls.flags) out.flags[f] = false;
    bool has_id = false;
    for (const auto& a : m.assignments) {
        auto v = eval(a.value, &src, nullptr);
        if (a.attribute == kBaseAttribute) {
            if (!std::holds_alternative<Nat>(v)) throw ContractError("id assignment is not natural");
            out.id = std::get<Nat>(v);
            has_id = true;
        } else if (cls.has_flag(a.attribute)) {
            if (!std::holds_alternative<bool>(v)) throw ContractError("flag assignment is not boolean");
            out.flags[a.attribute] = std::get<bool>(v);
        } else {
            throw ContractError("assignment to undeclared attribute '" + m.target_class + "." + a.attribute + "'");
        }
    }
    if (!has_id) throw ContractError("map for '" + m.target_class + "' does not assign id");
    return out;
}

/// Result of building one target object. LAST emits are held back until the
/// traversal has linked the object's children.
struct MapResult {
    ObjectKey key;
    std::vector<std::pair<std::string, ObjectKey>> pending_last;
};

inline MapResult apply_map_deferred(const MapExpr& m, const ObjectNode& src, ModelInstance& sink);

inline void finish_map(const MapResult& result, ModelInstance& sink) {
    for (const auto& [rel, key] : result.pending_last) sink.append_ref(result.key, rel, key);
}

inline MapResult apply_map_deferred(const MapExpr& m, const ObjectNode& src, ModelInstance& sink) {
    auto v = compute_map(m, src, sink.metamodel());
    MapResult result{sink.build_object(v.class_name, v.id, v.flags), {}};
    for (const auto& emit : m.emits) {
        auto child = apply_map_deferred(emit.map, src, sink);
        finish_map(child, sink);
        if (emit.placement == Placement::First)
            sink.append_ref(result.key, emit.relationship, child.key);
        else
            result.pending_last.emplace_back(emit.relationship, child.key);
    }
    return result;
}

/// Builds the target object for `src` together with all its emitted objects.
inline ObjectKey apply_map(const MapExpr& m, const ObjectNode& src, ModelInstance& sink) {
    auto result = apply_map_deferred(m, src, sink);
    finish_map(result, sink);
    return result.key;
}

enum class HoleVerdict { Holds, Vacuous, Failed };

inline const char* to_string(HoleVerdict v) {
    switch (v) {
        case HoleVerdict::Holds: return "HOLDS";
        case HoleVerdict::Vacuous: return "VACUOUS";
        case HoleVerdict::Failed: return "FAILED";
    }
    return "?";
}

/// Evidence that a rung's precondition implies its postcondition on one
/// (source, target) pair. For emitted objects `emit` holds the emit index and
/// the postcondition is agreement with the emit's assignments.
struct HoleEvidence {
    std::string rung;
    ObjectRef src;
    std::optional<ObjectRef> tgt;
    bool pre_value = false;
    bool post_value = false;
    HoleVerdict verdict = HoleVerdict::Failed;
    std::optional<std::size_t> emit;
    std::string diagnostic;

    bool operator==(const HoleEvidence&) const = default;
};

inline HoleVerdict hole_verdict(bool pre, bool post) {
    if (!pre) return HoleVerdict::Vacuous;
    return post ? HoleVerdict::Holds : HoleVerdict::Failed;
}

/// Checks Pre(src) -> Post(src, tgt). Evaluation errors become FAILED
/// evidence carrying the message.
inline HoleEvidence check_hole(const Rung& r, ObjectKey src, std::optional<ObjectKey> tgt, const ModelInstance& src_model,
                               const ModelInstance& tgt_model) {
    const auto& s = src_model.object(src);
    HoleEvidence ev{r.name, src_model.ref(src), std::nullopt, false, false, HoleVerdict::Failed, std::nullopt, {}};
    if (tgt) ev.tgt = tgt_model.ref(*tgt);
    try {
        if (s.class_name != r.src_class)
            throw ContractError("source " + ev.src.to_string() + " is not of class '" + r.src_class + "'");
        ev.pre_value = eval_pred(r.pre, &s, nullptr);
        if (ev.pre_value) {
            if (!tgt) throw ContractError("no target object");
            const auto& t = tgt_model.object(*tgt);
            if (t.class_name != r.tgt_class)
                throw ContractError("target " + ev.tgt->to_string() + " is not of class '" + r.tgt_class + "'");
            ev.post_value = eval_pred(r.post, &s, &t);
        }
        ev.verdict = hole_verdict(ev.pre_value, ev.post_value);
    } catch (const Error& err) {
        ev.verdict = HoleVerdict::Failed;
        ev.diagnostic = err.what();
    }
    return ev;
}

/// Checks an emitted object against the values its emit clause assigns.
inline HoleEvidence check_emit(const Rung& r, std::size_t emit_index, const MapExpr& emit_map, ObjectKey src,
                               std::optional<ObjectKey> tgt, const ModelInstance& src_model,
                               const ModelInstance& tgt_model) {
    HoleEvidence ev{r.name, src_model.ref(src), std::nullopt, true, false, HoleVerdict::Failed, emit_index, {}};
    if (tgt) ev.tgt = tgt_model.ref(*tgt);
    try {
        if (!tgt) throw ContractError("emitted object is missing");
        ev.post_value = compute_map(emit_map, src_model.object(src), tgt_model.metamodel()) == tgt_model.value(*tgt);
        ev.verdict = hole_verdict(true, ev.post_value);
    } catch (const Error& err) {
        ev.diagnostic = err.what();
    }
    return ev;
}

}  // namespace laddertx

#endif
