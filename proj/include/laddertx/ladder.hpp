#ifndef LADDERTX_LADDER_HPP
#define LADDERTX_LADDER_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "laddertx/contracts.hpp"
#include "laddertx/error.hpp"
#include "laddertx/instance.hpp"
#include "laddertx/metamodel.hpp"

namespace laddertx {

/// The (root source class, root target class, root map) a ladder hangs from.
struct LadderIndex {
    std::string src_class;
    std::string tgt_class;
    MapExpr map;

    bool operator==(const LadderIndex&) const = default;
};

inline LadderIndex index_of(const Rung& r) { return {r.src_class, r.tgt_class, r.map}; }

/// Inductive transformation value. BASE and STEP hang one child rung below
/// the index via a source navigation R and a target relationship S; STEP
/// continues with a ladder indexed by that child rung; JOIN conjoins two
/// ladders sharing an index. Nodes are immutable and shared between copies.
class Ladder {
public:
    enum class Kind { Base, Step, Join };

    Kind kind() const { return node_->kind; }
    const LadderIndex& index() const { return node_->index; }

    const Rung& child() const { return node_->child; }
    const Navigation& src_nav() const { return node_->src_nav; }
    const std::string& tgt_rel() const { return node_->tgt_rel; }
    const Ladder& rest() const { return node_->subs.at(0); }
    const Ladder& left() const { return node_->subs.at(0); }
    const Ladder& right() const { return node_->subs.at(1); }

    /// Identity of this node; stable across copies of the same ladder value.
    const void* identity() const { return node_.get(); }

    /// Unchecked constructors; see base(), step() and join() for the checked ones.
    static Ladder make_base(LadderIndex idx, Rung child, Navigation r, std::string s) {
        return Ladder(Node{Kind::Base, std::move(idx), std::move(child), std::move(r), std::move(s), {}});
    }
    static Ladder make_step(LadderIndex idx, Rung child, Navigation r, std::string s, Ladder rest) {
        return Ladder(Node{Kind::Step, std::move(idx), std::move(child), std::move(r), std::move(s), {std::move(rest)}});
    }
    static Ladder make_join(Ladder l, Ladder r) {
        auto idx = l.index();
        return Ladder(Node{Kind::Join, std::move(idx), {}, {}, {}, {std::move(l), std::move(r)}});
    }

    std::size_t node_count() const {
        std::size_t n = 1;
        for (const auto& s : node_->subs) n += s.node_count();
        return n;
    }

    bool operator==(const Ladder& o) const {
        if (node_ == o.node_) return true;
        const auto& a = *node_;
        const auto& b = *o.node_;
        return a.kind == b.kind && a.index == b.index && a.child == b.child && a.src_nav == b.src_nav &&
               a.tgt_rel == b.tgt_rel && a.subs == b.subs;
    }

private:
    struct Node {
        Kind kind;
        LadderIndex index;
        Rung child;
        Navigation src_nav;
        std::string tgt_rel;
        std::vector<Ladder> subs;
    };

    explicit Ladder(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

    std::shared_ptr<const Node> node_;
};

/// BASE and STEP nodes of `t` in order, looking through JOINs.
inline std::vector<Ladder> branches(const Ladder& t) {
    if (t.kind() != Ladder::Kind::Join) return {t};
    auto out = branches(t.left());
    auto more = branches(t.right());
    out.insert(out.end(), more.begin(), more.end());
    return out;
}

/// Canonical S-expression, e.g. `(STEP C2T classes/tables (BASE A2C attrs/columns))`.
inline std::string to_sexpr(const Ladder& t) {
    switch (t.kind()) {
        case Ladder::Kind::Base:
            return "(BASE " + t.child().name + " " + to_string(t.src_nav()) + "/" + t.tgt_rel() + ")";
        case Ladder::Kind::Step:
            return "(STEP " + t.child().name + " " + to_string(t.src_nav()) + "/" + t.tgt_rel() + " " +
                   to_sexpr(t.rest()) + ")";
        case Ladder::Kind::Join: return "(JOIN " + to_sexpr(t.left()) + " " + to_sexpr(t.right()) + ")";
    }
    return "?";
}

namespace detail {

/// Side conditions of one BASE/STEP hop, reported against `where`.
inline void check_hop(const Metamodel& src_mm, const Metamodel& tgt_mm, const LadderIndex& idx, const Rung& child,
                      const Navigation& r, const std::string& s, const std::string& where, ValidationReport& report) {
    if (r.empty()) {
        report.add(where, "empty source navigation");
        return;
    }
    std::string cls = idx.src_class;
    Multiplicity r_mult = Multiplicity::One;
    for (const auto& rel : r) {
        const auto* schema = src_mm.find_class(cls);
        const auto* decl = schema ? schema->find_relationship(rel) : nullptr;
        if (!decl) {
            report.add(where, "relationship '" + rel + "' is not declared on source class '" + cls + "'");
            return;
        }
        if (decl->multiplicity == Multiplicity::Many) r_mult = Multiplicity::Many;
        cls = decl->target_class;
    }
    if (cls != child.src_class)
        report.add(where, "navigation '" + to_string(r) + "' reaches '" + cls + "' but rung '" + child.name +
                              "' transforms '" + child.src_class + "'");
    const auto* tschema = tgt_mm.find_class(idx.tgt_class);
    const auto* sdecl = tschema ? tschema->find_relationship(s) : nullptr;
    if (!sdecl) {
        report.add(where, "relationship '" + s + "' is not declared on target class '" + idx.tgt_class + "'");
        return;
    }
    if (sdecl->target_class != child.tgt_class)
        report.add(where, "relationship '" + s + "' targets '" + sdecl->target_class + "' but rung '" + child.name +
                              "' produces '" + child.tgt_class + "'");
    if (sdecl->multiplicity != r_mult)
        report.add(where, std::string("multiplicity mismatch: '") + to_string(r) + "' is " + to_string(r_mult) +
                              " but '" + s + "' is " + to_string(sdecl->multiplicity));
}

inline void check_ladder(const Metamodel& src_mm, const Metamodel& tgt_mm, const Ladder& t, const LadderIndex& expected,
                         const std::string& where, ValidationReport& report) {
    if (!(t.index() == expected)) report.add(where, "ladder index does not match its parent rung");
    switch (t.kind()) {
        case Ladder::Kind::Join:
            check_ladder(src_mm, tgt_mm, t.left(), expected, where + ".L", report);
            check_ladder(src_mm, tgt_mm, t.right(), expected, where + ".R", report);
            return;
        case Ladder::Kind::Base:
        case Ladder::Kind::Step: {
            std::string here = where + "/" + t.child().name;
            report.merge(check_rung(t.child(), src_mm, tgt_mm));
            check_hop(src_mm, tgt_mm, expected, t.child(), t.src_nav(), t.tgt_rel(), here, report);
            if (t.kind() == Ladder::Kind::Step)
                check_ladder(src_mm, tgt_mm, t.rest(), index_of(t.child()), here, report);
            break;
        }
    }
}

/// A ONE target relationship can be fed by at most one branch at an index,
/// and two branches may share a relationship only with distinct target
/// classes; otherwise their objects in S(y) cannot be told apart.
inline void check_shared_one(const Metamodel& tgt_mm, const Ladder& t, const std::string& where,
                             ValidationReport& report) {
    std::map<std::string, int> uses;
    std::map<std::pair<std::string, std::string>, std::string> feeders;
    for (const auto& b : branches(t)) {
        ++uses[b.tgt_rel()];
        auto [it, fresh] = feeders.emplace(std::pair{b.tgt_rel(), b.child().tgt_class}, b.child().name);
        if (!fresh)
            report.add(where, "branches '" + it->second + "' and '" + b.child().name + "' both put '" +
                                  b.child().tgt_class + "' objects into '" + b.tgt_rel() + "'");
        if (b.kind() == Ladder::Kind::Step) check_shared_one(tgt_mm, b.rest(), where + "/" + b.child().name, report);
    }
    const auto* cls = tgt_mm.find_class(t.index().tgt_class);
    if (!cls) return;
    for (const auto& [rel, n] : uses) {
        const auto* decl = cls->find_relationship(rel);
        if (decl && decl->multiplicity == Multiplicity::One && n > 1)
            report.add(where, "ONE relationship '" + rel + "' is fed by " + std::to_string(n) + " branches");
    }
}

}  // namespace detail

/// Checked BASE constructor.
inline Ladder base(const Metamodel& src_mm, const Metamodel& tgt_mm, const LadderIndex& idx, Rung child, Navigation r,
                   std::string s) {
    ValidationReport report = check_rung(child, src_mm, tgt_mm);
    detail::check_hop(src_mm, tgt_mm, idx, child, r, s, "base " + child.name, report);
    if (!report.ok()) throw LadderError(report.to_string());
    return Ladder::make_base(idx, std::move(child), std::move(r), std::move(s));
}

/// Checked STEP constructor; `rest` must be indexed by `child`.
inline Ladder step(const Metamodel& src_mm, const Metamodel& tgt_mm, const LadderIndex& idx, Rung child, Navigation r,
                   std::string s, Ladder rest) {
    if (!(rest.index() == index_of(child)))
        throw LadderError("step " + child.name + ": rest is indexed by '" + rest.index().src_class + "' -> '" +
                          rest.index().tgt_class + "', not by the child rung");
    ValidationReport report = check_rung(child, src_mm, tgt_mm);
    detail::check_hop(src_mm, tgt_mm, idx, child, r, s, "step " + child.name, report);
    if (!report.ok()) throw LadderError(report.to_string());
    return Ladder::make_step(idx, std::move(child), std::move(r), std::move(s), std::move(rest));
}

/// Checked JOIN constructor; both sides must share an index.
inline Ladder join(Ladder t1, Ladder t2) {
    if (!(t1.index() == t2.index()))
        throw LadderError("join: index mismatch ('" + t1.index().src_class + "' -> '" + t1.index().tgt_class +
                          "' vs '" + t2.index().src_class + "' -> '" + t2.index().tgt_class + "')");
    return Ladder::make_join(std::move(t1), std::move(t2));
}

/// A complete ordered transformation: the root rung supplies the root
/// contract that the ladder itself leaves out.
struct OrderedTransformation {
    std::string name;
    std::shared_ptr<const Metamodel> src_mm;
    std::shared_ptr<const Metamodel> tgt_mm;
    Rung root_rung;
    Ladder body = Ladder::make_base({}, {}, {}, {});
    /// Declared rungs in declaration order, including unused ones.
    std::vector<Rung> rungs;

    bool operator==(const OrderedTransformation& o) const {
        auto same_mm = [](const auto& a, const auto& b) { return a == b || (a && b && *a == *b); };
        return name == o.name && same_mm(src_mm, o.src_mm) && same_mm(tgt_mm, o.tgt_mm) && root_rung == o.root_rung &&
               body == o.body && rungs == o.rungs;
    }
};

inline ValidationReport well_formed(const OrderedTransformation& ot) {
    ValidationReport report;
    if (!ot.src_mm || !ot.tgt_mm) {
        report.add(ot.name, "missing metamodel");
        return report;
    }
    auto src_report = validate_metamodel(*ot.src_mm);
    auto tgt_report = validate_metamodel(*ot.tgt_mm);
    report.merge(src_report);
    report.merge(tgt_report);
    if (!report.ok()) return report;

    if (ot.root_rung.src_class != ot.src_mm->root_class)
        report.add(ot.root_rung.name, "root rung transforms '" + ot.root_rung.src_class + "' but the source root is '" +
                                          ot.src_mm->root_class + "'");
    if (ot.root_rung.tgt_class != ot.tgt_mm->root_class)
        report.add(ot.root_rung.name, "root rung produces '" + ot.root_rung.tgt_class + "' but the target root is '" +
                                          ot.tgt_mm->root_class + "'");
    report.merge(check_rung(ot.root_rung, *ot.src_mm, *ot.tgt_mm));
    detail::check_ladder(*ot.src_mm, *ot.tgt_mm, ot.body, index_of(ot.root_rung), ot.root_rung.name, report);
    if (report.ok()) detail::check_shared_one(*ot.tgt_mm, ot.body, ot.root_rung.name, report);
    return report;
}

/// Every rung of the transformation in preorder, root first.
inline std::vector<Rung> ladder_rungs(const OrderedTransformation& ot) {
    std::vector<Rung> out{ot.root_rung};
    auto walk = [&](auto&& self, const Ladder& t) -> void {
        for (const auto& b : branches(t)) {
            out.push_back(b.child());
            if (b.kind() == Ladder::Kind::Step) self(self, b.rest());
        }
    };
    walk(walk, ot.body);
    return out;
}

/// Copy of `ot` with every use of rung `name` replaced by `replacement`,
/// including the ladder indices that carry its map. The result is not
/// re-checked.
inline OrderedTransformation substitute_rung(const OrderedTransformation& ot, const std::string& name,
                                             const Rung& replacement) {
    auto swap_index = [&](const LadderIndex& idx, const Rung& old) {
        return idx == index_of(old) ? index_of(replacement) : idx;
    };
    const Rung* old = nullptr;
    for (const auto& r : ot.rungs)
        if (r.name == name) old = &r;
    if (ot.root_rung.name == name) old = &ot.root_rung;
    if (!old) throw LadderError("no rung named '" + name + "'");
    Rung before = *old;

    auto rebuild = [&](auto&& self, const Ladder& t) -> Ladder {
        if (t.kind() == Ladder::Kind::Join) return Ladder::make_join(self(self, t.left()), self(self, t.right()));
        auto idx = swap_index(t.index(), before);
        Rung child = t.child().name == name ? replacement : t.child();
        if (t.kind() == Ladder::Kind::Base) return Ladder::make_base(idx, child, t.src_nav(), t.tgt_rel());
        return Ladder::make_step(idx, child, t.src_nav(), t.tgt_rel(), self(self, t.rest()));
    };
    OrderedTransformation out = ot;
    if (out.root_rung.name == name) out.root_rung = replacement;
    for (auto& r : out.rungs)
        if (r.name == name) r = replacement;
    out.body = rebuild(rebuild, ot.body);
    return out;
}

/// Source classes that no rung transforms.
inline std::vector<std::string> unmapped_source_classes(const OrderedTransformation& ot) {
    std::set<std::string> mapped;
    for (const auto& r : ladder_rungs(ot)) mapped.insert(r.src_class);
    std::vector<std::string> out;
    for (const auto& c : ot.src_mm->classes)
        if (!mapped.count(c.name)) out.push_back(c.name);
    return out;
}

}  // namespace laddertx

#endif
