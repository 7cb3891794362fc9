#ifndef LADDERTX_GENERATE_HPP
#define LADDERTX_GENERATE_HPP

// Seeded random scenarios for property tests: metamodel pairs mirrored class
// by class, copy-id transformations over them, conforming source instances,
// and the mutations the acceptance checks inject.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "laddertx/contracts.hpp"
#include "laddertx/dsl.hpp"
#include "laddertx/instance.hpp"
#include "laddertx/ladder.hpp"
#include "laddertx/metamodel.hpp"

namespace laddertx::gen {

using Rng = std::mt19937_64;

struct Options {
    int max_depth = 4;          // containment depth below the root
    int max_objects = 5;        // per class
    int max_branches = 3;       // children per class, so JOIN arity at an index
    int max_classes = 14;       // mapped classes, root included
    double one_prob = 0.0;      // chance a relationship is ONE
    double hop_prob = 0.15;     // chance R passes through an unmapped class
    double keep_pre_prob = 0.0; // chance a rung's pre is `src.keep`
};

struct Scenario {
    OrderedTransformation ot;
    ModelInstance src;
};

namespace detail {

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

struct ClassPlan {
    int parent = -1;
    int depth = 0;
    Multiplicity mult = Multiplicity::Many;
    bool hop = false; // R = r<i>.m through class H<i>
    std::vector<int> children;
};

inline std::string src_name(int i) { return "C" + std::to_string(i); }
inline std::string tgt_name(int i) { return "D" + std::to_string(i); }
inline std::string hop_name(int i) { return "H" + std::to_string(i); }
inline std::string src_rel(int i) { return "r" + std::to_string(i); }
inline std::string tgt_rel(int i) { return "s" + std::to_string(i); }
inline std::string rung_name(int i) { return "C" + std::to_string(i) + "toD" + std::to_string(i); }

/// `n` distinct ids from [1, 99], in random order.
inline std::vector<Nat> distinct_ids(Rng& rng, int n) {
    std::vector<Nat> pool(99);
    for (Nat i = 0; i < 99; ++i) pool[i] = i + 1;
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(static_cast<std::size_t>(n));
    return pool;
}

}  // namespace detail

inline Scenario scenario(Rng& rng, const Options& opt = {}) {
    using namespace detail;
    std::vector<ClassPlan> plan{{}};
    for (std::size_t i = 0; i < plan.size(); ++i) {
        if (plan[i].depth >= opt.max_depth) continue;
        int lo = i == 0 ? 1 : 0;
        int k = uniform(rng, lo, opt.max_branches);
        for (int c = 0; c < k && static_cast<int>(plan.size()) < opt.max_classes; ++c) {
            ClassPlan ch;
            ch.parent = static_cast<int>(i);
            ch.depth = plan[i].depth + 1;
            ch.mult = chance(rng, opt.one_prob) ? Multiplicity::One : Multiplicity::Many;
            ch.hop = ch.mult == Multiplicity::Many && chance(rng, opt.hop_prob);
            plan[i].children.push_back(static_cast<int>(plan.size()));
            plan.push_back(ch);
        }
    }

    Metamodel smm{"S", src_name(0), {}};
    Metamodel tmm{"T", tgt_name(0), {}};
    for (int i = 0; i < static_cast<int>(plan.size()); ++i) {
        ClassSchema sc{src_name(i), {"keep"}, {}};
        ClassSchema tc{tgt_name(i), {"mark"}, {}};
        for (int ch : plan[i].children) {
            const auto& p = plan[ch];
            sc.relationships.push_back({src_rel(ch), p.hop ? hop_name(ch) : src_name(ch), p.mult});
            tc.relationships.push_back({tgt_rel(ch), tgt_name(ch), p.mult});
        }
        smm.classes.push_back(std::move(sc));
        tmm.classes.push_back(std::move(tc));
    }
    for (int i = 0; i < static_cast<int>(plan.size()); ++i)
        if (plan[i].hop) smm.classes.push_back({hop_name(i), {}, {{"m", src_name(i), Multiplicity::Many}}});

    Scenario out;
    out.ot.name = "gen";
    out.ot.src_mm = std::make_shared<const Metamodel>(std::move(smm));
    out.ot.tgt_mm = std::make_shared<const Metamodel>(std::move(tmm));
    std::vector<Rung> rungs;
    for (int i = 0; i < static_cast<int>(plan.size()); ++i) {
        Rung r = copy_id_rung(rung_name(i), src_name(i), tgt_name(i));
        if (i > 0 && chance(rng, opt.keep_pre_prob)) r.pre = Expr::attr(Side::Src, "keep");
        rungs.push_back(r);
    }
    out.ot.root_rung = rungs[0];
    out.ot.rungs = rungs;

    const auto& S = *out.ot.src_mm;
    const auto& T = *out.ot.tgt_mm;
    auto ladder_at = [&](auto&& self, int i) -> Ladder {
        std::optional<Ladder> acc;
        for (int ch : plan[i].children) {
            Navigation nav{src_rel(ch)};
            if (plan[ch].hop) nav.push_back("m");
            Ladder b = plan[ch].children.empty()
                           ? base(S, T, index_of(rungs[i]), rungs[ch], nav, tgt_rel(ch))
                           : step(S, T, index_of(rungs[i]), rungs[ch], nav, tgt_rel(ch), self(self, ch));
            acc = acc ? join(*acc, b) : b;
        }
        return *acc;
    };
    out.ot.body = ladder_at(ladder_at, 0);

    // Objects: one root, up to max_objects of every other class, each child
    // contained by a random object of its parent class.
    ModelInstance m(out.ot.src_mm, "src");
    auto flag = [&] { return std::map<std::string, bool>{{"keep", chance(rng, 0.5)}}; };
    std::vector<std::vector<ObjectKey>> objs(plan.size());
    objs[0].push_back(m.build_object(src_name(0), static_cast<Nat>(uniform(rng, 1, 99)), flag()));
    for (int i = 1; i < static_cast<int>(plan.size()); ++i) {
        const auto& parents = objs[static_cast<std::size_t>(plan[i].parent)];
        if (parents.empty()) continue;
        std::vector<ObjectKey> holders = parents;
        if (plan[i].hop) {
            // The intermediate objects hang off the parents; the mapped objects
            // hang off the intermediates.
            int nh = uniform(rng, 0, opt.max_objects);
            std::vector<ObjectKey> hops;
            for (Nat id : distinct_ids(rng, nh)) {
                auto h = m.build_object(hop_name(i), id);
                m.append_ref(parents[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(parents.size()) - 1))],
                             src_rel(i), h);
                hops.push_back(h);
            }
            holders = hops;
            if (holders.empty()) continue;
        }
        int n = uniform(rng, 0, opt.max_objects);
        if (plan[i].mult == Multiplicity::One) n = std::min<int>(n, static_cast<int>(holders.size()));
        std::vector<ObjectKey> order = holders;
        std::shuffle(order.begin(), order.end(), rng);
        const std::string rel = plan[i].hop ? "m" : src_rel(i);
        auto ids = distinct_ids(rng, n);
        for (int k = 0; k < n; ++k) {
            auto obj = m.build_object(src_name(i), ids[static_cast<std::size_t>(k)], flag());
            objs[static_cast<std::size_t>(i)].push_back(obj);
            ObjectKey holder = plan[i].mult == Multiplicity::One
                                   ? order[static_cast<std::size_t>(k)]
                                   : holders[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(holders.size()) - 1))];
            m.append_ref(holder, rel, obj);
        }
    }
    m.freeze();
    out.src = std::move(m);
    return out;
}

/// Rungs whose source class has at least one object in `src`.
inline std::vector<std::string> exercised_rungs(const OrderedTransformation& ot, const ModelInstance& src) {
    std::vector<std::string> out;
    for (const auto& r : ladder_rungs(ot))
        if (!src.objects_of(r.src_class).empty()) out.push_back(r.name);
    return out;
}

inline Rung find_rung(const OrderedTransformation& ot, const std::string& name) {
    for (const auto& r : ladder_rungs(ot))
        if (r.name == name) return r;
    throw LadderError("no rung named '" + name + "'");
}

/// `ot` with the id assignment of rung `name` replaced by `succ(src.id)`.
inline OrderedTransformation inject_succ(const OrderedTransformation& ot, const std::string& name) {
    Rung r = find_rung(ot, name);
    for (auto& a : r.map.assignments)
        if (a.attribute == kBaseAttribute) a.value = Expr::succ(Expr::attr(Side::Src, kBaseAttribute));
    return substitute_rung(ot, name, r);
}

/// `ot` with the precondition of rung `name` replaced by `false`.
inline OrderedTransformation pre_false(const OrderedTransformation& ot, const std::string& name) {
    Rung r = find_rung(ot, name);
    r.pre = Expr::boolean(false);
    return substitute_rung(ot, name, r);
}

enum class TargetMutation { ChangeId, Unlink, Swap, Extra, FlipFlag };

inline const char* to_string(TargetMutation m) {
    switch (m) {
        case TargetMutation::ChangeId: return "change-id";
        case TargetMutation::Unlink: return "unlink";
        case TargetMutation::Swap: return "swap";
        case TargetMutation::Extra: return "extra";
        case TargetMutation::FlipFlag: return "flip-flag";
    }
    return "?";
}

struct MutatedTarget {
    ModelInstance target;
    TargetMutation kind;
    std::string description;
};

/// One random change to `tgt` that the specification forbids. The root's
/// flags are never flipped: no root contract constrains them.
inline MutatedTarget mutate_target(const ModelInstance& tgt, Rng& rng) {
    using detail::uniform;
    auto m = tgt.unfrozen_copy();
    std::vector<std::pair<ObjectKey, std::string>> lists, pairs;
    std::vector<ObjectKey> flagged;
    for (auto k : m.keys()) {
        const auto& n = m.object(k);
        for (const auto& [rel, l] : n.refs) {
            if (!l.empty()) lists.emplace_back(k, rel);
            if (l.size() >= 2) pairs.emplace_back(k, rel);
        }
        if (k != m.root_key() && !n.flags.empty()) flagged.push_back(k);
    }
    std::vector<TargetMutation> kinds{TargetMutation::ChangeId};
    if (!lists.empty()) {
        kinds.push_back(TargetMutation::Unlink);
        kinds.push_back(TargetMutation::Extra);
    }
    if (!pairs.empty()) kinds.push_back(TargetMutation::Swap);
    if (!flagged.empty()) kinds.push_back(TargetMutation::FlipFlag);
    auto kind = kinds[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(kinds.size()) - 1))];
    auto pick = [&](const auto& v) { return v[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(v.size()) - 1))]; };
    auto fresh_id = [&](const std::string& cls) {
        Nat id = 1000;
        while (m.find({cls, id})) ++id;
        return id;
    };
    std::string what;
    switch (kind) {
        case TargetMutation::ChangeId: {
            auto keys = m.keys();
            auto k = pick(keys);
            what = "id of " + m.ref(k).to_string();
            m.set_id(k, fresh_id(m.object(k).class_name));
            what += " changed to " + std::to_string(m.object(k).id);
            break;
        }
        case TargetMutation::Unlink: {
            auto [k, rel] = pick(lists);
            const auto& l = m.object(k).refs.at(rel);
            auto i = static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(l.size()) - 1));
            what = m.ref(l[i]).to_string() + " unlinked from " + m.ref(k).to_string() + "." + rel;
            m.remove_ref(k, rel, i);
            break;
        }
        case TargetMutation::Swap: {
            auto [k, rel] = pick(pairs);
            auto l = m.object(k).refs.at(rel);
            std::vector<std::pair<std::size_t, std::size_t>> same;
            for (std::size_t i = 0; i < l.size(); ++i)
                for (std::size_t j = i + 1; j < l.size(); ++j)
                    if (m.object(l[i]).class_name == m.object(l[j]).class_name) same.emplace_back(i, j);
            if (same.empty()) {
                what = "id of " + m.ref(l[0]).to_string();
                m.set_id(l[0], fresh_id(m.object(l[0]).class_name));
                kind = TargetMutation::ChangeId;
                break;
            }
            auto [i, j] = pick(same);
            what = "swapped " + m.ref(l[i]).to_string() + " and " + m.ref(l[j]).to_string() + " in " +
                   m.ref(k).to_string() + "." + rel;
            std::swap(l[i], l[j]);
            m.set_refs(k, rel, l);
            break;
        }
        case TargetMutation::Extra: {
            auto [k, rel] = pick(lists);
            const auto& l = m.object(k).refs.at(rel);
            const auto& cls = m.object(l.front()).class_name;
            auto extra = m.build_object(cls, fresh_id(cls));
            m.append_ref(k, rel, extra);
            what = "extra " + m.ref(extra).to_string() + " appended to " + m.ref(k).to_string() + "." + rel;
            break;
        }
        case TargetMutation::FlipFlag: {
            auto k = pick(flagged);
            const auto& flags = m.object(k).flags;
            std::vector<std::string> names;
            for (const auto& [f, _] : flags) names.push_back(f);
            auto f = pick(names);
            m.set_flag(k, f, !flags.at(f));
            what = "flag " + f + " of " + m.ref(k).to_string() + " flipped";
            break;
        }
    }
    m.freeze();
    return {std::move(m), kind, what};
}

/// Random well-typed expression; `tgt` may be null (no tgt attributes).
inline Expr random_expr(Rng& rng, ValueType type, int depth, const ClassSchema* src, const ClassSchema* tgt) {
    using detail::uniform;
    auto side_attr = [&](ValueType t) -> std::optional<Expr> {
        std::vector<Expr> options;
        for (auto [side, cls] : {std::pair{Side::Src, src}, std::pair{Side::Tgt, tgt}}) {
            if (!cls) continue;
            if (t == ValueType::Nat)
                options.push_back(Expr::attr(side, kBaseAttribute));
            else
                for (const auto& f : cls->flags) options.push_back(Expr::attr(side, f));
        }
        if (options.empty()) return std::nullopt;
        return options[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(options.size()) - 1))];
    };
    if (type == ValueType::Nat) {
        if (depth <= 0 || uniform(rng, 0, 2) == 0) {
            if (auto a = side_attr(ValueType::Nat); a && uniform(rng, 0, 1)) return *a;
            return Expr::nat(static_cast<Nat>(uniform(rng, 0, 20)));
        }
        return Expr::succ(random_expr(rng, ValueType::Nat, depth - 1, src, tgt));
    }
    if (depth <= 0) {
        if (auto a = side_attr(ValueType::Bool); a && uniform(rng, 0, 1)) return *a;
        return Expr::boolean(uniform(rng, 0, 1) == 1);
    }
    switch (uniform(rng, 0, 6)) {
        case 0: return Expr::negate(random_expr(rng, ValueType::Bool, depth - 1, src, tgt));
        case 1:
            return Expr::conj(random_expr(rng, ValueType::Bool, depth - 1, src, tgt),
                              random_expr(rng, ValueType::Bool, depth - 1, src, tgt));
        case 2:
            return Expr::disj(random_expr(rng, ValueType::Bool, depth - 1, src, tgt),
                              random_expr(rng, ValueType::Bool, depth - 1, src, tgt));
        case 3:
            return Expr::implies(random_expr(rng, ValueType::Bool, depth - 1, src, tgt),
                                 random_expr(rng, ValueType::Bool, depth - 1, src, tgt));
        case 4:
            return Expr::eq(random_expr(rng, ValueType::Nat, depth - 1, src, tgt),
                            random_expr(rng, ValueType::Nat, depth - 1, src, tgt));
        case 5:
            return Expr::eq(random_expr(rng, ValueType::Bool, depth - 1, src, tgt),
                            random_expr(rng, ValueType::Bool, depth - 1, src, tgt));
        default: return random_expr(rng, ValueType::Bool, 0, src, tgt);
    }
}

/// Random document: a scenario's metamodels and source instance plus its
/// transformation with randomized contracts, flag assignments and emits.
inline Document document(Rng& rng, const Options& opt = {}) {
    using detail::uniform;
    auto sc = scenario(rng, opt);
    const auto& S = *sc.ot.src_mm;
    const auto& T = *sc.ot.tgt_mm;
    auto ot = sc.ot;
    for (const auto& r : ladder_rungs(sc.ot)) {
        Rung x = r;
        const auto* s = &S.get_class(r.src_class);
        const auto* t = &T.get_class(r.tgt_class);
        x.pre = random_expr(rng, ValueType::Bool, uniform(rng, 0, 3), s, nullptr);
        x.post = random_expr(rng, ValueType::Bool, uniform(rng, 0, 3), s, t);
        x.map.assignments[0].value = random_expr(rng, ValueType::Nat, uniform(rng, 0, 2), s, nullptr);
        if (uniform(rng, 0, 1)) x.map.assignments.push_back({"mark", random_expr(rng, ValueType::Bool, 2, s, nullptr)});
        for (const auto& rel : t->relationships) {
            if (rel.multiplicity != Multiplicity::Many || uniform(rng, 0, 3) != 0) continue;
            MapExpr e{rel.target_class, {{kBaseAttribute, Expr::nat(static_cast<Nat>(uniform(rng, 0, 9)))}}, {}};
            x.map.emits.push_back({rel.name, uniform(rng, 0, 1) ? Placement::First : Placement::Last, e});
        }
        ot = substitute_rung(ot, r.name, x);
    }
    Document doc;
    doc.metamodels = {sc.ot.src_mm, sc.ot.tgt_mm};
    doc.instances.push_back(std::move(sc.src));
    doc.transformations.push_back(std::move(ot));
    return doc;
}

}  // namespace laddertx::gen

#endif
