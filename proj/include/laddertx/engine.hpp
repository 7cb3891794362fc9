#ifndef LADDERTX_ENGINE_HPP
#define LADDERTX_ENGINE_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "laddertx/certificate.hpp"
#include "laddertx/contracts.hpp"
#include "laddertx/error.hpp"
#include "laddertx/instance.hpp"
#include "laddertx/ladder.hpp"

namespace laddertx {

/// Which conjunct of the assembled specification a failure belongs to.
enum class Conjunct { Pre, PostData, Link, Com };

inline const char* to_string(Conjunct c) {
    switch (c) {
        case Conjunct::Pre: return "PRE";
        case Conjunct::PostData: return "POST_DATA";
        case Conjunct::Link: return "LINK";
        case Conjunct::Com: return "COM";
    }
    return "?";
}

struct Failure {
    std::string rung;
    std::optional<ObjectRef> src;
    std::optional<ObjectRef> tgt;
    Conjunct conjunct = Conjunct::PostData;
    std::string message;

    std::string to_string() const {
        std::string out = std::string(laddertx::to_string(conjunct)) + " at rung " + rung;
        if (src) out += ", source " + src->to_string();
        if (tgt) out += ", target " + tgt->to_string();
        return out + ": " + message;
    }

    bool operator==(const Failure&) const = default;
};

struct Verdict {
    bool holds = false;
    CertNode trace;
    std::vector<Failure> failures;
};

/// Target objects produced by execute, keyed by (branch ordinal at the
/// index, parent target, position of the source child in R(x)).
struct ExecutionRecord {
    std::map<std::tuple<std::size_t, ObjectKey, std::size_t>, ObjectKey> produced;
};

/// How existentials are discharged: by scanning the target instance
/// (witness search) or by reading the execution record (constructive).
struct SpecMode {
    const ExecutionRecord* record = nullptr;

    static SpecMode witness_search() { return {}; }
    static SpecMode constructive(const ExecutionRecord& r) { return {&r}; }
};

namespace detail {

inline std::size_t count_emits(const MapExpr& m, const std::string& rel, Placement p) {
    std::size_t n = 0;
    for (const auto& e : m.emits)
        if (e.relationship == rel && e.placement == p) ++n;
    return n;
}

inline std::optional<bool> try_pre(const Rung& r, const ObjectNode& x) {
    try {
        return eval_pred(r.pre, &x, nullptr);
    } catch (const Error&) {
        return std::nullopt;
    }
}

/// Positions of S(y) a branch answers for: past the FIRST emits and before
/// the LAST emits of the index map, restricted to the branch's target class.
/// Each branch reads its own view, so sibling branches never shift each other.
inline std::vector<std::size_t> view(const Ladder& b, const MapExpr& idx_map, const ModelInstance& tgt, ObjectKey y) {
    std::vector<std::size_t> out;
    const auto& yn = tgt.object(y);
    auto it = yn.refs.find(b.tgt_rel());
    if (it == yn.refs.end()) return out;
    const auto& list = it->second;
    std::size_t lo = count_emits(idx_map, b.tgt_rel(), Placement::First);
    std::size_t tail = count_emits(idx_map, b.tgt_rel(), Placement::Last);
    std::size_t hi = list.size() >= tail ? list.size() - tail : 0;
    for (std::size_t p = lo; p < hi; ++p)
        if (tgt.object(list[p]).class_name == b.child().tgt_class) out.push_back(p);
    return out;
}

class SpecEvaluator {
public:
    SpecEvaluator(const ModelInstance& src, const ModelInstance& tgt, SpecMode mode)
        : src_(src), tgt_(tgt), mode_(mode) {}

    std::vector<Failure> failures;

    /// Proof node for Spec(t)(x, y).
    CertNode ladder(const Ladder& t, ObjectKey x, ObjectKey y) {
        const auto& xn = src_.object(x);
        const auto& yn = tgt_.object(y);
        if (xn.class_name != t.index().src_class || yn.class_name != t.index().tgt_class)
            throw ExecutionError("eval_spec: (" + src_.ref(x).to_string() + ", " + tgt_.ref(y).to_string() +
                                 ") is not typed by the ladder index '" + t.index().src_class + "' -> '" +
                                 t.index().tgt_class + "'");
        std::size_t ordinal = 0;
        return node(t, x, y, ordinal);
    }

    /// Emit checks for the object `y` built by `r.map` from `x`.
    void emits(const Rung& r, const MapExpr& m, ObjectKey x, ObjectKey y, std::size_t& counter,
               std::vector<CertNode>& out) {
        std::map<std::string, std::size_t> first_seen, last_seen;
        const auto& yn = tgt_.object(y);
        for (const auto& clause : m.emits) {
            std::size_t index = counter++;
            std::optional<ObjectKey> obj;
            auto it = yn.refs.find(clause.relationship);
            if (it != yn.refs.end()) {
                const auto& list = it->second;
                if (clause.placement == Placement::First) {
                    std::size_t pos = first_seen[clause.relationship]++;
                    if (pos < list.size()) obj = list[pos];
                } else {
                    std::size_t tail = count_emits(m, clause.relationship, Placement::Last);
                    std::size_t j = last_seen[clause.relationship]++;
                    if (list.size() >= tail) obj = list[list.size() - tail + j];
                }
            }
            auto ev = check_emit(r, index, clause.map, x, obj, src_, tgt_);
            if (ev.verdict == HoleVerdict::Failed)
                fail(r.name, x, obj, Conjunct::PostData,
                     "emitted object " + std::to_string(index) + " into '" + clause.relationship + "' " +
                         (obj ? tgt_.ref(*obj).to_string() + " disagrees with its emit clause" : "is missing") +
                         (ev.diagnostic.empty() ? "" : " (" + ev.diagnostic + ")"));
            out.push_back(hole_node(ev));
            if (obj && ev.verdict != HoleVerdict::Failed) emits(r, clause.map, x, *obj, counter, out);
        }
    }

    CertNode hole_node(const HoleEvidence& ev) {
        CertNode n{CertKind::HoleLeaf, ev.rung, ev.src, ev.tgt, ev, {}};
        return n;
    }

    void fail(const std::string& rung, ObjectKey x, std::optional<ObjectKey> y, Conjunct c, std::string message) {
        Failure f{rung, src_.ref(x), std::nullopt, c, std::move(message)};
        if (y) f.tgt = tgt_.ref(*y);
        failures.push_back(std::move(f));
    }

    const ModelInstance& src() const { return src_; }
    const ModelInstance& tgt() const { return tgt_; }

private:
    CertNode node(const Ladder& t, ObjectKey x, ObjectKey y, std::size_t& ordinal) {
        if (t.kind() == Ladder::Kind::Join) {
            CertNode j{CertKind::Join, {}, src_.ref(x), tgt_.ref(y), std::monostate{}, {}};
            j.children.push_back(node(t.left(), x, y, ordinal));
            j.children.push_back(node(t.right(), x, y, ordinal));
            return j;
        }
        std::size_t here = ordinal++;
        return hop(t, here, x, y, view(t, t.index().map, tgt_, y));
    }

    CertNode hop(const Ladder& b, std::size_t ordinal, ObjectKey x, ObjectKey y, const std::vector<std::size_t>& seg) {
        const Rung& r = b.child();
        CertNode conj{CertKind::And, r.name, src_.ref(x), tgt_.ref(y), std::monostate{}, {}};

        auto children = src_.navigate_path(x, b.src_nav());
        const std::vector<ObjectKey>* s_list = nullptr;
        {
            const auto& yn = tgt_.object(y);
            auto it = yn.refs.find(b.tgt_rel());
            if (it != yn.refs.end()) s_list = &it->second;
        }

        // Com: f'(R x) against the S-segment of y.
        ComEvidence com{r.name, src_.ref(x), {}, {}, false, {}};
        try {
            for (auto c : children) {
                const auto& cn = src_.object(c);
                if (eval_pred(r.pre, &cn, nullptr)) com.left.push_back(compute_map(r.map, cn, tgt_.metamodel()));
            }
        } catch (const Error& err) {
            com.diagnostic = err.what();
        }
        if (!s_list && com.diagnostic.empty())
            com.diagnostic = "target " + tgt_.ref(y).to_string() + " has no relationship '" + b.tgt_rel() + "'";
        if (s_list)
            for (auto p : seg) com.right.push_back(tgt_.value((*s_list)[p]));
        com.equal = com.diagnostic.empty() && com.left == com.right;
        if (!com.equal)
            fail(r.name, x, y, Conjunct::Com,
                 com.diagnostic.empty() ? "square does not commute: f'(R x) has " + std::to_string(com.left.size()) +
                                              " objects, S(f x) has " + std::to_string(com.right.size()) +
                                              (com.left.size() == com.right.size() ? " with differing values" : "")
                                        : com.diagnostic);
        conj.children.push_back({CertKind::ComLeaf, r.name, src_.ref(x), tgt_.ref(y), com, {}});

        std::size_t produced = 0;
        for (std::size_t i = 0; i < children.size(); ++i) {
            ObjectKey xc = children[i];
            CertNode all{CertKind::ForallSrc, r.name, src_.ref(xc), std::nullopt, ClassEvidence{r.src_class}, {}};
            auto pre = try_pre(r, src_.object(xc));
            if (!pre) {
                auto ev = check_hole(r, xc, std::nullopt, src_, tgt_);
                fail(r.name, xc, std::nullopt, Conjunct::Pre, "precondition cannot be evaluated: " + ev.diagnostic);
                all.children.push_back(hole_node(ev));
            } else if (!*pre) {
                all.children.push_back({CertKind::Vacuous, r.name, src_.ref(xc), std::nullopt, PreEvidence{false}, {}});
            } else {
                std::size_t pos = produced++;
                std::optional<ObjectKey> candidate;
                if (pos < seg.size()) candidate = (*s_list)[seg[pos]];
                CertNode impl{CertKind::ImplIntro, r.name, src_.ref(xc), std::nullopt, PreEvidence{true}, {}};
                impl.children.push_back(exists(b, ordinal, xc, y, i, pos, candidate));
                all.children.push_back(std::move(impl));
            }
            conj.children.push_back(std::move(all));
        }
        return conj;
    }

    CertNode exists(const Ladder& b, std::size_t ordinal, ObjectKey xc, ObjectKey y, std::size_t i, std::size_t pos,
                    std::optional<ObjectKey> candidate) {
        const Rung& r = b.child();
        CertNode ex{CertKind::ExistsWitness, r.name, src_.ref(xc), std::nullopt, ClassEvidence{r.tgt_class}, {}};
        LinkEvidence link{b.tgt_rel(), pos, std::nullopt, false};
        if (candidate) link.found = tgt_.ref(*candidate);

        std::optional<ObjectKey> witness;
        if (mode_.record) {
            auto it = mode_.record->produced.find({ordinal, y, i});
            if (it == mode_.record->produced.end() || !tgt_.contains(it->second)) {
                fail(r.name, xc, std::nullopt, Conjunct::Link, "no recorded target for this source object");
                ex.children.push_back({CertKind::LinkLeaf, r.name, src_.ref(xc), std::nullopt, link, {}});
                return ex;
            }
            ObjectKey w = it->second;
            ex.tgt_key = tgt_.ref(w);
            auto hole = check_hole(r, xc, w, src_, tgt_);
            link.holds = candidate == w;
            ex.children.push_back(hole_node(hole));
            ex.children.push_back({CertKind::LinkLeaf, r.name, src_.ref(xc), tgt_.ref(w), link, {}});
            bool ok = true;
            if (hole.verdict == HoleVerdict::Failed) {
                fail(r.name, xc, w, Conjunct::PostData, post_message(hole));
                ok = false;
            }
            if (!link.holds) {
                fail(r.name, xc, w, Conjunct::Link,
                     "recorded target is not at position " + std::to_string(pos) + " of '" + b.tgt_rel() + "'");
                ok = false;
            }
            if (ok) witness = w;
        } else {
            // Scan every target object of the rung's class in id order and take
            // the first satisfying Post'(x', y') and y' = S(y)[pos].
            for (auto c : tgt_.objects_of(r.tgt_class)) {
                if (c != candidate) continue;
                auto hole = check_hole(r, xc, c, src_, tgt_);
                if (hole.verdict == HoleVerdict::Holds) {
                    witness = c;
                    break;
                }
            }
            if (witness) {
                link.holds = true;
                ex.tgt_key = tgt_.ref(*witness);
                ex.children.push_back(hole_node(check_hole(r, xc, *witness, src_, tgt_)));
                ex.children.push_back({CertKind::LinkLeaf, r.name, src_.ref(xc), ex.tgt_key, link, {}});
            } else if (!candidate) {
                fail(r.name, xc, std::nullopt, Conjunct::Link,
                     "no existential witness: '" + b.tgt_rel() + "' of " + tgt_.ref(y).to_string() + " has no '" +
                         r.tgt_class + "' at position " + std::to_string(pos));
                ex.children.push_back({CertKind::LinkLeaf, r.name, src_.ref(xc), std::nullopt, link, {}});
            } else {
                link.holds = true;
                auto hole = check_hole(r, xc, *candidate, src_, tgt_);
                fail(r.name, xc, *candidate, Conjunct::PostData, post_message(hole));
                ex.children.push_back(hole_node(hole));
                ex.children.push_back({CertKind::LinkLeaf, r.name, src_.ref(xc), std::nullopt, link, {}});
            }
        }

        if (witness) {
            std::size_t counter = 0;
            emits(r, r.map, xc, *witness, counter, ex.children);
            if (b.kind() == Ladder::Kind::Step) ex.children.push_back(ladder(b.rest(), xc, *witness));
        }
        return ex;
    }

    static std::string post_message(const HoleEvidence& h) {
        return h.diagnostic.empty() ? "postcondition does not hold" : "postcondition failed: " + h.diagnostic;
    }

    const ModelInstance& src_;
    const ModelInstance& tgt_;
    SpecMode mode_;
};

}  // namespace detail

/// Evaluates Spec(t)(x, y) over finite instances.
inline Verdict eval_spec(const Ladder& t, ObjectKey x, ObjectKey y, const ModelInstance& src, const ModelInstance& tgt,
                         SpecMode mode = SpecMode::witness_search()) {
    detail::SpecEvaluator ev(src, tgt, mode);
    Verdict v;
    v.trace = ev.ladder(t, x, y);
    v.failures = std::move(ev.failures);
    v.holds = v.failures.empty();
    return v;
}

/// Com evidence for one branch `b` of the ladder `t` at parent pair (x, y).
inline ComEvidence check_com(const Ladder& t, const Ladder& b, ObjectKey x, ObjectKey y, const ModelInstance& src,
                             const ModelInstance& tgt) {
    if (b.kind() == Ladder::Kind::Join) throw LadderError("check_com expects a BASE or STEP node");
    auto v = eval_spec(t, x, y, src, tgt);
    // The COM leaf of a hop is the first child of its AND node.
    auto hops = [&](auto&& self, const CertNode& n) -> const ComEvidence* {
        if (n.kind == CertKind::And && n.rung == b.child().name && !n.children.empty())
            return &std::get<ComEvidence>(n.children.front().evidence);
        if (n.kind == CertKind::Join)
            for (const auto& c : n.children)
                if (auto* found = self(self, c)) return found;
        return nullptr;
    };
    if (auto* c = hops(hops, v.trace)) return *c;
    throw LadderError("rung '" + b.child().name + "' is not a branch of the ladder");
}

inline Verdict check_root(const OrderedTransformation& ot, const ModelInstance& src, const ModelInstance& tgt,
                          SpecMode mode) {
    detail::SpecEvaluator ev(src, tgt, mode);
    const Rung& root = ot.root_rung;
    ObjectKey x = src.root_key();
    ObjectKey y = tgt.root_key();
    Verdict v;
    v.trace = {CertKind::ForallSrc, root.name, src.ref(x), std::nullopt, ClassEvidence{root.src_class}, {}};
    auto pre = detail::try_pre(root, src.object(x));
    if (!pre) {
        auto hole = check_hole(root, x, y, src, tgt);
        ev.fail(root.name, x, std::nullopt, Conjunct::Pre, "root precondition cannot be evaluated: " + hole.diagnostic);
        v.trace.children.push_back(ev.hole_node(hole));
    } else if (!*pre) {
        v.trace.children.push_back({CertKind::Vacuous, root.name, src.ref(x), std::nullopt, PreEvidence{false}, {}});
    } else {
        CertNode impl{CertKind::ImplIntro, root.name, src.ref(x), std::nullopt, PreEvidence{true}, {}};
        CertNode ex{CertKind::ExistsWitness, root.name, src.ref(x), tgt.ref(y), ClassEvidence{root.tgt_class}, {}};
        CertNode conj{CertKind::And, root.name, src.ref(x), tgt.ref(y), std::monostate{}, {}};
        auto hole = check_hole(root, x, y, src, tgt);
        if (hole.verdict == HoleVerdict::Failed)
            ev.fail(root.name, x, y, Conjunct::PostData,
                    hole.diagnostic.empty() ? "root postcondition does not hold" : hole.diagnostic);
        conj.children.push_back(ev.hole_node(hole));
        if (hole.verdict != HoleVerdict::Failed) {
            std::size_t counter = 0;
            ev.emits(root, root.map, x, y, counter, conj.children);
        }
        conj.children.push_back(ev.ladder(ot.body, x, y));
        ex.children.push_back(std::move(conj));
        impl.children.push_back(std::move(ex));
        v.trace.children.push_back(std::move(impl));
    }
    v.failures = std::move(ev.failures);
    v.holds = v.failures.empty();
    return v;
}

/// Checks the root contract and Spec(body) on a given (source, target) pair,
/// resolving every existential by witness search.
inline Verdict verify(const OrderedTransformation& ot, const ModelInstance& src, const ModelInstance& tgt) {
    for (const auto* inst : {&src, &tgt}) {
        auto r = inst->validate();
        if (!r.ok()) throw ModelError("invalid instance '" + inst->name() + "':\n" + r.to_string());
    }
    if (src.metamodel() != *ot.src_mm || tgt.metamodel() != *ot.tgt_mm)
        throw ModelError("instances do not conform to the transformation's metamodels");
    return check_root(ot, src, tgt, SpecMode::witness_search());
}

inline Certificate make_certificate(const OrderedTransformation& ot, const Verdict& v) {
    return {ot.name, v.holds, v.trace};
}

struct ExecutionResult {
    ModelInstance target;
    ExecutionRecord record;
    Verdict verdict;
    Certificate certificate;
};

namespace detail {

inline void traverse(const Ladder& t, ObjectKey x, ObjectKey y, const ModelInstance& src, ModelInstance& tgt,
                     ExecutionRecord& record) {
    auto bs = branches(t);
    for (std::size_t ordinal = 0; ordinal < bs.size(); ++ordinal) {
        const auto& b = bs[ordinal];
        auto children = src.navigate_path(x, b.src_nav());
        for (std::size_t i = 0; i < children.size(); ++i) {
            const auto& node = src.object(children[i]);
            bool pre;
            try {
                pre = eval_pred(b.child().pre, &node, nullptr);
            } catch (const ContractError& err) {
                throw ExecutionError("rung '" + b.child().name + "' on " + src.ref(children[i]).to_string() + ": " +
                                     err.what());
            }
            if (!pre) continue;
            MapResult built;
            try {
                built = apply_map_deferred(b.child().map, node, tgt);
                tgt.append_ref(y, b.tgt_rel(), built.key);
            } catch (const Error& err) {
                throw ExecutionError("rung '" + b.child().name + "' on " + src.ref(children[i]).to_string() + ": " +
                                     err.what());
            }
            record.produced[{ordinal, y, i}] = built.key;
            if (b.kind() == Ladder::Kind::Step) traverse(b.rest(), children[i], built.key, src, tgt, record);
            finish_map(built, tgt);
        }
    }
}

}  // namespace detail

/// Builds the target by preorder traversal and certifies it. The returned
/// certificate comes from constructive evaluation against the execution record.
inline ExecutionResult execute(const OrderedTransformation& ot, const ModelInstance& src,
                               const std::string& target_name = {}) {
    auto wf = well_formed(ot);
    if (!wf.ok()) throw ExecutionError("transformation '" + ot.name + "' is not well formed:\n" + wf.to_string());
    auto sv = src.validate();
    if (!sv.ok()) throw ExecutionError("invalid source instance '" + src.name() + "':\n" + sv.to_string());
    if (src.metamodel() != *ot.src_mm)
        throw ExecutionError("source instance '" + src.name() + "' does not conform to '" + ot.src_mm->name + "'");

    ObjectKey x = src.root_key();
    const auto& root = src.object(x);
    bool pre;
    try {
        pre = eval_pred(ot.root_rung.pre, &root, nullptr);
    } catch (const ContractError& err) {
        throw ExecutionError(std::string("root precondition: ") + err.what());
    }
    if (!pre) throw RootPreconditionFalse("root precondition of '" + ot.root_rung.name + "' is false on " +
                                          src.ref(x).to_string() + "; the transformation has no obligation");

    ExecutionResult out{ModelInstance(ot.tgt_mm, target_name.empty() ? src.name() + "_" + ot.name : target_name), {},
                        {}, {}};
    try {
        auto built = apply_map_deferred(ot.root_rung.map, root, out.target);
        out.target.set_root(built.key);
        detail::traverse(ot.body, x, built.key, src, out.target, out.record);
        finish_map(built, out.target);
    } catch (const ExecutionError&) {
        throw;
    } catch (const Error& err) {
        throw ExecutionError(std::string("map application failed: ") + err.what());
    }
    out.target.freeze();
    out.verdict = check_root(ot, src, out.target, SpecMode::constructive(out.record));
    out.certificate = make_certificate(ot, out.verdict);
    return out;
}

}  // namespace laddertx

#endif
