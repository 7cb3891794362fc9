#ifndef LADDERTX_CERTIFICATE_HPP
#define LADDERTX_CERTIFICATE_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "laddertx/contracts.hpp"
#include "laddertx/error.hpp"
#include "laddertx/instance.hpp"

namespace laddertx {

/*
 * A certificate is the assembled proof trace of one verification run.
 *
 * The skeleton (FORALL_SRC, IMPL_INTRO, EXISTS_WITNESS, AND, JOIN) is fixed by
 * the ladder shape and the source instance. The leaves carry the variable
 * evidence:
 *
 *   HOLE_LEAF  pre(x') -> post(x', y') for one rung application, or agreement
 *              of an emitted object with its emit clause
 *   COM_LEAF   the rung's square commutes at a parent object x:
 *              f'(R x) equals the S-segment of the parent target
 *   LINK_LEAF  the witness y' sits at its expected position in S(y)
 *   VACUOUS    pre(x') is false, so the implication holds trivially
 *
 * Layout of one BASE/STEP hop at (x, y):
 *
 *   AND{rung, x, y}
 *     COM_LEAF
 *     FORALL_SRC{x'_i}               for each x'_i in R(x)
 *       VACUOUS                      if pre(x'_i) is false, otherwise
 *       IMPL_INTRO
 *         EXISTS_WITNESS{y'}
 *           HOLE_LEAF, LINK_LEAF, emit HOLE_LEAFs, [nested ladder]
 */
enum class CertKind { ForallSrc, ImplIntro, ExistsWitness, And, HoleLeaf, ComLeaf, LinkLeaf, Vacuous, Join };

inline const char* to_string(CertKind k) {
    switch (k) {
        case CertKind::ForallSrc: return "FORALL_SRC";
        case CertKind::ImplIntro: return "IMPL_INTRO";
        case CertKind::ExistsWitness: return "EXISTS_WITNESS";
        case CertKind::And: return "AND";
        case CertKind::HoleLeaf: return "HOLE_LEAF";
        case CertKind::ComLeaf: return "COM_LEAF";
        case CertKind::LinkLeaf: return "LINK_LEAF";
        case CertKind::Vacuous: return "VACUOUS";
        case CertKind::Join: return "JOIN";
    }
    return "?";
}

inline std::optional<CertKind> cert_kind_from_string(const std::string& s) {
    for (auto k : {CertKind::ForallSrc, CertKind::ImplIntro, CertKind::ExistsWitness, CertKind::And, CertKind::HoleLeaf,
                   CertKind::ComLeaf, CertKind::LinkLeaf, CertKind::Vacuous, CertKind::Join})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

/// Evidence that f'(R x) and S(f x) agree; lists compare pointwise and by length.
struct ComEvidence {
    std::string rung;
    ObjectRef parent;
    std::vector<ObjectValue> left;
    std::vector<ObjectValue> right;
    bool equal = false;
    std::string diagnostic;

    bool operator==(const ComEvidence&) const = default;
};

struct LinkEvidence {
    std::string relationship;
    /// Index among the objects of the rung's target class in S(y), emitted
    /// objects excluded.
    std::size_t position = 0;
    std::optional<ObjectRef> found;
    bool holds = false;

    bool operator==(const LinkEvidence&) const = default;
};

struct ClassEvidence {
    std::string class_name;

    bool operator==(const ClassEvidence&) const = default;
};

struct PreEvidence {
    bool value = false;

    bool operator==(const PreEvidence&) const = default;
};

using Evidence = std::variant<std::monostate, ClassEvidence, PreEvidence, HoleEvidence, ComEvidence, LinkEvidence>;

struct CertNode {
    CertKind kind = CertKind::And;
    std::string rung;
    std::optional<ObjectRef> src_key;
    std::optional<ObjectRef> tgt_key;
    Evidence evidence;
    std::vector<CertNode> children;

    /// Conjunction of the leaf verdicts below this node.
    bool holds() const {
        switch (kind) {
            case CertKind::HoleLeaf: return std::get<HoleEvidence>(evidence).verdict != HoleVerdict::Failed;
            case CertKind::ComLeaf: return std::get<ComEvidence>(evidence).equal;
            case CertKind::LinkLeaf: return std::get<LinkEvidence>(evidence).holds;
            case CertKind::Vacuous: return true;
            case CertKind::ExistsWitness:
                if (!tgt_key) return false;
                break;
            default: break;
        }
        for (const auto& c : children)
            if (!c.holds()) return false;
        return true;
    }

    std::size_t count(CertKind k) const {
        std::size_t n = kind == k ? 1 : 0;
        for (const auto& c : children) n += c.count(k);
        return n;
    }

    bool operator==(const CertNode&) const = default;
};

struct Certificate {
    std::string transformation;
    bool holds = false;
    CertNode root;

    bool operator==(const Certificate&) const = default;
};

inline constexpr const char* kCertificateFormat = "laddertx-certificate";
inline constexpr int kCertificateVersion = 1;

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson ref_json(const std::optional<ObjectRef>& r) { return r ? ojson(r->to_string()) : ojson(nullptr); }

inline ojson value_json(const ObjectValue& v) {
    ojson flags = ojson::object();
    for (const auto& [k, b] : v.flags) flags[k] = b;
    return ojson{{"class", v.class_name}, {"id", v.id}, {"flags", flags}};
}

inline ojson node_json(const CertNode& n) {
    ojson ev = nullptr;
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ClassEvidence>) {
                ev = ojson{{"class", e.class_name}};
            } else if constexpr (std::is_same_v<T, PreEvidence>) {
                ev = ojson{{"pre", e.value}};
            } else if constexpr (std::is_same_v<T, HoleEvidence>) {
                ev = ojson{{"pre", e.pre_value},
                           {"post", e.post_value},
                           {"verdict", to_string(e.verdict)},
                           {"emit", e.emit ? ojson(*e.emit) : ojson(nullptr)},
                           {"diagnostic", e.diagnostic}};
            } else if constexpr (std::is_same_v<T, ComEvidence>) {
                ojson left = ojson::array(), right = ojson::array();
                for (const auto& v : e.left) left.push_back(value_json(v));
                for (const auto& v : e.right) right.push_back(value_json(v));
                ev = ojson{{"left", left}, {"right", right}, {"equal", e.equal}, {"diagnostic", e.diagnostic}};
            } else if constexpr (std::is_same_v<T, LinkEvidence>) {
                ev = ojson{{"relationship", e.relationship},
                           {"position", e.position},
                           {"found", ref_json(e.found)},
                           {"holds", e.holds}};
            }
        },
        n.evidence);
    ojson children = ojson::array();
    for (const auto& c : n.children) children.push_back(node_json(c));
    return ojson{{"kind", to_string(n.kind)},
                 {"rung", n.rung.empty() ? ojson(nullptr) : ojson(n.rung)},
                 {"src_key", ref_json(n.src_key)},
                 {"tgt_key", ref_json(n.tgt_key)},
                 {"evidence", ev},
                 {"children", children}};
}

[[noreturn]] inline void malformed(const std::string& path, const std::string& what) {
    throw CertificateFormatError("malformed certificate at " + path + ": " + what);
}

inline const ojson& field(const ojson& obj, const char* name, const std::string& path) {
    if (!obj.is_object()) malformed(path, "expected an object");
    auto it = obj.find(name);
    if (it == obj.end()) malformed(path, std::string("missing field '") + name + "'");
    return *it;
}

inline bool get_bool(const ojson& obj, const char* name, const std::string& path) {
    const auto& v = field(obj, name, path);
    if (!v.is_boolean()) malformed(path, std::string("'") + name + "' must be a boolean");
    return v.get<bool>();
}

inline std::string get_string(const ojson& obj, const char* name, const std::string& path) {
    const auto& v = field(obj, name, path);
    if (!v.is_string()) malformed(path, std::string("'") + name + "' must be a string");
    return v.get<std::string>();
}

inline std::uint64_t get_nat(const ojson& v, const std::string& path, const char* name) {
    if (!v.is_number_unsigned()) malformed(path, std::string("'") + name + "' must be a natural number");
    return v.get<std::uint64_t>();
}

inline std::optional<ObjectRef> get_ref(const ojson& obj, const char* name, const std::string& path) {
    const auto& v = field(obj, name, path);
    if (v.is_null()) return std::nullopt;
    if (!v.is_string()) malformed(path, std::string("'") + name + "' must be null or Class#id");
    auto r = ObjectRef::parse(v.get<std::string>());
    if (!r) malformed(path, std::string("'") + name + "' is not of the form Class#id");
    return r;
}

inline ObjectValue value_from(const ojson& v, const std::string& path) {
    ObjectValue out{get_string(v, "class", path), get_nat(field(v, "id", path), path, "id"), {}};
    const auto& flags = field(v, "flags", path);
    if (!flags.is_object()) malformed(path, "'flags' must be an object");
    for (auto it = flags.begin(); it != flags.end(); ++it) {
        if (!it.value().is_boolean()) malformed(path, "flag values must be booleans");
        out.flags[it.key()] = it.value().get<bool>();
    }
    return out;
}

inline CertNode node_from(const ojson& j, const std::string& path) {
    CertNode n;
    auto kind = cert_kind_from_string(get_string(j, "kind", path));
    if (!kind) malformed(path, "unknown node kind");
    n.kind = *kind;
    const auto& rung = field(j, "rung", path);
    if (rung.is_string())
        n.rung = rung.get<std::string>();
    else if (!rung.is_null())
        malformed(path, "'rung' must be null or a string");
    if (n.rung.empty() && rung.is_string()) malformed(path, "'rung' must not be empty");
    n.src_key = get_ref(j, "src_key", path);
    n.tgt_key = get_ref(j, "tgt_key", path);

    const auto& ev = field(j, "evidence", path);
    auto need_src = [&] {
        if (!n.src_key) malformed(path, "node requires a src_key");
    };
    switch (n.kind) {
        case CertKind::ForallSrc:
        case CertKind::ExistsWitness:
            n.evidence = ClassEvidence{get_string(ev, "class", path)};
            break;
        case CertKind::ImplIntro:
        case CertKind::Vacuous:
            n.evidence = PreEvidence{get_bool(ev, "pre", path)};
            break;
        case CertKind::HoleLeaf: {
            need_src();
            HoleEvidence h{n.rung, *n.src_key, n.tgt_key, get_bool(ev, "pre", path), get_bool(ev, "post", path),
                           HoleVerdict::Failed, std::nullopt, get_string(ev, "diagnostic", path)};
            auto verdict = get_string(ev, "verdict", path);
            if (verdict == "HOLDS")
                h.verdict = HoleVerdict::Holds;
            else if (verdict == "VACUOUS")
                h.verdict = HoleVerdict::Vacuous;
            else if (verdict != "FAILED")
                malformed(path, "unknown hole verdict");
            const auto& emit = field(ev, "emit", path);
            if (!emit.is_null()) h.emit = get_nat(emit, path, "emit");
            n.evidence = std::move(h);
            break;
        }
        case CertKind::ComLeaf: {
            need_src();
            ComEvidence c{n.rung, *n.src_key, {}, {}, get_bool(ev, "equal", path), get_string(ev, "diagnostic", path)};
            for (const char* side : {"left", "right"}) {
                const auto& arr = field(ev, side, path);
                if (!arr.is_array()) malformed(path, std::string("'") + side + "' must be an array");
                for (const auto& v : arr) (side[0] == 'l' ? c.left : c.right).push_back(value_from(v, path));
            }
            n.evidence = std::move(c);
            break;
        }
        case CertKind::LinkLeaf: {
            LinkEvidence l{get_string(ev, "relationship", path), 0, get_ref(ev, "found", path),
                           get_bool(ev, "holds", path)};
            l.position = get_nat(field(ev, "position", path), path, "position");
            n.evidence = std::move(l);
            break;
        }
        case CertKind::And:
        case CertKind::Join:
            if (!ev.is_null()) malformed(path, "node carries no evidence");
            break;
    }

    const auto& children = field(j, "children", path);
    if (!children.is_array()) malformed(path, "'children' must be an array");
    for (std::size_t i = 0; i < children.size(); ++i)
        n.children.push_back(node_from(children[i], path + "/" + std::to_string(i)));
    return n;
}

}  // namespace detail

/// Canonical JSON text: fixed key order, children in traversal order.
inline std::string serialize(const Certificate& cert) {
    detail::ojson doc{{"format", kCertificateFormat},
                      {"version", kCertificateVersion},
                      {"transformation", cert.transformation},
                      {"holds", cert.holds},
                      {"root", detail::node_json(cert.root)}};
    return doc.dump(2) + "\n";
}

inline Certificate deserialize(const std::string& text) {
    detail::ojson doc;
    try {
        doc = detail::ojson::parse(text);
    } catch (const nlohmann::json::exception& err) {
        throw CertificateFormatError(std::string("certificate is not valid JSON: ") + err.what());
    }
    if (detail::get_string(doc, "format", "/") != kCertificateFormat)
        detail::malformed("/", "not a laddertx certificate");
    const auto& version = detail::field(doc, "version", "/");
    if (!version.is_number_integer() || version.get<int>() != kCertificateVersion)
        detail::malformed("/", "unsupported certificate version");
    Certificate cert;
    cert.transformation = detail::get_string(doc, "transformation", "/");
    cert.holds = detail::get_bool(doc, "holds", "/");
    cert.root = detail::node_from(detail::field(doc, "root", "/"), "/root");
    return cert;
}

}  // namespace laddertx

#endif
