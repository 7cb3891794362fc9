#ifndef LADDERTX_REPLAY_HPP
#define LADDERTX_REPLAY_HPP

#include <string>

#include "laddertx/certificate.hpp"
#include "laddertx/engine.hpp"

namespace laddertx {

struct ReplayResult {
    bool ok = false;
    /// Path of the first node whose recorded content differs from the
    /// recomputation, e.g. `/root/0/0/0/1`.
    std::string path;
    std::string diagnostic;

    explicit operator bool() const { return ok; }
};

namespace detail {

inline std::string describe(const CertNode& n) {
    std::string out = to_string(n.kind);
    if (!n.rung.empty()) out += " " + n.rung;
    if (n.src_key) out += " src=" + n.src_key->to_string();
    if (n.tgt_key) out += " tgt=" + n.tgt_key->to_string();
    return out;
}

inline bool diff(const CertNode& want, const CertNode& got, const std::string& path, ReplayResult& out) {
    auto mismatch = [&](const std::string& what) {
        out.path = path;
        out.diagnostic = what + " differs: recomputed " + describe(want) + ", recorded " + describe(got);
        return false;
    };
    if (want.kind != got.kind) return mismatch("node kind");
    if (want.rung != got.rung) return mismatch("rung");
    if (want.src_key != got.src_key) return mismatch("source object");
    if (want.tgt_key != got.tgt_key) return mismatch("target object");
    if (!(want.evidence == got.evidence)) return mismatch("evidence");
    if (want.children.size() != got.children.size()) return mismatch("number of children");
    for (std::size_t i = 0; i < want.children.size(); ++i)
        if (!diff(want.children[i], got.children[i], path + "/" + std::to_string(i), out)) return false;
    return true;
}

inline bool dangling_witness(const CertNode& n, const ModelInstance& tgt, const std::string& path, ReplayResult& out) {
    if (n.kind == CertKind::ExistsWitness && n.tgt_key && !tgt.find(*n.tgt_key)) {
        out.path = path;
        out.diagnostic = "dangling witness " + n.tgt_key->to_string() + " does not exist in the target";
        return true;
    }
    for (std::size_t i = 0; i < n.children.size(); ++i)
        if (dangling_witness(n.children[i], tgt, path + "/" + std::to_string(i), out)) return true;
    return false;
}

}  // namespace detail

/// Re-derives every node of `cert` from the instances and compares it with
/// the recorded content. True iff nothing diverges and every leaf holds.
inline ReplayResult replay(const Certificate& cert, const OrderedTransformation& ot, const ModelInstance& src,
                           const ModelInstance& tgt) {
    ReplayResult out;
    if (cert.transformation != ot.name) {
        out.path = "/transformation";
        out.diagnostic = "certificate is for '" + cert.transformation + "', not '" + ot.name + "'";
        return out;
    }
    if (detail::dangling_witness(cert.root, tgt, "/root", out)) return out;

    Verdict fresh;
    try {
        fresh = verify(ot, src, tgt);
    } catch (const Error& err) {
        out.path = "/";
        out.diagnostic = err.what();
        return out;
    }
    if (!detail::diff(fresh.trace, cert.root, "/root", out)) return out;
    if (cert.holds != fresh.holds) {
        out.path = "/holds";
        out.diagnostic = "recorded verdict disagrees with the conjunction of its leaves";
        return out;
    }
    if (!cert.root.holds() || !fresh.holds) {
        out.path = "/root";
        out.diagnostic = "leaves replay faithfully but do not conjoin to true";
        if (!fresh.failures.empty()) out.diagnostic += ": " + fresh.failures.front().to_string();
        return out;
    }
    out.ok = true;
    return out;
}

}  // namespace laddertx

#endif
