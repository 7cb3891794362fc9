#ifndef LADDERTX_REPORT_HPP
#define LADDERTX_REPORT_HPP

#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "laddertx/certificate.hpp"
#include "laddertx/engine.hpp"
#include "laddertx/ladder.hpp"

namespace laddertx {

/// Human and machine readable outcome of one transform/verify run.
struct Report {
    std::string command;
    std::string transformation;
    std::string source;
    std::string target;
    bool holds = false;
    std::vector<Failure> failures;
    /// Source classes no rung transforms; their objects are never looked at.
    std::vector<std::string> unmapped;
    std::size_t rungs = 0;
    std::size_t witnesses = 0;
    std::size_t vacuous = 0;
    std::size_t holes = 0;
    std::size_t coms = 0;
    std::vector<std::string> notes;
};

inline Report make_report(std::string command, const OrderedTransformation& ot, const ModelInstance& src,
                          const ModelInstance& tgt, const Verdict& v) {
    Report r;
    r.command = std::move(command);
    r.transformation = ot.name;
    r.source = src.name();
    r.target = tgt.name();
    r.holds = v.holds;
    r.failures = v.failures;
    r.unmapped = unmapped_source_classes(ot);
    r.rungs = ladder_rungs(ot).size();
    r.witnesses = v.trace.count(CertKind::ExistsWitness);
    r.vacuous = v.trace.count(CertKind::Vacuous);
    r.holes = v.trace.count(CertKind::HoleLeaf);
    r.coms = v.trace.count(CertKind::ComLeaf);
    return r;
}

/// LADDERTX_COLOR=1 turns on ANSI colors; anything else leaves them off.
inline bool color_enabled() {
    const char* v = std::getenv("LADDERTX_COLOR");
    return v && std::string(v) == "1";
}

inline std::string render_text(const Report& r, bool color = false) {
    auto paint = [&](const std::string& s, const char* code) {
        return color ? std::string("\033[") + code + "m" + s + "\033[0m" : s;
    };
    std::ostringstream out;
    out << r.command << " " << r.transformation << ": " << r.source << " -> " << r.target << "\n";
    out << "verdict: " << (r.holds ? paint("HOLDS", "32") : paint("FAILS", "31")) << "\n";
    if (!r.failures.empty()) {
        out << "failures (" << r.failures.size() << "):\n";
        for (const auto& f : r.failures) out << "  " << f.to_string() << "\n";
    }
    out << "coverage:\n"
        << "  rungs: " << r.rungs << "\n"
        << "  witnesses: " << r.witnesses << ", vacuous: " << r.vacuous << ", holes: " << r.holes
        << ", com squares: " << r.coms << "\n"
        << "  unmapped source classes: ";
    if (r.unmapped.empty()) out << "none";
    for (std::size_t i = 0; i < r.unmapped.size(); ++i) out << (i ? ", " : "") << r.unmapped[i];
    out << "\n";
    for (const auto& n : r.notes) out << "note: " << n << "\n";
    return out.str();
}

inline nlohmann::ordered_json report_json(const Report& r) {
    nlohmann::ordered_json j;
    j["command"] = r.command;
    j["transformation"] = r.transformation;
    j["source"] = r.source;
    j["target"] = r.target;
    j["holds"] = r.holds;
    auto fs = nlohmann::ordered_json::array();
    for (const auto& f : r.failures) {
        nlohmann::ordered_json e;
        e["conjunct"] = to_string(f.conjunct);
        e["rung"] = f.rung;
        e["src"] = f.src ? nlohmann::ordered_json(f.src->to_string()) : nlohmann::ordered_json(nullptr);
        e["tgt"] = f.tgt ? nlohmann::ordered_json(f.tgt->to_string()) : nlohmann::ordered_json(nullptr);
        e["message"] = f.message;
        fs.push_back(std::move(e));
    }
    j["failures"] = std::move(fs);
    j["coverage"] = {{"rungs", r.rungs},         {"witnesses", r.witnesses}, {"vacuous", r.vacuous},
                     {"holes", r.holes},         {"com_squares", r.coms},    {"unmapped_source_classes", r.unmapped}};
    j["notes"] = r.notes;
    return j;
}

inline std::string render_json(const Report& r) { return report_json(r).dump(2) + "\n"; }

}  // namespace laddertx

#endif
