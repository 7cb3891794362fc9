#ifndef LADDERTX_TESTS_SUPPORT_HPP
#define LADDERTX_TESTS_SUPPORT_HPP

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "laddertx/dsl.hpp"

namespace support {

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::string data_path(const std::string& name) { return std::string(LADDERTX_DATA_DIR) + "/" + name; }

/// Parses the named files from data/ as one document; throws on diagnostics.
inline laddertx::Document load(const std::vector<std::string>& names) {
    std::vector<laddertx::SourceFile> files;
    for (const auto& n : names) files.push_back({n, slurp(data_path(n))});
    auto r = laddertx::parse_files(files);
    if (!r.ok()) throw laddertx::ParseError(r.diagnostics);
    return std::move(r.document);
}

struct Tampered {
    std::string text;
    std::string pointer;
};

/// Changes one scalar field of a serialized certificate. Refs keep their
/// Class#id shape so the result has a fair chance of deserializing.
inline Tampered tamper(const std::string& text, std::mt19937_64& rng) {
    using ojson = nlohmann::ordered_json;
    auto doc = ojson::parse(text);
    std::vector<ojson::json_pointer> leaves;
    auto flat = doc.flatten();
    for (auto it = flat.begin(); it != flat.end(); ++it) leaves.emplace_back(it.key());
    auto ptr = leaves[std::uniform_int_distribution<std::size_t>(0, leaves.size() - 1)(rng)];
    auto& v = doc[ptr];
    if (v.is_boolean()) {
        v = !v.get<bool>();
    } else if (v.is_number_unsigned()) {
        v = v.get<std::uint64_t>() + 1 + rng() % 3;
    } else if (v.is_number()) {
        v = v.get<std::int64_t>() + 1;
    } else if (v.is_null()) {
        v = "Column#" + std::to_string(1 + rng() % 9);
    } else if (v.is_string()) {
        auto s = v.get<std::string>();
        auto hash = s.find('#');
        if (hash != std::string::npos && rng() % 2)
            v = s.substr(0, hash + 1) + std::to_string(std::stoull("0" + s.substr(hash + 1)) + 1);
        else if (!s.empty() && rng() % 2)
            v = s.substr(0, s.size() - 1);
        else
            v = s + "x";
    } else if (v.is_array() || v.is_object()) {
        v = nullptr;
    }
    return {doc.dump(2) + "\n", ptr.to_string()};
}

}  // namespace support

#endif
