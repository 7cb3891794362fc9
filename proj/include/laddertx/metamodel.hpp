#ifndef LADDERTX_METAMODEL_HPP
#define LADDERTX_METAMODEL_HPP

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "laddertx/error.hpp"

namespace laddertx {

/// Name of the single natural-number base attribute every class carries.
inline constexpr const char* kBaseAttribute = "id";

enum class Multiplicity { One, Many };

inline const char* to_string(Multiplicity m) { return m == Multiplicity::One ? "one" : "many"; }

struct RelationshipDecl {
    std::string name;
    std::string target_class;
    Multiplicity multiplicity = Multiplicity::Many;

    bool operator==(const RelationshipDecl&) const = default;
};

/// A class of a metamodel. The base attribute `id` is implicit; `flags` are
/// extra boolean attributes and never take part in containment.
struct ClassSchema {
    std::string name;
    std::vector<std::string> flags;
    std::vector<RelationshipDecl> relationships;

    const RelationshipDecl* find_relationship(const std::string& rel) const {
        for (const auto& r : relationships)
            if (r.name == rel) return &r;
        return nullptr;
    }

    bool has_flag(const std::string& flag) const {
        return std::find(flags.begin(), flags.end(), flag) != flags.end();
    }

    bool operator==(const ClassSchema&) const = default;
};

struct Metamodel {
    std::string name;
    std::string root_class;
    std::vector<ClassSchema> classes;

    const ClassSchema* find_class(const std::string& cls) const {
        for (const auto& c : classes)
            if (c.name == cls) return &c;
        return nullptr;
    }

    const ClassSchema& get_class(const std::string& cls) const {
        if (const auto* c = find_class(cls)) return *c;
        throw ModelError("unknown class '" + cls + "' in metamodel '" + name + "'");
    }

    bool operator==(const Metamodel&) const = default;
};

namespace detail {

inline std::set<std::string> reachable_classes(const Metamodel& mm) {
    std::set<std::string> seen;
    std::vector<std::string> todo;
    if (mm.find_class(mm.root_class)) todo.push_back(mm.root_class);
    while (!todo.empty()) {
        auto cur = todo.back();
        todo.pop_back();
        if (!seen.insert(cur).second) continue;
        for (const auto& r : mm.get_class(cur).relationships)
            if (mm.find_class(r.target_class)) todo.push_back(r.target_class);
    }
    return seen;
}

}  // namespace detail

/// Checks the class-level and metamodel-level well-formedness rules.
/// Problems are returned as data; this never throws.
inline ValidationReport validate_metamodel(const Metamodel& mm) {
    ValidationReport report;
    std::set<std::string> names;
    for (const auto& c : mm.classes) {
        if (!names.insert(c.name).second) report.add(c.name, "duplicate class name");

        std::set<std::string> members;
        for (const auto& f : c.flags) {
            if (f == kBaseAttribute)
                report.add(c.name + "." + f, "flag may not shadow the base attribute 'id'");
            if (!members.insert(f).second) report.add(c.name + "." + f, "duplicate flag name");
        }
        std::set<std::string> rels;
        for (const auto& r : c.relationships) {
            if (r.name == kBaseAttribute)
                report.add(c.name + "." + r.name, "relationship may not shadow the base attribute 'id'");
            if (!rels.insert(r.name).second)
                report.add(c.name + "." + r.name, "duplicate relationship name");
            else if (members.count(r.name))
                report.add(c.name + "." + r.name, "relationship name clashes with a flag");
            if (!mm.find_class(r.target_class))
                report.add(c.name + "." + r.name, "target class '" + r.target_class + "' is not declared");
        }
    }

    if (!mm.find_class(mm.root_class)) {
        report.add(mm.root_class, "root class is not declared");
        return report;
    }
    for (const auto& c : mm.classes)
        for (const auto& r : c.relationships)
            if (r.target_class == mm.root_class)
                report.add(c.name + "." + r.name, "root class '" + mm.root_class + "' is the target of a relationship");

    // Depth-first search over the reachable part; a back edge closes a cycle.
    enum class Mark { White, Grey, Black };
    std::map<std::string, Mark> mark;
    std::set<std::string> reported;
    auto visit = [&](auto&& self, const std::string& cls) -> void {
        mark[cls] = Mark::Grey;
        for (const auto& r : mm.get_class(cls).relationships) {
            if (!mm.find_class(r.target_class)) continue;
            auto m = mark[r.target_class];
            if (m == Mark::Grey) {
                if (reported.insert(r.target_class).second)
                    report.add(r.target_class, "containment cycle at " + r.target_class);
            } else if (m == Mark::White) {
                self(self, r.target_class);
            }
        }
        mark[cls] = Mark::Black;
    };
    visit(visit, mm.root_class);

    auto reach = detail::reachable_classes(mm);
    for (const auto& c : mm.classes)
        if (!reach.count(c.name))
            report.warnings.push_back("class '" + c.name + "' is unreachable from root '" + mm.root_class + "'");
    return report;
}

/// Covering pairs (container, contained) of the containment order, in
/// declaration order and without duplicates.
inline std::vector<std::pair<std::string, std::string>> containment_order(const Metamodel& mm) {
    auto report = validate_metamodel(mm);
    if (!report.ok()) throw ModelError("invalid metamodel '" + mm.name + "':\n" + report.to_string());
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& c : mm.classes)
        for (const auto& r : c.relationships) {
            std::pair<std::string, std::string> edge{c.name, r.target_class};
            if (std::find(out.begin(), out.end(), edge) == out.end()) out.push_back(std::move(edge));
        }
    return out;
}

}  // namespace laddertx

#endif
