#ifndef LADDERTX_INSTANCE_HPP
#define LADDERTX_INSTANCE_HPP

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "laddertx/error.hpp"
#include "laddertx/metamodel.hpp"

namespace laddertx {

using Nat = std::uint64_t;

/// Synthetic identity of an object inside one ModelInstance. Distinct from the
/// numeric `id` attribute, which is only unique per class.
struct ObjectKey {
    std::uint32_t value = 0;

    auto operator<=>(const ObjectKey&) const = default;
};

/// Instance-independent name of an object: `Class#id`.
struct ObjectRef {
    std::string class_name;
    Nat id = 0;

    std::string to_string() const { return class_name + "#" + std::to_string(id); }

    static std::optional<ObjectRef> parse(const std::string& text) {
        auto hash = text.find('#');
        if (hash == std::string::npos || hash == 0 || hash + 1 >= text.size()) return std::nullopt;
        ObjectRef ref{text.substr(0, hash), 0};
        for (std::size_t i = hash + 1; i < text.size(); ++i) {
            if (text[i] < '0' || text[i] > '9') return std::nullopt;
            ref.id = ref.id * 10 + static_cast<Nat>(text[i] - '0');
        }
        return ref;
    }

    auto operator<=>(const ObjectRef&) const = default;
};

/// A relationship path, e.g. {"classes"} or {"groups", "members"}. Navigating
/// a path flattens the intermediate lists in order.
using Navigation = std::vector<std::string>;

inline std::string to_string(const Navigation& nav) {
    std::string out;
    for (std::size_t i = 0; i < nav.size(); ++i) out += (i ? "." : "") + nav[i];
    return out;
}

struct ObjectNode {
    std::string class_name;
    Nat id = 0;
    std::map<std::string, bool> flags;
    /// ONE relationships hold zero or one key, MANY relationships an ordered list.
    std::map<std::string, std::vector<ObjectKey>> refs;
};

/// Attribute values of one object without its references; used to compare
/// objects across instances.
struct ObjectValue {
    std::string class_name;
    Nat id = 0;
    std::map<std::string, bool> flags;

    std::string to_string() const {
        std::string out = class_name + "#" + std::to_string(id);
        if (!flags.empty()) {
            out += "{";
            bool first = true;
            for (const auto& [k, v] : flags) {
                out += (first ? "" : ",") + k + "=" + (v ? "true" : "false");
                first = false;
            }
            out += "}";
        }
        return out;
    }

    bool operator==(const ObjectValue&) const = default;
};

class ModelInstance {
public:
    ModelInstance() = default;
    explicit ModelInstance(std::shared_ptr<const Metamodel> mm, std::string name = {})
        : mm_(std::move(mm)), name_(std::move(name)) {
        if (!mm_) throw ModelError("instance requires a metamodel");
    }

    const Metamodel& metamodel() const { return *mm_; }
    const std::shared_ptr<const Metamodel>& metamodel_ptr() const { return mm_; }
    const std::string& name() const { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }

    std::size_t size() const { return nodes_.size(); }
    bool contains(ObjectKey key) const { return key.value < nodes_.size(); }

    /// Stores a new object. Flags not mentioned default to false, relationships
    /// not mentioned start empty. Every referenced key must already exist.
    ObjectKey build_object(const std::string& cls, Nat id,
                           const std::map<std::string, bool>& flags = {},
                           const std::map<std::string, std::vector<ObjectKey>>& refs = {}) {
        require_mutable();
        const auto* schema = mm_->find_class(cls);
        if (!schema) throw ModelError("unknown class '" + cls + "'");
        if (by_ref_.count({cls, id}))
            throw ModelError("duplicate object " + ObjectRef{cls, id}.to_string());

        ObjectNode node{cls, id, {}, {}};
        for (const auto& f : schema->flags) node.flags[f] = false;
        for (const auto& [f, v] : flags) {
            if (!schema->has_flag(f)) throw ModelError("class '" + cls + "' has no flag '" + f + "'");
            node.flags[f] = v;
        }
        for (const auto& r : schema->relationships) node.refs[r.name] = {};

        ObjectKey key{static_cast<std::uint32_t>(nodes_.size())};
        for (const auto& [rel, targets] : refs) check_refs(*schema, rel, targets, key);
        for (const auto& [rel, targets] : refs) node.refs[rel] = targets;

        nodes_.push_back(std::move(node));
        by_ref_[{cls, id}] = key;
        if (!root_ && cls == mm_->root_class) root_ = key;
        return key;
    }

    /// Replaces the whole list held under `rel`.
    void set_refs(ObjectKey parent, const std::string& rel, const std::vector<ObjectKey>& targets) {
        require_mutable();
        auto& node = at(parent);
        check_refs(mm_->get_class(node.class_name), rel, targets, parent);
        node.refs[rel] = targets;
    }

    void append_ref(ObjectKey parent, const std::string& rel, ObjectKey child) {
        require_mutable();
        auto& node = at(parent);
        auto next = node.refs[rel];
        next.push_back(child);
        check_refs(mm_->get_class(node.class_name), rel, next, parent);
        node.refs[rel] = std::move(next);
    }

    void remove_ref(ObjectKey parent, const std::string& rel, std::size_t index) {
        require_mutable();
        auto& list = at(parent).refs.at(rel);
        if (index >= list.size()) throw ModelError("reference index out of range");
        list.erase(list.begin() + static_cast<std::ptrdiff_t>(index));
    }

    void set_id(ObjectKey key, Nat id) {
        require_mutable();
        auto& node = at(key);
        if (node.id == id) return;
        if (by_ref_.count({node.class_name, id}))
            throw ModelError("duplicate object " + ObjectRef{node.class_name, id}.to_string());
        by_ref_.erase({node.class_name, node.id});
        node.id = id;
        by_ref_[{node.class_name, id}] = key;
    }

    void set_flag(ObjectKey key, const std::string& flag, bool value) {
        require_mutable();
        auto& node = at(key);
        if (!node.flags.count(flag)) throw ModelError("class '" + node.class_name + "' has no flag '" + flag + "'");
        node.flags[flag] = value;
    }

    void set_root(ObjectKey key) {
        require_mutable();
        if (at(key).class_name != mm_->root_class)
            throw ModelError("root object must be of class '" + mm_->root_class + "'");
        root_ = key;
    }

    std::optional<ObjectKey> root() const { return root_; }

    ObjectKey root_key() const {
        if (!root_) throw ModelError("instance '" + name_ + "' has no root object");
        return *root_;
    }

    const ObjectNode& object(ObjectKey key) const {
        if (!contains(key)) throw ModelError("dangling object key " + std::to_string(key.value));
        return nodes_[key.value];
    }

    ObjectRef ref(ObjectKey key) const {
        const auto& n = object(key);
        return {n.class_name, n.id};
    }

    ObjectValue value(ObjectKey key) const {
        const auto& n = object(key);
        return {n.class_name, n.id, n.flags};
    }

    std::optional<ObjectKey> find(const ObjectRef& r) const {
        auto it = by_ref_.find({r.class_name, r.id});
        if (it == by_ref_.end()) return std::nullopt;
        return it->second;
    }

    /// The keys stored under `rel`, in stored order.
    const std::vector<ObjectKey>& navigate(ObjectKey from, const std::string& rel) const {
        const auto& node = object(from);
        auto it = node.refs.find(rel);
        if (it == node.refs.end())
            throw ModelError("class '" + node.class_name + "' has no relationship '" + rel + "'");
        return it->second;
    }

    std::vector<ObjectKey> navigate_path(ObjectKey from, const Navigation& path) const {
        std::vector<ObjectKey> frontier{from};
        for (const auto& rel : path) {
            std::vector<ObjectKey> next;
            for (auto k : frontier) {
                const auto& step = navigate(k, rel);
                next.insert(next.end(), step.begin(), step.end());
            }
            frontier = std::move(next);
        }
        return frontier;
    }

    /// Objects of `cls` in ascending id order.
    std::vector<ObjectKey> objects_of(const std::string& cls) const {
        if (!mm_->find_class(cls)) throw ModelError("unknown class '" + cls + "'");
        std::vector<ObjectKey> out;
        for (auto it = by_ref_.lower_bound({cls, 0}); it != by_ref_.end() && it->first.first == cls; ++it)
            out.push_back(it->second);
        return out;
    }

    std::vector<ObjectKey> keys() const {
        std::vector<ObjectKey> out;
        out.reserve(nodes_.size());
        for (std::uint32_t i = 0; i < nodes_.size(); ++i) out.push_back({i});
        return out;
    }

    /// All keys ordered by (class, id); the canonical serialization order.
    std::vector<ObjectKey> canonical_keys() const {
        std::vector<ObjectKey> out;
        out.reserve(by_ref_.size());
        for (const auto& [_, key] : by_ref_) out.push_back(key);
        return out;
    }

    ValidationReport validate() const {
        ValidationReport report;
        if (!root_) {
            report.add(name_, "no object of root class '" + mm_->root_class + "'");
            return report;
        }
        for (auto key : keys()) {
            const auto& n = nodes_[key.value];
            const auto& schema = mm_->get_class(n.class_name);
            for (const auto& [rel, targets] : n.refs) {
                const auto* decl = schema.find_relationship(rel);
                std::string subject = ref(key).to_string() + "." + rel;
                if (!decl) {
                    report.add(subject, "undeclared relationship");
                    continue;
                }
                if (decl->multiplicity == Multiplicity::One && targets.size() > 1)
                    report.add(subject, "ONE relationship holds more than one object");
                for (auto t : targets) {
                    if (!contains(t))
                        report.add(subject, "dangling reference");
                    else if (nodes_[t.value].class_name != decl->target_class)
                        report.add(subject, "reference to " + ref(t).to_string() + " is not of class '" +
                                                decl->target_class + "'");
                }
            }
        }
        if (!report.ok()) return report;

        enum class Mark { White, Grey, Black };
        std::vector<Mark> mark(nodes_.size(), Mark::White);
        bool cyclic = false;
        auto visit = [&](auto&& self, ObjectKey k) -> void {
            mark[k.value] = Mark::Grey;
            for (const auto& [_, targets] : nodes_[k.value].refs)
                for (auto t : targets) {
                    if (mark[t.value] == Mark::Grey) {
                        if (!cyclic) report.add(ref(t).to_string(), "containment cycle");
                        cyclic = true;
                    } else if (mark[t.value] == Mark::White) {
                        self(self, t);
                    }
                }
            mark[k.value] = Mark::Black;
        };
        visit(visit, *root_);
        for (auto key : canonical_keys())
            if (mark[key.value] == Mark::White) {
                report.warnings.push_back("object " + ref(key).to_string() + " is unreachable from the root");
                visit(visit, key);
            }
        return report;
    }

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    /// A mutable copy with identical keys, for editing a frozen instance.
    ModelInstance unfrozen_copy() const {
        ModelInstance copy = *this;
        copy.frozen_ = false;
        return copy;
    }

    /// Content equality: same metamodel, name and root, and equal objects when
    /// listed by (class, id). Keys are not compared.
    bool operator==(const ModelInstance& other) const {
        if (!mm_ || !other.mm_) return mm_ == other.mm_;
        if (*mm_ != *other.mm_ || name_ != other.name_ || nodes_.size() != other.nodes_.size()) return false;
        if (root_.has_value() != other.root_.has_value()) return false;
        if (root_ && ref(*root_) != other.ref(*other.root_)) return false;
        auto mine = canonical_keys();
        auto theirs = other.canonical_keys();
        for (std::size_t i = 0; i < mine.size(); ++i) {
            const auto& a = nodes_[mine[i].value];
            const auto& b = other.nodes_[theirs[i].value];
            if (a.class_name != b.class_name || a.id != b.id || a.flags != b.flags) return false;
            if (a.refs.size() != b.refs.size()) return false;
            for (const auto& [rel, targets] : a.refs) {
                auto it = b.refs.find(rel);
                if (it == b.refs.end() || it->second.size() != targets.size()) return false;
                for (std::size_t j = 0; j < targets.size(); ++j)
                    if (ref(targets[j]) != other.ref(it->second[j])) return false;
            }
        }
        return true;
    }

private:
    void require_mutable() const {
        if (frozen_) throw ModelError("instance '" + name_ + "' is frozen");
        if (!mm_) throw ModelError("instance has no metamodel");
    }

    ObjectNode& at(ObjectKey key) {
        if (!contains(key)) throw ModelError("dangling object key " + std::to_string(key.value));
        return nodes_[key.value];
    }

    void check_refs(const ClassSchema& schema, const std::string& rel, const std::vector<ObjectKey>& targets,
                    ObjectKey self) const {
        const auto* decl = schema.find_relationship(rel);
        if (!decl) throw ModelError("class '" + schema.name + "' has no relationship '" + rel + "'");
        if (decl->multiplicity == Multiplicity::One && targets.size() > 1)
            throw ModelError("relationship '" + schema.name + "." + rel + "' is ONE but got " +
                             std::to_string(targets.size()) + " objects");
        for (auto t : targets) {
            if (t == self || !contains(t))
                throw ModelError("dangling reference in '" + schema.name + "." + rel + "'");
            if (nodes_[t.value].class_name != decl->target_class)
                throw ModelError("relationship '" + schema.name + "." + rel + "' expects '" + decl->target_class +
                                 "' but got " + ref(t).to_string());
        }
    }

    std::shared_ptr<const Metamodel> mm_;
    std::string name_;
    std::vector<ObjectNode> nodes_;
    std::map<std::pair<std::string, Nat>, ObjectKey> by_ref_;
    std::optional<ObjectKey> root_;
    bool frozen_ = false;
};

}  // namespace laddertx

#endif
