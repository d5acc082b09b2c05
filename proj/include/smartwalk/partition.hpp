#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace smartwalk {

using ModuleId = std::uint32_t;

/// Node-to-module assignment with module ids dense from 0, numbered in
/// order of first appearance.
class Partition {
public:
    Partition() = default;

    explicit Partition(std::span<const ModuleId> raw) : assignment_(raw.size()) {
        std::unordered_map<ModuleId, ModuleId> dense;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            auto [it, inserted] = dense.try_emplace(raw[i], static_cast<ModuleId>(dense.size()));
            assignment_[i] = it->second;
        }
        modules_ = dense.size();
    }
    explicit Partition(const std::vector<ModuleId>& raw) : Partition(std::span<const ModuleId>(raw)) {}

    static Partition one_module(std::size_t n) { return Partition(std::vector<ModuleId>(n, 0)); }
    static Partition singletons(std::size_t n) {
        std::vector<ModuleId> a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<ModuleId>(i);
        return Partition(a);
    }

    std::size_t node_count() const noexcept { return assignment_.size(); }
    std::size_t module_count() const noexcept { return modules_; }
    bool empty() const noexcept { return assignment_.empty(); }
    ModuleId operator[](std::size_t node) const { return assignment_[node]; }
    std::span<const ModuleId> assignment() const noexcept { return assignment_; }

    /// Per-module sum of `weights`.
    std::vector<double> module_mass(std::span<const double> weights) const {
        if (weights.size() != assignment_.size()) throw std::invalid_argument("weight vector size mismatch");
        std::vector<double> mass(modules_, 0.0);
        for (std::size_t i = 0; i < assignment_.size(); ++i) mass[assignment_[i]] += weights[i];
        return mass;
    }

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<ModuleId> assignment_;
    std::size_t modules_ = 0;
};

}  // namespace smartwalk
