#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "modcs/errors.hpp"

namespace modcs {

/// Sorted set of distinct column/coefficient indices.
class IndexSet {
public:
    IndexSet() = default;
    IndexSet(std::initializer_list<std::size_t> idx) : idx_(idx) { normalize(); }
    explicit IndexSet(std::vector<std::size_t> idx) : idx_(std::move(idx)) { normalize(); }

    static IndexSet full(std::size_t m) {
        std::vector<std::size_t> v(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = i;
        IndexSet s;
        s.idx_ = std::move(v);
        return s;
    }

    std::size_t size() const { return idx_.size(); }
    bool empty() const { return idx_.empty(); }
    std::size_t operator[](std::size_t k) const { return idx_[k]; }

    const std::vector<std::size_t>& indices() const { return idx_; }
    auto begin() const { return idx_.begin(); }
    auto end() const { return idx_.end(); }

    bool contains(std::size_t i) const {
        return std::binary_search(idx_.begin(), idx_.end(), i);
    }

    void insert(std::size_t i) {
        auto it = std::lower_bound(idx_.begin(), idx_.end(), i);
        if (it == idx_.end() || *it != i) idx_.insert(it, i);
    }

    void erase(std::size_t i) {
        auto it = std::lower_bound(idx_.begin(), idx_.end(), i);
        if (it != idx_.end() && *it == i) idx_.erase(it);
    }

    IndexSet set_union(const IndexSet& o) const {
        IndexSet r;
        std::set_union(idx_.begin(), idx_.end(), o.idx_.begin(), o.idx_.end(),
                       std::back_inserter(r.idx_));
        return r;
    }

    IndexSet set_intersection(const IndexSet& o) const {
        IndexSet r;
        std::set_intersection(idx_.begin(), idx_.end(), o.idx_.begin(), o.idx_.end(),
                              std::back_inserter(r.idx_));
        return r;
    }

    /// A \ B  ==  A ∩ B^c
    IndexSet set_difference(const IndexSet& o) const {
        IndexSet r;
        std::set_difference(idx_.begin(), idx_.end(), o.idx_.begin(), o.idx_.end(),
                            std::back_inserter(r.idx_));
        return r;
    }

    IndexSet complement(std::size_t m) const {
        IndexSet r;
        std::size_t k = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (k < idx_.size() && idx_[k] == i) { ++k; continue; }
            r.idx_.push_back(i);
        }
        return r;
    }

    bool disjoint_with(const IndexSet& o) const {
        return set_intersection(o).empty();
    }

    std::size_t max_index() const {
        if (idx_.empty()) throw input_error("IndexSet::max_index on empty set");
        return idx_.back();
    }

    bool operator==(const IndexSet& o) const { return idx_ == o.idx_; }
    bool operator!=(const IndexSet& o) const { return !(*this == o); }

private:
    void normalize() {
        std::sort(idx_.begin(), idx_.end());
        idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
    }

    std::vector<std::size_t> idx_;
};

} // namespace modcs
