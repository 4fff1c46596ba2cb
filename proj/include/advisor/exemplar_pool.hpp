#pragma once
/// @file exemplar_pool.hpp
/// @brief The growing set of datapoints eligible as in-context examples.
///        Append-only; every draw samples without replacement.

#include <vector>

#include "advisor/common.hpp"
#include "advisor/data_point.hpp"

namespace advisor {

struct ExemplarPool {
    std::vector<DataPoint> entries;
    std::uint64_t rng_seed = 0;  // seed that governs all sampling from this pool

    size_t size() const { return entries.size(); }
    void add(DataPoint p) { entries.push_back(std::move(p)); }
};

/// Draws k distinct entries via the documented partial Fisher-Yates rule
/// (see sample_indices).  The rng state advances deterministically.
inline std::vector<DataPoint> sample_exemplars(const ExemplarPool& pool, size_t k, Rng& rng) {
    if (k == 0) throw ValidationError("sample_exemplars: k must be positive");
    if (pool.size() < k) {
        throw ValidationError("sample_exemplars: need " + std::to_string(k) +
                              " exemplars but pool holds " + std::to_string(pool.size()));
    }
    std::vector<std::size_t> picks = sample_indices(rng, pool.size(), k);
    std::vector<DataPoint> out;
    out.reserve(k);
    for (std::size_t i : picks) out.push_back(pool.entries[i]);
    return out;
}

}  // namespace advisor
