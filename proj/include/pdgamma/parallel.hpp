#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace pdgamma {

// Process-wide worker count used by the pair loops. Results never depend on
// it: every parallel loop writes per-index partials that are reduced in a
// fixed order afterwards.
void set_thread_count(int threads);
int thread_count();

// Calls body(begin, end) on disjoint chunks covering [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// Pairwise (tree) summation in index order; bit-identical for identical input.
double pairwise_sum(std::span<const double> values);

}  // namespace pdgamma
