#ifndef TRAJSHIELD_DTW_HPP
#define TRAJSHIELD_DTW_HPP

#include <span>

#include "trajshield/core_types.hpp"

namespace trajshield {

// Euclidean (L2) distance between equal-dimension feature vectors.
double pointwise_distance(std::span<const double> u, std::span<const double> v);

struct DtwOptions {
  // Divide the accumulated cost by the warping path length. Off by default:
  // the raw cumulative distance is the alignment cost.
  bool normalize_by_path_length = false;
};

// Alignment cost of the optimal warping path between two sequences:
//   D(i,j) = d(a_i, b_j) + min(D(i-1,j), D(i,j-1), D(i-1,j-1)),
// D(0,0) = 0, boundaries +inf, result D(|a|,|b|).
// O(|a|*|b|) time, O(min(|a|,|b|)) memory.
double dtw_cost(std::span<const FeatureVector> a, std::span<const FeatureVector> b,
                const DtwOptions& opt = {});

double dtw_cost(const Trajectory& a, const Trajectory& b, const DtwOptions& opt = {});

namespace detail {

// One row of the DTW lattice, extended element by element. Used by the
// incremental per-step evaluators; produces exactly the dtw_cost values.
std::vector<double> dtw_init_row(std::size_t cols);
void dtw_extend_row(std::vector<double>& row, const FeatureVector& a,
                    std::span<const FeatureVector> cols);

}  // namespace detail

}  // namespace trajshield

#endif  // TRAJSHIELD_DTW_HPP
