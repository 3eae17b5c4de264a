#include "trajshield/dtw.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace trajshield {

double pointwise_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw std::invalid_argument("pointwise_distance: dimension mismatch (" +
                                std::to_string(u.size()) + " vs " + std::to_string(v.size()) + ")");
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = u[k] - v[k];
    acc += d * d;
  }
  return std::sqrt(acc);
}

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

namespace detail {

std::vector<double> dtw_init_row(std::size_t cols) {
  std::vector<double> row(cols + 1, kInf);
  row[0] = 0.0;
  return row;
}

void dtw_extend_row(std::vector<double>& row, const FeatureVector& a,
                    std::span<const FeatureVector> cols) {
  double diag = row[0];
  row[0] = kInf;
  for (std::size_t j = 1; j <= cols.size(); ++j) {
    const double up = row[j];
    double best = up;
    if (diag < best) best = diag;
    if (row[j - 1] < best) best = row[j - 1];
    row[j] = pointwise_distance(a, cols[j - 1]) + best;
    diag = up;
  }
}

}  // namespace detail

namespace {

double dtw_raw(std::span<const FeatureVector> rows, std::span<const FeatureVector> cols) {
  std::vector<double> row = detail::dtw_init_row(cols.size());
  for (const FeatureVector& a : rows) detail::dtw_extend_row(row, a, cols);
  return row[cols.size()];
}

struct Cell {
  double cost;
  std::size_t len;
};

// Tracks the warping path length alongside the cost; cost ties resolve to
// the shorter path, which keeps the result independent of traversal order.
double dtw_normalized(std::span<const FeatureVector> rows, std::span<const FeatureVector> cols) {
  const std::size_t m = cols.size();
  std::vector<Cell> row(m + 1, Cell{kInf, 0});
  row[0] = Cell{0.0, 0};
  for (const FeatureVector& a : rows) {
    Cell diag = row[0];
    row[0] = Cell{kInf, 0};
    for (std::size_t j = 1; j <= m; ++j) {
      const Cell up = row[j];
      Cell best = up;
      if (diag.cost < best.cost || (diag.cost == best.cost && diag.len < best.len)) best = diag;
      const Cell& left = row[j - 1];
      if (left.cost < best.cost || (left.cost == best.cost && left.len < best.len)) best = left;
      row[j] = Cell{pointwise_distance(a, cols[j - 1]) + best.cost, best.len + 1};
      diag = up;
    }
  }
  return row[m].cost / static_cast<double>(row[m].len);
}

}  // namespace

double dtw_cost(std::span<const FeatureVector> a, std::span<const FeatureVector> b,
                const DtwOptions& opt) {
  if (a.empty() || b.empty()) throw std::invalid_argument("dtw_cost: empty sequence");
  if (a.front().size() != b.front().size())
    throw std::invalid_argument("dtw_cost: per-step dimension mismatch");
  // Roll the DP row over the shorter sequence; the cell values are
  // identical either way.
  if (a.size() < b.size()) std::swap(a, b);
  return opt.normalize_by_path_length ? dtw_normalized(a, b) : dtw_raw(a, b);
}

double dtw_cost(const Trajectory& a, const Trajectory& b, const DtwOptions& opt) {
  if (a.mode != b.mode) throw std::invalid_argument("dtw_cost: trajectory mode mismatch");
  return dtw_cost(std::span<const FeatureVector>(a.steps), std::span<const FeatureVector>(b.steps),
                  opt);
}

}  // namespace trajshield
