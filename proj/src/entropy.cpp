#include "nnlb/entropy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nnlb {

namespace {

constexpr int kExactMaxPoints = 64;
constexpr int kExactMaxBalls = 16;
constexpr double kEnumerationCap = 1e5;

// Number of balls for level n, clamped to the cloud size (2^n saturates).
int ball_budget(int n, int cloud_size) {
  if (n >= 30) return cloud_size;
  const long balls = 1L << n;
  return static_cast<int>(std::min<long>(balls, cloud_size));
}

using Mask = std::uint64_t;

// Depth-first exact set-cover decision: can `max_sets` of the given masks
// cover all of `uncovered`? Branches on the uncovered point with the fewest
// covering sets; candidate centers are tried in increasing index order, so
// the first solution found is the deterministic tie-broken one.
bool cover_decision(const std::vector<Mask>& sets, Mask uncovered,
                    int max_sets, std::vector<int>& chosen) {
  if (uncovered == 0) return true;
  if (max_sets == 0) return false;

  int best_point = -1;
  int best_count = std::numeric_limits<int>::max();
  int max_cover = 0;
  for (const Mask s : sets) max_cover = std::max(max_cover, std::popcount(s & uncovered));
  if (static_cast<long>(max_cover) * max_sets < std::popcount(uncovered))
    return false;
  Mask scan = uncovered;
  while (scan != 0) {
    const int p = std::countr_zero(scan);
    scan &= scan - 1;
    int count = 0;
    for (const Mask s : sets)
      if (s & (Mask{1} << p)) ++count;
    if (count == 0) return false;
    if (count < best_count) {
      best_count = count;
      best_point = p;
    }
  }
  for (int c = 0; c < static_cast<int>(sets.size()); ++c) {
    if (!(sets[c] & (Mask{1} << best_point))) continue;
    chosen.push_back(c);
    if (cover_decision(sets, uncovered & ~sets[c], max_sets - 1, chosen))
      return true;
    chosen.pop_back();
  }
  return false;
}

std::vector<Mask> coverage_sets(const PointCloud& cloud, double radius) {
  const int npts = cloud.size();
  std::vector<Mask> sets(npts, 0);
  for (int c = 0; c < npts; ++c)
    for (int p = 0; p < npts; ++p)
      if (cloud.distance(c, p) <= radius) sets[c] |= Mask{1} << p;
  return sets;
}

}  // namespace

void PointCloud::validate() const {
  if (points.rows() < 1) throw std::invalid_argument("point cloud is empty");
  if (points.cols() < 1)
    throw std::invalid_argument("point cloud has zero-dimensional points");
}

double PointCloud::distance(int i, int j) const {
  const auto diff = points.row(i) - points.row(j);
  return metric == Metric::SupNorm ? diff.cwiseAbs().maxCoeff() : diff.norm();
}

const char* cover_mode_name(CoverMode mode) {
  switch (mode) {
    case CoverMode::ExactSetCenters: return "exact-set-centers";
    case CoverMode::Greedy: return "greedy";
    case CoverMode::Analytic: return "analytic";
  }
  return "unknown";
}

double interval_entropy(double a, double b, int n) {
  if (b < a) throw std::invalid_argument("interval requires b >= a");
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  return (b - a) * std::exp2(-(n + 1.0));
}

CoveringResult exact_entropy(const PointCloud& cloud, int n) {
  cloud.validate();
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  const int npts = cloud.size();
  if (npts > kExactMaxPoints || (n < 30 && (1L << n) > kExactMaxBalls) || n >= 30)
    throw std::invalid_argument(
        "exact covering budget exceeded (need size <= 64 and 2^n <= 16); "
        "use greedy_entropy");
  const int balls = ball_budget(n, npts);

  std::vector<double> radii;
  radii.push_back(0.0);
  for (int i = 0; i < npts; ++i)
    for (int j = i + 1; j < npts; ++j) radii.push_back(cloud.distance(i, j));
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  // The decision is monotone in the radius; bisect for the smallest
  // candidate that admits a cover. Coverage always holds at the largest
  // pairwise distance (any single center reaches everything).
  int lo = 0, hi = static_cast<int>(radii.size()) - 1;
  std::vector<int> chosen;
  const Mask all = npts == 64 ? ~Mask{0} : (Mask{1} << npts) - 1;
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    std::vector<int> probe;
    if (cover_decision(coverage_sets(cloud, radii[mid]), all, balls, probe)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  cover_decision(coverage_sets(cloud, radii[hi]), all, balls, chosen);
  std::sort(chosen.begin(), chosen.end());

  CoveringResult result;
  result.n = n;
  result.radius = radii[hi];
  result.centers = std::move(chosen);
  result.mode = CoverMode::ExactSetCenters;
  return result;
}

CoveringResult greedy_entropy(const PointCloud& cloud, int n) {
  cloud.validate();
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  const int npts = cloud.size();
  const int balls = ball_budget(n, npts);

  CoveringResult result;
  result.n = n;
  result.mode = CoverMode::Greedy;
  result.centers.push_back(0);
  Eigen::VectorXd nearest(npts);
  for (int p = 0; p < npts; ++p) nearest[p] = cloud.distance(p, 0);
  while (static_cast<int>(result.centers.size()) < balls) {
    int farthest = 0;
    for (int p = 1; p < npts; ++p)
      if (nearest[p] > nearest[farthest]) farthest = p;
    if (nearest[farthest] == 0.0) break;
    result.centers.push_back(farthest);
    for (int p = 0; p < npts; ++p)
      nearest[p] = std::min(nearest[p], cloud.distance(p, farthest));
  }
  result.radius = nearest.maxCoeff();
  return result;
}

void FunctionClassSpec::validate() const {
  if (lipschitz_bound < 0.0)
    throw std::invalid_argument("lipschitz_bound must be >= 0");
  if (uniform_bound <= 0.0)
    throw std::invalid_argument("uniform_bound must be > 0");
  if (grid_size < 2) throw std::invalid_argument("grid_size must be >= 2");
  if (quantum <= 0.0) throw std::invalid_argument("quantum must be > 0");
}

namespace {

struct BallEnumeration {
  int levels;    // number of admissible values, 2K+1
  int offset;    // index of value 0
  int max_step;  // max |level change| between consecutive grid points
};

BallEnumeration ball_layout(const FunctionClassSpec& spec) {
  spec.validate();
  const int K =
      static_cast<int>(std::floor(spec.uniform_bound / spec.quantum + 1e-9));
  const double step_bound = spec.lipschitz_bound / (spec.grid_size - 1);
  const int max_step = static_cast<int>(std::floor(step_bound / spec.quantum + 1e-9));
  return {2 * K + 1, K, max_step};
}

}  // namespace

double lipschitz_ball_count(const FunctionClassSpec& spec) {
  const auto layout = ball_layout(spec);
  std::vector<double> counts(layout.levels, 1.0);
  for (int step = 1; step < spec.grid_size; ++step) {
    std::vector<double> next(layout.levels, 0.0);
    for (int to = 0; to < layout.levels; ++to) {
      const int lo = std::max(0, to - layout.max_step);
      const int hi = std::min(layout.levels - 1, to + layout.max_step);
      for (int from = lo; from <= hi; ++from) next[to] += counts[from];
    }
    counts.swap(next);
    double total = 0.0;
    for (double c : counts) total += c;
    if (total > 1e18) return total;  // already far beyond any budget
  }
  double total = 0.0;
  for (double c : counts) total += c;
  return total;
}

PointCloud discretize_lipschitz_ball(const FunctionClassSpec& spec) {
  const auto layout = ball_layout(spec);
  const double count = lipschitz_ball_count(spec);
  if (count > kEnumerationCap) {
    std::ostringstream msg;
    msg << "enumeration would produce " << count
        << " sequences, above the 1e5 budget";
    throw std::invalid_argument(msg.str());
  }
  const int m = spec.grid_size;
  PointCloud cloud;
  cloud.metric = Metric::SupNorm;
  cloud.points.resize(static_cast<long>(count), m);

  std::vector<int> levels(m, 0);
  long row = 0;
  // Iterative DFS in lexicographic order of the level sequence.
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int depth = static_cast<int>(stack.size()) - 1;
    const int level = stack.back();
    if (level >= layout.levels ||
        (depth > 0 && level > stack[depth - 1] + layout.max_step)) {
      stack.pop_back();
      if (!stack.empty()) ++stack.back();
      continue;
    }
    if (depth > 0 && level < stack[depth - 1] - layout.max_step) {
      ++stack.back();
      continue;
    }
    if (depth == m - 1) {
      for (int i = 0; i < m; ++i)
        cloud.points(row, i) = (stack[i] - layout.offset) * spec.quantum;
      ++row;
      ++stack.back();
    } else {
      const int next_min = std::max(0, level - layout.max_step);
      stack.push_back(next_min);
    }
  }
  if (row != static_cast<long>(count))
    throw std::logic_error("enumeration mismatch against the counted total");
  return cloud;
}

std::vector<CoveringResult> entropy_curve(const PointCloud& cloud, int n_max) {
  cloud.validate();
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  std::vector<CoveringResult> curve;
  curve.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    const bool exact_ok =
        cloud.size() <= kExactMaxPoints && n < 30 && (1L << n) <= kExactMaxBalls;
    CoveringResult candidate =
        exact_ok ? exact_entropy(cloud, n) : greedy_entropy(cloud, n);
    if (!curve.empty() && curve.back().radius < candidate.radius) {
      candidate = curve.back();
      candidate.n = n;
    }
    curve.push_back(std::move(candidate));
  }
  return curve;
}

bool covering_is_valid(const PointCloud& cloud, const CoveringResult& cover,
                       double tol) {
  if (cover.centers.empty()) return cloud.size() == 0;
  for (int p = 0; p < cloud.size(); ++p) {
    double nearest = std::numeric_limits<double>::infinity();
    for (int c : cover.centers)
      nearest = std::min(nearest, cloud.distance(p, c));
    if (nearest > cover.radius + tol) return false;
  }
  return true;
}

PointCloud load_cloud_csv(const std::string& path, Metric metric) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool parse_failed = false;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        parse_failed = true;
        break;
      }
    }
    if (parse_failed) {
      if (rows.empty() && lineno == 1) continue;  // header line
      throw std::invalid_argument(path + ": bad number on line " +
                                  std::to_string(lineno));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument(path + ": inconsistent column count on line " +
                                  std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument(path + ": no points");
  PointCloud cloud;
  cloud.metric = metric;
  cloud.points.resize(static_cast<long>(rows.size()),
                      static_cast<long>(rows.front().size()));
  for (long i = 0; i < cloud.points.rows(); ++i)
    for (long j = 0; j < cloud.points.cols(); ++j)
      cloud.points(i, j) = rows[i][j];
  return cloud;
}

}  // namespace nnlb
