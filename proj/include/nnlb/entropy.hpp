#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nnlb {

enum class Metric { SupNorm, Euclidean };

// Finite point set, one point per row.
struct PointCloud {
  Eigen::MatrixXd points;
  Metric metric = Metric::SupNorm;

  void validate() const;
  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  double distance(int i, int j) const;
};

enum class CoverMode { ExactSetCenters, Greedy, Analytic };
const char* cover_mode_name(CoverMode mode);

// A covering of the cloud by at most 2^n balls of the given radius, centered
// at the cloud points listed in `centers` (indices).
struct CoveringResult {
  int n = 0;
  double radius = 0.0;
  std::vector<int> centers;
  CoverMode mode = CoverMode::Greedy;
};

// Entropy number of the interval [a, b] in the real line with arbitrary
// centers: (b - a) * 2^-(n+1).
double interval_entropy(double a, double b, int n);

// Minimal covering radius when the at most 2^n centers are restricted to
// cloud points. Searches the pairwise-distance lattice by bisection with an
// exact set-cover decision at each candidate radius; at most a factor 2 above
// the arbitrary-center entropy number. Requires size <= 64 and 2^n <= 16.
CoveringResult exact_entropy(const PointCloud& cloud, int n);

// Farthest-point traversal with up to 2^n centers: first center is point 0,
// each next center is the point farthest from the chosen set (ties by lowest
// index). Upper-bounds exact_entropy's radius on the same inputs.
CoveringResult greedy_entropy(const PointCloud& cloud, int n);

// Sampled Lipschitz ball: sequences (f(x_1),...,f(x_m)) on a uniform m-point
// grid with |f(x_i)| <= uniform_bound, consecutive increments at most
// lipschitz_bound/(m-1), and values quantized to multiples of quantum.
struct FunctionClassSpec {
  double lipschitz_bound = 1.0;  // M >= 0
  double uniform_bound = 1.0;    // B > 0
  int grid_size = 2;             // m >= 2
  double quantum = 1.0;          // q > 0

  void validate() const;
};

// Number of sequences the spec enumerates (computed without materializing).
double lipschitz_ball_count(const FunctionClassSpec& spec);

// Enumerates the full class as a sup-norm cloud; throws (reporting the count)
// when it exceeds 10^5 sequences.
PointCloud discretize_lipschitz_ball(const FunctionClassSpec& spec);

// Entropy curve e_0..e_n_max: exact set-center coverings within the exactness
// budget, greedy beyond it. A previous covering is carried forward whenever
// it beats the current candidate (it uses fewer than 2^n balls, so it stays
// admissible), which keeps the curve non-increasing.
std::vector<CoveringResult> entropy_curve(const PointCloud& cloud, int n_max);

// Independent re-check that every cloud point lies within radius + tol of
// some listed center.
bool covering_is_valid(const PointCloud& cloud, const CoveringResult& cover,
                       double tol = 1e-12);

// One point per row, comma-separated. A non-numeric first line is skipped as
// a header.
PointCloud load_cloud_csv(const std::string& path, Metric metric);

}  // namespace nnlb
