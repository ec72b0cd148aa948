#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nnlb/network.hpp"

namespace nnlb {

// Every certificate below assumes growth_constant(act) * width >= 2; the
// operations throw std::invalid_argument when that fails (the bounds are not
// claimed outside that regime).

// Certified parameter-map Lipschitz constants per layer:
//   C_0 = L (d + 1),
//   C_j = L (W (w+1) C_{j-1} + (d + 2) [L W (w+1)]^j + 1),
// with L = growth_constant(act). The last entry certifies
//   sup |net(y) - net(y')| <= C_depth * max_i |y_i - y'_i|
// over the parameter box of radius w. Entries may saturate to +inf for very
// deep networks; use recursion_constants_log2 in that regime.
std::vector<double> recursion_constants(const Architecture& arch,
                                        const Activation& act, double w);
// log2 of the same constants, finite for depths up to ~10^3 and beyond.
std::vector<double> recursion_constants_log2(const Architecture& arch,
                                             const Activation& act, double w);

// Closed-form envelope (d + 2) L (depth + 2) [L W (w+1)]^depth; strictly
// greater than the recursion's last entry.
double closed_form_bound(const Architecture& arch, const Activation& act,
                         double w);
double closed_form_bound_log2(const Architecture& arch, const Activation& act,
                              double w);

// Certified bound on hidden-layer magnitudes: entry j bounds the maximum
// |value| of hidden layer j (after the activation) over the parameter box and
// over [0,1]^d. Equals (d + 2) L (w+1) [L W (w+1)]^j for j = 0..depth-1.
std::vector<double> layer_magnitude_bounds(const Architecture& arch,
                                           const Activation& act, double w);

// Exponent of the Lipschitz scale 2^phi: phi = c * depth * log2(W (w+1)).
// Requires W (w+1) > 1. A nonpositive c yields a degenerate exponent; the
// value is still returned and *warning is set when provided.
double phi_exponent(const Architecture& arch, double w, double c,
                    std::string* warning = nullptr);

struct LipschitzReport {
  Architecture arch;
  Activation act = Activation::relu();
  double w = 0.0;
  std::vector<double> C;        // recursion constants C_0..C_depth
  std::vector<double> log2_C;
  double closed_form = 0.0;
  double log2_closed_form = 0.0;
  std::vector<double> layer_bounds;  // hidden layers 0..depth-1
  double phi = 0.0;
  long n = 0;
  double c_convention = 1.0;

  nlohmann::json to_json() const;
};

// Assembles the full report; requires c_convention > 0 so that phi > 0.
LipschitzReport make_lipschitz_report(const Architecture& arch,
                                      const Activation& act, double w,
                                      double c_convention = 1.0);

struct EmpiricalLipschitz {
  double max_ratio = 0.0;
  bool no_valid_pairs = true;
  long pairs_used = 0;
  long pairs_skipped = 0;
  Eigen::VectorXd argmax_a;  // the pair attaining max_ratio (empty if none)
  Eigen::VectorXd argmax_b;
};

// Samples num_pairs parameter pairs in the box of radius w (even indices:
// both endpoints uniform; odd indices: a uniform endpoint plus a directional
// perturbation of relative size 1e-3) and returns the largest observed ratio
//   sup-grid distance of outputs / max-norm distance of parameters,
// skipping pairs closer than 1e-12. Deterministic in (seed, num_pairs)
// regardless of the thread count.
EmpiricalLipschitz empirical_lipschitz(const Architecture& arch,
                                       const Activation& act, double w,
                                       const Grid& grid, long num_pairs,
                                       std::uint64_t seed, int threads = 0);

struct VerifyResult {
  bool pass = false;
  double certificate = 0.0;  // C_depth
  double margin = 0.0;       // certificate / max_ratio
  EmpiricalLipschitz empirical;
};

// Pass iff the empirical max ratio stays below the report's certified
// constant. A failure is a result (it carries the violating pair), not an
// error.
VerifyResult verify_lipschitz(const LipschitzReport& report, const Grid& grid,
                              long num_pairs, std::uint64_t seed,
                              int threads = 0);

}  // namespace nnlb
