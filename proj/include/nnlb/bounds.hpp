#pragma once

#include <string>
#include <vector>

#include "nnlb/network.hpp"

namespace nnlb {

// Assumed lower bound on the entropy numbers of the approximated class:
// PolyLog stands for (log2 n)^beta / n^alpha, LogOnly for (log2 n)^-alpha.
// All values here are rate values with the leading constant fixed to 1.
struct DecayRate {
  enum class Kind { PolyLog, LogOnly };
  Kind kind = Kind::PolyLog;
  double alpha = 1.0;
  double beta = 0.0;  // ignored for LogOnly

  static DecayRate poly_log(double alpha, double beta);
  static DecayRate log_only(double alpha);
  void validate() const;
  // The nominal rate value at n.
  double nominal(double n) const;
  const char* name() const;
};

// Parameter box bound as a function of the parameter budget n.
// Constant(w0) is treated as the constant-weight regime and routed to the
// constant-weight closed forms; PowerOfN(scale, delta) gives
// w(n) = scale * n^delta and is evaluated through the general formulas (use
// delta = 0 for a constant bound that still exercises the general route).
struct WeightRule {
  enum class Kind { Constant, PowerOfN };
  Kind kind = Kind::Constant;
  double value = 1.0;     // w0 or scale
  double exponent = 0.0;  // delta

  static WeightRule constant(double w0);
  static WeightRule power(double scale, double delta);
  void validate() const;
  double at(double n) const;
  std::string describe() const;
};

// Integer size rule for widths/depths in sweeps: Fixed(v) or
// round(scale * n^delta), clamped to at least 1.
struct SizeRule {
  enum class Kind { Fixed, PowerOfN };
  Kind kind = Kind::Fixed;
  double value = 1.0;     // fixed value or scale
  double exponent = 0.0;  // delta

  static SizeRule fixed(long v);
  static SizeRule power(double scale, double delta);
  long at(double n) const;
  std::string describe() const;
};

// Entropy-to-width transfer at Lipschitz scale 2^phi:
//   PolyLog: [log2(n phi)]^beta / (n phi)^alpha,
//   LogOnly: [log2(n phi)]^-alpha.
// Requires n >= 2 and n * phi > 1; a warning is recorded when phi < log2(n)
// (the transfer assumes phi(n) >= c log2 n).
double width_lower_bound(const DecayRate& rate, double n, double phi,
                         std::vector<std::string>* warnings = nullptr);

// Identifier of the formula used by approx_error_lower_bound (recorded in
// curves for provenance).
std::string bound_formula_id(const DecayRate& rate, const WeightRule& rule,
                             int depth);

// Lower bound on the worst-case approximation error of a class with the
// given entropy decay by width-W depth-`depth` networks with weight bound
// w(n). Deep regime (depth > 1, n ~ W^2 depth) and shallow regime (depth = 1,
// n ~ W) have separate expressions; Constant weight rules use the
// constant-weight closed forms, PowerOfN rules the general ones. The shallow
// PolyLog general form requires w >= 1 (its inner logarithm contains n*w).
// Warnings are recorded when n is inconsistent with param_count(1, W, depth)
// by more than a factor 2.
double approx_error_lower_bound(long width, int depth, const Activation& act,
                                const WeightRule& w_rule, const DecayRate& rate,
                                double n,
                                std::vector<std::string>* warnings = nullptr);

struct BoundCurvePoint {
  double n = 0.0;
  long width = 0;
  int depth = 1;
  double w = 0.0;
  double value = 0.0;
};

// Lower-bound values along strictly increasing n at fixed (width, depth).
struct BoundCurve {
  std::vector<BoundCurvePoint> points;
  std::string regime;       // "deep" or "shallow"
  std::string formula_id;
  std::string constant_convention = "rate value, constants suppressed";
};

BoundCurve bound_curve(long width, int depth, const Activation& act,
                       const WeightRule& w_rule, const DecayRate& rate,
                       const std::vector<double>& n_list,
                       std::vector<std::string>* warnings = nullptr);

struct TradeoffRow {
  int depth = 1;
  long width = 1;
  long n_exact = 0;
  double w = 0.0;
  double value = 0.0;
  std::string formula_id;
};

// One row per depth at a fixed parameter budget: W = round(sqrt(budget/depth))
// for depth > 1 (at least 2) and W = budget for depth = 1; the bound is
// evaluated at the exact parameter count of the resulting architecture
// (input dimension 1 by convention). Rows are sorted by depth.
std::vector<TradeoffRow> tradeoff_table(long n_budget, const WeightRule& w_rule,
                                        const DecayRate& rate,
                                        const Activation& act,
                                        std::vector<int> depths);

struct GapPoint {
  double n = 0.0;
  long width = 0;
  long depth = 0;
  double w = 0.0;
  double bound = 0.0;
  double nominal = 0.0;
  double ratio = 0.0;
  std::string formula_id;
};

struct GapReport {
  std::vector<GapPoint> points;
  double slope = 0.0;      // log-log regression of ratio against n
  double intercept = 0.0;
  double threshold = 0.0;
  std::string classification;
};

inline constexpr double kDefaultGapSlopeThreshold = -0.05;
inline constexpr const char* kGapPolyLog = "no super-convergence possible (gap polylog)";
inline constexpr const char* kGapPolynomial = "super-convergence possible (gap polynomial)";

// Ratio of the network lower bound to the nominal entropy rate along n_list,
// classified by the fitted log-log slope: below the threshold the gap decays
// polynomially (super convergence possible), otherwise it is polylogarithmic.
// Needs at least 4 points for the regression.
GapReport superconvergence_gap(const SizeRule& width_rule,
                               const SizeRule& depth_rule,
                               const WeightRule& w_rule, const DecayRate& rate,
                               const std::vector<double>& n_list,
                               const Activation& act,
                               double slope_threshold = kDefaultGapSlopeThreshold);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares for y against x; needs x.size() >= 2.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nnlb
