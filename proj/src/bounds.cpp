#include "nnlb/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nnlb {

namespace {

void warn(std::vector<std::string>* warnings, const std::string& message) {
  if (warnings) warnings->push_back(message);
}

double checked_log2(double arg, const char* what) {
  if (arg <= 1.0) {
    std::ostringstream msg;
    msg << "degenerate logarithm: " << what << " = " << arg << " must exceed 1";
    throw std::invalid_argument(msg.str());
  }
  return std::log2(arg);
}

}  // namespace

DecayRate DecayRate::poly_log(double alpha, double beta) {
  DecayRate r{Kind::PolyLog, alpha, beta};
  r.validate();
  return r;
}

DecayRate DecayRate::log_only(double alpha) {
  DecayRate r{Kind::LogOnly, alpha, 0.0};
  r.validate();
  return r;
}

void DecayRate::validate() const {
  if (alpha <= 0.0) throw std::invalid_argument("decay rate requires alpha > 0");
}

double DecayRate::nominal(double n) const {
  const double log_n = checked_log2(n, "n");
  if (kind == Kind::PolyLog)
    return std::pow(log_n, beta) / std::pow(n, alpha);
  return std::pow(log_n, -alpha);
}

const char* DecayRate::name() const {
  return kind == Kind::PolyLog ? "polylog" : "logonly";
}

WeightRule WeightRule::constant(double w0) {
  if (w0 < 0.0) throw std::invalid_argument("weight bound must be >= 0");
  return {Kind::Constant, w0, 0.0};
}

WeightRule WeightRule::power(double scale, double delta) {
  WeightRule r{Kind::PowerOfN, scale, delta};
  r.validate();
  return r;
}

void WeightRule::validate() const {
  if (value < 0.0) throw std::invalid_argument("weight rule must be nonnegative");
  if (kind == Kind::PowerOfN && exponent < 0.0)
    throw std::invalid_argument("weight rule exponent must be >= 0");
}

double WeightRule::at(double n) const {
  if (kind == Kind::Constant) return value;
  return value * std::pow(n, exponent);
}

std::string WeightRule::describe() const {
  std::ostringstream s;
  if (kind == Kind::Constant) {
    s << "const:" << value;
  } else {
    s << "power:" << value << ":" << exponent;
  }
  return s.str();
}

SizeRule SizeRule::fixed(long v) {
  if (v < 1) throw std::invalid_argument("size rule requires value >= 1");
  return {Kind::Fixed, static_cast<double>(v), 0.0};
}

SizeRule SizeRule::power(double scale, double delta) {
  if (scale <= 0.0) throw std::invalid_argument("size rule scale must be > 0");
  if (delta < 0.0) throw std::invalid_argument("size rule exponent must be >= 0");
  return {Kind::PowerOfN, scale, delta};
}

long SizeRule::at(double n) const {
  double v = kind == Kind::Fixed ? value : value * std::pow(n, exponent);
  return std::max(1L, std::lround(v));
}

std::string SizeRule::describe() const {
  std::ostringstream s;
  if (kind == Kind::Fixed) {
    s << "fixed:" << value;
  } else {
    s << "power:" << value << ":" << exponent;
  }
  return s.str();
}

double width_lower_bound(const DecayRate& rate, double n, double phi,
                         std::vector<std::string>* warnings) {
  rate.validate();
  if (n < 2.0) throw std::invalid_argument("width_lower_bound requires n >= 2");
  if (phi <= 0.0) throw std::invalid_argument("width_lower_bound requires phi > 0");
  if (n * phi <= 1.0)
    throw std::invalid_argument("width_lower_bound requires n * phi > 1");
  if (phi < std::log2(n))
    warn(warnings, "phi below log2(n): the transfer assumes phi(n) >= c log2 n");
  const double log_term = std::log2(n * phi);
  if (rate.kind == DecayRate::Kind::PolyLog)
    return std::pow(log_term, rate.beta) / std::pow(n * phi, rate.alpha);
  return std::pow(log_term, -rate.alpha);
}

std::string bound_formula_id(const DecayRate& rate, const WeightRule& rule,
                             int depth) {
  std::string id = rate.kind == DecayRate::Kind::PolyLog ? "polylog" : "logonly";
  id += depth > 1 ? "-deep" : "-shallow";
  id += rule.kind == WeightRule::Kind::Constant ? "-constw" : "-general";
  return id;
}

namespace {

// Constant-weight closed forms (the w-independent specializations used when
// the weight rule is pinned to a constant).
double constant_weight_bound(const DecayRate& rate, long width, int depth,
                             double n) {
  const double a = rate.alpha, b = rate.beta;
  if (depth == 1) {
    const double log_n = checked_log2(n, "n");
    if (rate.kind == DecayRate::Kind::PolyLog)
      return std::pow(n, -a) * std::pow(log_n, b - a);
    return std::pow(log_n, -a);
  }
  const double log_w = checked_log2(static_cast<double>(width), "width");
  const double inner = checked_log2(n * depth * log_w, "n * depth * log2(width)");
  if (rate.kind == DecayRate::Kind::PolyLog)
    return std::pow(n * depth, -a) * std::pow(inner, b) / std::pow(log_w, a);
  return std::pow(inner, -a);
}

// General forms with the weight bound w inside the logarithms.
double general_bound(const DecayRate& rate, long width, int depth, double w,
                     double n) {
  const double a = rate.alpha, b = rate.beta;
  if (depth > 1) {
    const double g = checked_log2(width * (w + 1.0), "width * (w+1)");
    const double inner = checked_log2(n * depth * g, "n * depth * log2(width*(w+1))");
    if (rate.kind == DecayRate::Kind::PolyLog)
      return std::pow(n * depth, -a) * std::pow(inner, b) / std::pow(g, a);
    return std::pow(inner, -a);
  }
  if (rate.kind == DecayRate::Kind::PolyLog) {
    // The shallow PolyLog expression carries n*w (not n*(w+1)) inside its
    // inner logarithm; values below 1 would make it degenerate.
    if (w < 1.0)
      throw std::invalid_argument(
          "shallow polylog bound requires weight bound >= 1");
    const double inner = checked_log2(n * checked_log2(n * w, "n * w"),
                                      "n * log2(n*w)");
    const double denom = checked_log2(n * (w + 1.0), "n * (w+1)");
    return std::pow(n, -a) * std::pow(inner, b) / std::pow(denom, a);
  }
  const double inner = checked_log2(n * checked_log2(n * (w + 1.0), "n * (w+1)"),
                                    "n * log2(n*(w+1))");
  return std::pow(inner, -a);
}

}  // namespace

double approx_error_lower_bound(long width, int depth, const Activation& act,
                                const WeightRule& w_rule, const DecayRate& rate,
                                double n, std::vector<std::string>* warnings) {
  rate.validate();
  w_rule.validate();
  if (width < 1) throw std::invalid_argument("width must be >= 1");
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (n < 2.0) throw std::invalid_argument("n must be >= 2");
  if (act.growth_constant() * width < 2.0)
    throw std::invalid_argument(
        "bound requires growth_constant * width >= 2");

  if (width <= 1000000L) {
    const Architecture ref{1, static_cast<int>(width), depth};
    const double n_ref = static_cast<double>(param_count(ref));
    if (n < 0.5 * n_ref || n > 2.0 * n_ref) {
      std::ostringstream msg;
      msg << "n = " << n << " is off the architecture's parameter count "
          << n_ref << " by more than a factor 2";
      warn(warnings, msg.str());
    }
  }

  const double w = w_rule.at(n);
  if (w_rule.kind == WeightRule::Kind::Constant)
    return constant_weight_bound(rate, width, depth, n);
  return general_bound(rate, width, depth, w, n);
}

BoundCurve bound_curve(long width, int depth, const Activation& act,
                       const WeightRule& w_rule, const DecayRate& rate,
                       const std::vector<double>& n_list,
                       std::vector<std::string>* warnings) {
  if (n_list.empty()) throw std::invalid_argument("n list is empty");
  BoundCurve curve;
  curve.regime = depth > 1 ? "deep" : "shallow";
  curve.formula_id = bound_formula_id(rate, w_rule, depth);
  double prev_n = 0.0;
  for (double n : n_list) {
    if (n <= prev_n)
      throw std::invalid_argument("n list must be strictly increasing");
    prev_n = n;
    BoundCurvePoint point;
    point.n = n;
    point.width = width;
    point.depth = depth;
    point.w = w_rule.at(n);
    point.value =
        approx_error_lower_bound(width, depth, act, w_rule, rate, n, warnings);
    curve.points.push_back(point);
  }
  return curve;
}

std::vector<TradeoffRow> tradeoff_table(long n_budget, const WeightRule& w_rule,
                                        const DecayRate& rate,
                                        const Activation& act,
                                        std::vector<int> depths) {
  if (depths.empty()) throw std::invalid_argument("depth list must be nonempty");
  if (n_budget < 4) throw std::invalid_argument("n_budget must be >= 4");
  std::sort(depths.begin(), depths.end());
  std::vector<TradeoffRow> rows;
  rows.reserve(depths.size());
  for (int depth : depths) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    long width;
    if (depth == 1) {
      width = n_budget;
    } else {
      width = std::max<long>(
          2, std::lround(std::sqrt(static_cast<double>(n_budget) / depth)));
    }
    TradeoffRow row;
    row.depth = depth;
    row.width = width;
    // Exact parameter count at input dimension 1 (the budget convention).
    const long d = 1;
    row.n_exact = (d + 1) * width + (depth - 1) * width * (width + 1) + width + 1;
    row.w = w_rule.at(static_cast<double>(row.n_exact));
    row.value = approx_error_lower_bound(width, depth, act, w_rule, rate,
                                         static_cast<double>(row.n_exact));
    row.formula_id = bound_formula_id(rate, w_rule, depth);
    rows.push_back(std::move(row));
  }
  return rows;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("regression needs matching x/y with >= 2 points");
  const double count = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("regression abscissae are constant");
  LinearFit fit;
  fit.slope = (count * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / count;
  return fit;
}

GapReport superconvergence_gap(const SizeRule& width_rule,
                               const SizeRule& depth_rule,
                               const WeightRule& w_rule, const DecayRate& rate,
                               const std::vector<double>& n_list,
                               const Activation& act, double slope_threshold) {
  if (n_list.size() < 4)
    throw std::invalid_argument(
        "superconvergence classification needs at least 4 points");
  GapReport report;
  report.threshold = slope_threshold;
  std::vector<double> log_n, log_ratio;
  log_n.reserve(n_list.size());
  log_ratio.reserve(n_list.size());
  for (double n : n_list) {
    GapPoint point;
    point.n = n;
    point.width = width_rule.at(n);
    point.depth = depth_rule.at(n);
    point.w = w_rule.at(n);
    point.bound = approx_error_lower_bound(point.width,
                                           static_cast<int>(point.depth), act,
                                           w_rule, rate, n);
    point.nominal = rate.nominal(n);
    point.ratio = point.bound / point.nominal;
    point.formula_id =
        bound_formula_id(rate, w_rule, static_cast<int>(point.depth));
    log_n.push_back(std::log2(n));
    log_ratio.push_back(std::log2(point.ratio));
    report.points.push_back(std::move(point));
  }
  const LinearFit fit = fit_line(log_n, log_ratio);
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.classification =
      fit.slope < slope_threshold ? kGapPolynomial : kGapPolyLog;
  return report;
}

}  // namespace nnlb
