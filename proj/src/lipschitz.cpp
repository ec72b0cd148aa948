#include "nnlb/lipschitz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nnlb/parallel.hpp"
#include "nnlb/rng.hpp"

namespace nnlb {

namespace {

constexpr double kDegeneratePairCutoff = 1e-12;
constexpr double kDirectionalRelativeSize = 1e-3;

void require_certificate_preconditions(const Architecture& arch,
                                       const Activation& act, double w) {
  arch.validate();
  if (w < 0.0) throw std::invalid_argument("box bound must be >= 0");
  const double L = act.growth_constant();
  if (L * arch.width < 2.0)
    throw std::invalid_argument(
        "certificate requires growth_constant * width >= 2 (got " +
        std::to_string(L * arch.width) + ")");
}

double log2_sum3(double a, double b, double c) {
  const double m = std::max({a, b, c});
  return m + std::log2(std::exp2(a - m) + std::exp2(b - m) + std::exp2(c - m));
}

}  // namespace

std::vector<double> recursion_constants(const Architecture& arch,
                                        const Activation& act, double w) {
  require_certificate_preconditions(arch, act, w);
  const double L = act.growth_constant();
  const double wt = w + 1.0;
  const double g = L * arch.width * wt;
  std::vector<double> c(arch.depth + 1);
  c[0] = L * (arch.input_dim + 1);
  double gpow = 1.0;
  for (int j = 1; j <= arch.depth; ++j) {
    gpow *= g;
    c[j] = L * (arch.width * wt * c[j - 1] + (arch.input_dim + 2) * gpow + 1.0);
  }
  return c;
}

std::vector<double> recursion_constants_log2(const Architecture& arch,
                                             const Activation& act, double w) {
  require_certificate_preconditions(arch, act, w);
  const double L = act.growth_constant();
  const double wt = w + 1.0;
  const double log2_g = std::log2(L) + std::log2(double(arch.width)) + std::log2(wt);
  const double log2_L = std::log2(L);
  std::vector<double> lc(arch.depth + 1);
  lc[0] = std::log2(L * (arch.input_dim + 1));
  for (int j = 1; j <= arch.depth; ++j) {
    const double t_prev = log2_g + lc[j - 1];
    const double t_grow = log2_L + std::log2(double(arch.input_dim + 2)) + j * log2_g;
    lc[j] = log2_sum3(t_prev, t_grow, log2_L);
  }
  return lc;
}

double closed_form_bound(const Architecture& arch, const Activation& act,
                         double w) {
  require_certificate_preconditions(arch, act, w);
  const double L = act.growth_constant();
  const double g = L * arch.width * (w + 1.0);
  return (arch.input_dim + 2) * L * (arch.depth + 2) *
         std::pow(g, double(arch.depth));
}

double closed_form_bound_log2(const Architecture& arch, const Activation& act,
                              double w) {
  require_certificate_preconditions(arch, act, w);
  const double L = act.growth_constant();
  const double log2_g = std::log2(L) + std::log2(double(arch.width)) + std::log2(w + 1.0);
  return std::log2((arch.input_dim + 2) * L * (arch.depth + 2)) +
         arch.depth * log2_g;
}

std::vector<double> layer_magnitude_bounds(const Architecture& arch,
                                           const Activation& act, double w) {
  require_certificate_preconditions(arch, act, w);
  const double L = act.growth_constant();
  const double wt = w + 1.0;
  const double g = L * arch.width * wt;
  std::vector<double> bounds(arch.depth);
  double gpow = 1.0;
  for (int j = 0; j < arch.depth; ++j) {
    bounds[j] = (arch.input_dim + 2) * L * wt * gpow;
    gpow *= g;
  }
  return bounds;
}

double phi_exponent(const Architecture& arch, double w, double c,
                    std::string* warning) {
  arch.validate();
  if (w < 0.0) throw std::invalid_argument("box bound must be >= 0");
  if (arch.width * (w + 1.0) <= 1.0)
    throw std::invalid_argument("phi exponent requires width * (w+1) > 1");
  if (c <= 0.0 && warning)
    *warning = "constant c <= 0 gives a degenerate exponent; the width "
               "transfer assumes phi(n) >= c log2(n) with c > 0";
  return c * arch.depth * std::log2(arch.width * (w + 1.0));
}

LipschitzReport make_lipschitz_report(const Architecture& arch,
                                      const Activation& act, double w,
                                      double c_convention) {
  if (c_convention <= 0.0)
    throw std::invalid_argument("c_convention must be > 0");
  LipschitzReport report;
  report.arch = arch;
  report.act = act;
  report.w = w;
  report.C = recursion_constants(arch, act, w);
  report.log2_C = recursion_constants_log2(arch, act, w);
  report.closed_form = closed_form_bound(arch, act, w);
  report.log2_closed_form = closed_form_bound_log2(arch, act, w);
  report.layer_bounds = layer_magnitude_bounds(arch, act, w);
  report.phi = phi_exponent(arch, w, c_convention);
  report.n = param_count(arch);
  report.c_convention = c_convention;
  return report;
}

nlohmann::json LipschitzReport::to_json() const {
  nlohmann::json j;
  j["arch"] = {{"d", arch.input_dim}, {"W", arch.width}, {"l", arch.depth}};
  j["act"] = act.name();
  j["w"] = w;
  j["C"] = C;
  j["log2_C"] = log2_C;
  j["closed_form"] = closed_form;
  j["log2_closed_form"] = log2_closed_form;
  j["layer_bounds"] = layer_bounds;
  j["phi"] = phi;
  j["n"] = n;
  j["c_convention"] = c_convention;
  return j;
}

EmpiricalLipschitz empirical_lipschitz(const Architecture& arch,
                                       const Activation& act, double w,
                                       const Grid& grid, long num_pairs,
                                       std::uint64_t seed, int threads) {
  require_certificate_preconditions(arch, act, w);
  if (num_pairs < 1) throw std::invalid_argument("num_pairs must be >= 1");
  if (grid.dim != arch.input_dim)
    throw std::invalid_argument("grid dimension does not match architecture");
  const Eigen::MatrixXd pts = grid.points();
  const long n = param_count(arch);

  struct Best {
    double ratio = -1.0;
    long index = -1;
    Eigen::VectorXd a, b;
    long used = 0;
    long skipped = 0;
  };
  const int nworkers = std::min<long>(resolve_threads(threads), num_pairs);
  std::vector<Best> best(nworkers);

  parallel_chunks(num_pairs, nworkers, [&](long begin, long end, int worker) {
    AffineStack sa, sb;
    ForwardWorkspace wa, wb;
    Eigen::VectorXd ya(n), yb(n);
    Best& local = best[worker];
    for (long i = begin; i < end; ++i) {
      std::mt19937_64 gen(mix_seed(seed, static_cast<std::uint64_t>(i)));
      for (long k = 0; k < n; ++k) ya[k] = uniform_in(gen, -w, w);
      if (i % 2 == 0) {
        for (long k = 0; k < n; ++k) yb[k] = uniform_in(gen, -w, w);
      } else {
        const double step = kDirectionalRelativeSize * w;
        for (long k = 0; k < n; ++k) {
          double v = ya[k] + uniform_in(gen, -step, step);
          yb[k] = std::clamp(v, -w, w);
        }
      }
      const double dist = (ya - yb).cwiseAbs().maxCoeff();
      if (dist < kDegeneratePairCutoff) {
        ++local.skipped;
        continue;
      }
      unpack_into(ya, arch, sa);
      unpack_into(yb, arch, sb);
      const double sup = sup_distance(sa, sb, act, pts, wa, wb);
      const double ratio = sup / dist;
      ++local.used;
      if (ratio > local.ratio) {
        local.ratio = ratio;
        local.index = i;
        local.a = ya;
        local.b = yb;
      }
    }
  });

  // Order-independent reduction: max ratio, ties broken by lowest pair index,
  // so the result does not depend on the worker count.
  EmpiricalLipschitz result;
  double best_ratio = -1.0;
  long best_index = -1;
  const Best* winner = nullptr;
  for (const auto& local : best) {
    result.pairs_used += local.used;
    result.pairs_skipped += local.skipped;
    if (local.index < 0) continue;
    if (local.ratio > best_ratio ||
        (local.ratio == best_ratio && local.index < best_index)) {
      best_ratio = local.ratio;
      best_index = local.index;
      winner = &local;
    }
  }
  if (winner != nullptr) {
    result.max_ratio = best_ratio;
    result.argmax_a = winner->a;
    result.argmax_b = winner->b;
    result.no_valid_pairs = false;
  }
  return result;
}

VerifyResult verify_lipschitz(const LipschitzReport& report, const Grid& grid,
                              long num_pairs, std::uint64_t seed, int threads) {
  if (report.C.empty()) throw std::invalid_argument("report has no constants");
  VerifyResult result;
  result.certificate = report.C.back();
  result.empirical = empirical_lipschitz(report.arch, report.act, report.w,
                                         grid, num_pairs, seed, threads);
  result.pass = result.empirical.max_ratio <= result.certificate;
  result.margin = result.empirical.max_ratio > 0.0
                      ? result.certificate / result.empirical.max_ratio
                      : std::numeric_limits<double>::infinity();
  return result;
}

}  // namespace nnlb
