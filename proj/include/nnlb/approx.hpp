#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nnlb/bounds.hpp"
#include "nnlb/network.hpp"

namespace nnlb {

// Target samples on the experiment grid (one value per grid point, in the
// grid's column order).
struct TargetFunction {
  Eigen::VectorXd values;
  std::string label;
};

struct SearchBudget {
  long samples = 0;       // uniform draws in the parameter box
  long refine_steps = 0;  // pattern-search sweeps per refinement start
  std::uint64_t seed = 0;

  void validate() const;
};

struct SearchResult {
  double error = 0.0;
  ParamVector params;
  long evaluations = 0;
};

// Best grid-sup approximation error found by box-constrained random search
// followed by coordinatewise pattern search (per-coordinate step halved when
// neither direction improves, trial points clamped to the box walls). The
// zero vector and every entry of extra_starts are always part of the
// candidate set, so the result never exceeds their errors. Candidate i is a
// pure function of (seed, i): enlarging the sample budget keeps earlier
// candidates identical, and with refine_steps = 0 the returned error is
// non-increasing in the budget. Deterministic for fixed inputs regardless of
// the thread count.
SearchResult estimate_error(const TargetFunction& target,
                            const Architecture& arch, const Activation& act,
                            double w, const Grid& grid,
                            const SearchBudget& budget, int threads = 0,
                            const std::vector<Eigen::VectorXd>& extra_starts = {});

// Runs estimate_error across increasing widths, warm-starting each search
// with the zero-padded embedding of the previous best parameters; the error
// sequence is non-increasing by construction.
std::vector<SearchResult> widen_monotone_experiment(
    const TargetFunction& target, const Architecture& base_arch,
    const std::vector<int>& widths, const Activation& act, double w,
    const Grid& grid, const SearchBudget& budget, int threads = 0);

struct ConsistencyReport {
  std::vector<double> per_target_error;
  double empirical_max_error = 0.0;
  double rate_value = 0.0;  // lower-bound formula at the matching n
  double ratio = 0.0;       // informational; constants are suppressed
  long n = 0;
  double w = 0.0;
  bool sane = false;  // all errors finite and nonnegative
  std::vector<std::string> warnings;
};

// Empirical worst error over the sample next to the rate value at the
// architecture's parameter count. The ratio is informational only: the lower
// bound quantifies over the full class and hides absolute constants, so no
// magnitude comparison is asserted.
ConsistencyReport consistency_report(const std::vector<TargetFunction>& sample,
                                     const Architecture& arch,
                                     const Activation& act,
                                     const WeightRule& w_rule,
                                     const DecayRate& rate, const Grid& grid,
                                     const SearchBudget& budget,
                                     int threads = 0);

}  // namespace nnlb
