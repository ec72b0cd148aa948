#include "nnlb/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "nnlb/parallel.hpp"
#include "nnlb/rng.hpp"

namespace nnlb {

namespace {

constexpr std::size_t kRefineStarts = 6;
constexpr long kMaxKickRounds = 12;

struct Candidate {
  double error = std::numeric_limits<double>::infinity();
  long index = std::numeric_limits<long>::max();
  Eigen::VectorXd params;

  bool operator<(const Candidate& other) const {
    return error < other.error ||
           (error == other.error && index < other.index);
  }
};

class GridObjective {
 public:
  GridObjective(const TargetFunction& target, const Architecture& arch,
                const Activation& act, const Grid& grid)
      : arch_(arch), act_(act), pts_(grid.points()) {
    if (grid.dim != arch.input_dim)
      throw std::invalid_argument("grid dimension does not match architecture");
    if (target.values.size() != pts_.cols())
      throw std::invalid_argument("target has " +
                                  std::to_string(target.values.size()) +
                                  " samples, grid has " +
                                  std::to_string(pts_.cols()) + " points");
    target_ = target.values.transpose();
  }

  double sup_error(const Eigen::VectorXd& params, AffineStack& stack,
                   ForwardWorkspace& ws) const {
    unpack_into(params, arch_, stack);
    return (forward_grid(stack, act_, pts_, ws) - target_).cwiseAbs().maxCoeff();
  }

  double squared_error(const Eigen::VectorXd& params, AffineStack& stack,
                       ForwardWorkspace& ws) const {
    unpack_into(params, arch_, stack);
    return (forward_grid(stack, act_, pts_, ws) - target_).squaredNorm();
  }

 private:
  Architecture arch_;
  Activation act_;
  Eigen::MatrixXd pts_;
  Eigen::RowVectorXd target_;
};

// Per-worker refinement scratch.
struct RefineScratch {
  AffineStack stack;
  ForwardWorkspace ws;
  long evaluations = 0;
};

enum class Loss { Sup, Squared };

double eval_loss(const GridObjective& objective, Loss loss,
                 const Eigen::VectorXd& y, RefineScratch& scratch) {
  ++scratch.evaluations;
  return loss == Loss::Sup ? objective.sup_error(y, scratch.stack, scratch.ws)
                           : objective.squared_error(y, scratch.stack, scratch.ws);
}

// Coordinatewise pattern search in the box [-w, w]^n: per-coordinate step,
// doubled on success (capped at w/2), halved when neither direction improves,
// trial points clamped to the box walls.
double compass_search(const GridObjective& objective, Loss loss,
                      Eigen::VectorXd& y, double w, long sweeps,
                      double initial_step, RefineScratch& scratch) {
  const long n = y.size();
  double err = eval_loss(objective, loss, y, scratch);
  if (w <= 0.0 || sweeps <= 0) return err;
  Eigen::VectorXd steps = Eigen::VectorXd::Constant(n, initial_step);
  for (long sweep = 0; sweep < sweeps; ++sweep) {
    double max_step = 0.0;
    for (long i = 0; i < n; ++i) {
      bool improved = false;
      const double saved = y[i];
      for (double direction : {1.0, -1.0}) {
        const double trial = std::clamp(saved + direction * steps[i], -w, w);
        if (trial == saved) continue;
        y[i] = trial;
        const double trial_err = eval_loss(objective, loss, y, scratch);
        if (trial_err < err) {
          err = trial_err;
          improved = true;
          steps[i] = std::min(steps[i] * 2.0, 0.5 * w);
          break;
        }
        y[i] = saved;
      }
      if (!improved) steps[i] *= 0.5;
      max_step = std::max(max_step, steps[i]);
    }
    if (max_step < 1e-13 * w) break;
  }
  return err;
}

// Compass search restarted from deterministic random perturbations of the
// incumbent (a random coordinate subset, scale cycling down from w/2); only
// improvements are accepted.
double kicked_search(const GridObjective& objective, Loss loss,
                     Eigen::VectorXd& y, double w, long sweeps, long rounds,
                     std::uint64_t kick_seed, RefineScratch& scratch) {
  double best = compass_search(objective, loss, y, w, sweeps, 0.5 * w, scratch);
  Eigen::VectorXd trial(y.size());
  for (long round = 0; round < rounds; ++round) {
    std::mt19937_64 gen(mix_seed(kick_seed, round));
    const double delta = w / static_cast<double>(2L << (round % 6));
    trial = y;
    for (long k = 0; k < trial.size(); ++k) {
      if (uniform_unit(gen) < 0.5) continue;
      trial[k] = std::clamp(trial[k] + uniform_in(gen, -delta, delta), -w, w);
    }
    const double err =
        compass_search(objective, loss, trial, w, sweeps, delta, scratch);
    if (err < best) {
      best = err;
      y = trial;
    }
  }
  return best;
}

// Full refinement of one start: squared-error descent first (it has far
// fewer sup-norm ridges), then the sup error itself, with one shorter
// alternation to shake loose stragglers.
Candidate refine_start(const GridObjective& objective, Candidate start,
                       double w, long sweeps, std::uint64_t seed,
                       std::size_t start_index, RefineScratch& scratch) {
  if (w <= 0.0 || sweeps <= 0) return start;
  const long rounds = std::min(kMaxKickRounds, sweeps / 8);
  Candidate incumbent = start;
  Eigen::VectorXd y = std::move(start.params);
  kicked_search(objective, Loss::Squared, y, w, sweeps, rounds,
                mix_seed(seed, 0xa000 + start_index), scratch);
  double err = kicked_search(objective, Loss::Sup, y, w, sweeps, rounds,
                             mix_seed(seed, 0xb000 + start_index), scratch);
  if (err < incumbent.error) {
    incumbent.error = err;
    incumbent.params = y;
  }
  kicked_search(objective, Loss::Squared, y, w, sweeps, rounds / 2,
                mix_seed(seed, 0xc000 + start_index), scratch);
  err = kicked_search(objective, Loss::Sup, y, w, sweeps, rounds / 2,
                      mix_seed(seed, 0xd000 + start_index), scratch);
  if (err < incumbent.error) {
    incumbent.error = err;
    incumbent.params = std::move(y);
  }
  return incumbent;
}

}  // namespace

void SearchBudget::validate() const {
  if (samples < 0) throw std::invalid_argument("sample budget must be >= 0");
  if (refine_steps < 0)
    throw std::invalid_argument("refinement budget must be >= 0");
  if (samples + refine_steps < 1)
    throw std::invalid_argument("search budget is empty");
}

SearchResult estimate_error(const TargetFunction& target,
                            const Architecture& arch, const Activation& act,
                            double w, const Grid& grid,
                            const SearchBudget& budget, int threads,
                            const std::vector<Eigen::VectorXd>& extra_starts) {
  arch.validate();
  budget.validate();
  if (w < 0.0) throw std::invalid_argument("box bound must be >= 0");
  if (act.growth_constant() * arch.width < 2.0)
    throw std::invalid_argument("search requires growth_constant * width >= 2");
  const GridObjective objective(target, arch, act, grid);
  const long n = param_count(arch);
  for (const auto& start : extra_starts)
    if (start.size() != n)
      throw std::invalid_argument("warm start has wrong parameter count");

  // Candidate space: 0 = the zero vector, then the warm starts, then the
  // seeded random draws.
  const long fixed = 1 + static_cast<long>(extra_starts.size());
  const long total = fixed + budget.samples;
  const int nworkers = std::min<long>(resolve_threads(threads), total);

  struct WorkerState {
    std::vector<Candidate> top;
    long evaluations = 0;
  };
  std::vector<WorkerState> workers(nworkers);

  parallel_chunks(total, nworkers, [&](long begin, long end, int worker) {
    AffineStack stack;
    ForwardWorkspace ws;
    Eigen::VectorXd y(n);
    WorkerState& state = workers[worker];
    for (long i = begin; i < end; ++i) {
      if (i == 0) {
        y.setZero();
      } else if (i < fixed) {
        y = extra_starts[i - 1];
      } else {
        std::mt19937_64 gen(
            mix_seed(budget.seed, static_cast<std::uint64_t>(i - fixed)));
        for (long k = 0; k < n; ++k) y[k] = uniform_in(gen, -w, w);
      }
      const double err = objective(y, stack, ws);
      ++state.evaluations;
      Candidate cand{err, i, y};
      state.top.push_back(std::move(cand));
      std::sort(state.top.begin(), state.top.end());
      if (state.top.size() > kRefineStarts) state.top.resize(kRefineStarts);
    }
  });

  std::vector<Candidate> starts;
  long evaluations = 0;
  for (auto& state : workers) {
    evaluations += state.evaluations;
    for (auto& cand : state.top) starts.push_back(std::move(cand));
  }
  std::sort(starts.begin(), starts.end());
  if (starts.size() > kRefineStarts) starts.resize(kRefineStarts);

  Candidate best = starts.front();
  for (const auto& start : starts) {
    Candidate refined =
        pattern_search(objective, start, w, budget.refine_steps, &evaluations);
    if (refined < best) best = std::move(refined);
  }

  SearchResult result;
  result.error = best.error;
  result.params = ParamVector{std::move(best.params), w};
  result.evaluations = evaluations;
  return result;
}

std::vector<SearchResult> widen_monotone_experiment(
    const TargetFunction& target, const Architecture& base_arch,
    const std::vector<int>& widths, const Activation& act, double w,
    const Grid& grid, const SearchBudget& budget, int threads) {
  base_arch.validate();
  if (widths.empty()) throw std::invalid_argument("width list is empty");
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] < base_arch.width)
      throw std::invalid_argument("widths must not shrink below the base width");
    if (i > 0 && widths[i] <= widths[i - 1])
      throw std::invalid_argument("width list must be strictly increasing");
  }

  std::vector<SearchResult> results;
  results.reserve(widths.size());
  Architecture prev_arch = base_arch;
  const SearchResult* prev = nullptr;
  for (int width : widths) {
    Architecture arch = base_arch;
    arch.width = width;
    std::vector<Eigen::VectorXd> starts;
    if (prev != nullptr) {
      starts.push_back(width == prev_arch.width
                           ? prev->params.values
                           : embed_wider(prev->params, prev_arch, width).values);
    }
    results.push_back(
        estimate_error(target, arch, act, w, grid, budget, threads, starts));
    prev = &results.back();
    prev_arch = arch;
  }
  return results;
}

ConsistencyReport consistency_report(const std::vector<TargetFunction>& sample,
                                     const Architecture& arch,
                                     const Activation& act,
                                     const WeightRule& w_rule,
                                     const DecayRate& rate, const Grid& grid,
                                     const SearchBudget& budget, int threads) {
  if (sample.empty()) throw std::invalid_argument("target sample is empty");
  ConsistencyReport report;
  report.n = param_count(arch);
  report.w = w_rule.at(static_cast<double>(report.n));
  for (const auto& target : sample) {
    const SearchResult result =
        estimate_error(target, arch, act, report.w, grid, budget, threads);
    report.per_target_error.push_back(result.error);
    report.empirical_max_error =
        std::max(report.empirical_max_error, result.error);
  }
  report.rate_value =
      approx_error_lower_bound(arch.width, arch.depth, act, w_rule, rate,
                               static_cast<double>(report.n), &report.warnings);
  report.ratio = report.empirical_max_error / report.rate_value;
  report.sane = true;
  for (double err : report.per_target_error)
    if (!(err >= 0.0) || !std::isfinite(err)) report.sane = false;
  return report;
}

}  // namespace nnlb
