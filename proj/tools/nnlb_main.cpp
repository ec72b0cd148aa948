#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nnlb/approx.hpp"
#include "nnlb/bounds.hpp"
#include "nnlb/entropy.hpp"
#include "nnlb/io.hpp"
#include "nnlb/lipschitz.hpp"
#include "nnlb/network.hpp"

namespace {

using nnlb::Activation;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(part);
  return parts;
}

Activation parse_single_activation(const std::string& spec) {
  const auto parts = split(spec, ':');
  const std::string& name = parts.front();
  if (name == "relu") return Activation::relu();
  if (name == "clip") return Activation::clip();
  if (name == "leaky")
    return Activation::leaky_relu(parts.size() > 1 ? std::stod(parts[1]) : 0.01);
  if (name == "tanh")
    return Activation::scaled_tanh(parts.size() > 1 ? std::stod(parts[1]) : 1.0);
  throw std::invalid_argument("unknown activation '" + spec +
                              "' (expected relu, clip, leaky[:slope], "
                              "tanh[:scale], mixed:<a>+<b>)");
}

// relu | clip | leaky[:slope] | tanh[:scale] | mixed:relu+clip, with optional
// user-declared constants overriding the built-in ones.
Activation parse_activation(const std::string& spec, double declared_lip,
                            double declared_zero) {
  Activation act = [&spec] {
    if (spec.rfind("mixed:", 0) == 0) {
      std::vector<Activation> components;
      for (const auto& part : split(spec.substr(6), '+'))
        components.push_back(parse_single_activation(part));
      return Activation::mixed(std::move(components));
    }
    return parse_single_activation(spec);
  }();
  if (declared_lip > 0.0) {
    return Activation::custom(act.name(), [act](double t) { return act(t); },
                              declared_lip, declared_zero);
  }
  return act;
}

nnlb::WeightRule parse_weight_rule(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.front() == "const" && parts.size() == 2)
    return nnlb::WeightRule::constant(std::stod(parts[1]));
  if (parts.front() == "power" && parts.size() == 3)
    return nnlb::WeightRule::power(std::stod(parts[1]), std::stod(parts[2]));
  throw std::invalid_argument("weight rule '" + spec +
                              "' (expected const:<w> or power:<scale>:<delta>)");
}

nnlb::SizeRule parse_size_rule(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.front() == "fixed" && parts.size() == 2)
    return nnlb::SizeRule::fixed(std::stol(parts[1]));
  if (parts.front() == "power" && parts.size() == 3)
    return nnlb::SizeRule::power(std::stod(parts[1]), std::stod(parts[2]));
  throw std::invalid_argument("size rule '" + spec +
                              "' (expected fixed:<v> or power:<scale>:<delta>)");
}

nnlb::DecayRate parse_rate(const std::string& kind, double alpha, double beta) {
  if (kind == "polylog") return nnlb::DecayRate::poly_log(alpha, beta);
  if (kind == "logonly") return nnlb::DecayRate::log_only(alpha);
  throw std::invalid_argument("rate kind '" + kind +
                              "' (expected polylog or logonly)");
}

// "a:b[:step]" -> powers of two 2^a .. 2^b; or a plain comma list of values.
std::vector<double> parse_n_spec(const std::string& spec) {
  if (spec.find(':') != std::string::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() < 2 || parts.size() > 3)
      throw std::invalid_argument("n range must be <lo>:<hi>[:<step>] in log2");
    const int lo = std::stoi(parts[0]);
    const int hi = std::stoi(parts[1]);
    const int step = parts.size() == 3 ? std::stoi(parts[2]) : 1;
    if (step < 1 || hi < lo) throw std::invalid_argument("bad n range");
    std::vector<double> values;
    for (int e = lo; e <= hi; e += step) values.push_back(std::exp2(e));
    return values;
  }
  return nnlb::parse_number_list(spec);
}

Eigen::VectorXd load_target_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (const auto& cell : split(line, ',')) {
      if (cell.empty()) continue;
      values.push_back(std::stod(cell));
    }
  }
  if (values.empty()) throw std::invalid_argument(path + ": no samples");
  return Eigen::Map<Eigen::VectorXd>(values.data(),
                                     static_cast<long>(values.size()));
}

nnlb::TargetFunction make_builtin_target(const std::string& name,
                                         const nnlb::Grid& grid) {
  const Eigen::MatrixXd pts = grid.points();
  nnlb::TargetFunction target;
  target.label = name;
  target.values.resize(pts.cols());
  if (name == "zero") {
    target.values.setZero();
  } else if (name == "tent") {
    if (grid.dim != 1)
      throw std::invalid_argument("tent target requires input dimension 1");
    for (long p = 0; p < pts.cols(); ++p)
      target.values[p] = std::abs(2.0 * pts(0, p) - 1.0);
  } else if (name.rfind("const:", 0) == 0) {
    target.values.setConstant(std::stod(name.substr(6)));
  } else {
    throw std::invalid_argument("unknown builtin target '" + name +
                                "' (expected zero, tent, const:<v>)");
  }
  return target;
}

struct CommonOut {
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOut& common) {
  cmd->add_option("--out", common.out, "output file (default: stdout)");
  cmd->add_option("--format", common.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified Lipschitz constants, entropy numbers and "
               "approximation lower bounds for feed-forward networks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file; flags take precedence");
  app.failure_message(CLI::FailureMessage::help);

  // count
  auto* count_cmd = app.add_subcommand("count", "parameter count of an architecture");
  int d = 1, W = 2, l = 1;
  CommonOut count_out;
  count_cmd->add_option("--d", d, "input dimension")->required();
  count_cmd->add_option("--W", W, "width")->required();
  count_cmd->add_option("--l", l, "depth")->required();
  add_common(count_cmd, count_out);

  // shared network flags for lip-bound / lip-verify / approx
  struct NetFlags {
    int d = 1, W = 2, l = 1;
    double w = 1.0;
    std::string act = "relu";
    double act_lip = 0.0, act_zero = 0.0;
  };

  auto add_net_flags = [](CLI::App* cmd, NetFlags& net, bool need_w) {
    cmd->add_option("--d", net.d, "input dimension")->required();
    cmd->add_option("--W", net.W, "width")->required();
    cmd->add_option("--l", net.l, "depth")->required();
    cmd->add_option("--act", net.act,
                    "relu | clip | leaky[:slope] | tanh[:scale] | mixed:<a>+<b>");
    cmd->add_option("--act-lip", net.act_lip,
                    "declared Lipschitz constant for a custom activation");
    cmd->add_option("--act-zero", net.act_zero,
                    "declared value at zero for a custom activation");
    auto* wopt = cmd->add_option("--w", net.w, "parameter box bound");
    if (need_w) wopt->required();
  };

  // lip-bound
  auto* lip_cmd = app.add_subcommand(
      "lip-bound", "certified parameter-map Lipschitz constants");
  NetFlags lip_net;
  double lip_c = 1.0;
  CommonOut lip_out;
  add_net_flags(lip_cmd, lip_net, true);
  lip_cmd->add_option("--c", lip_c, "constant in the scale exponent phi");
  add_common(lip_cmd, lip_out);

  // lip-verify
  auto* verify_cmd = app.add_subcommand(
      "lip-verify", "sample parameter pairs against the certificate");
  NetFlags verify_net;
  double verify_c = 1.0;
  long verify_pairs = 10000;
  int verify_grid = 0, verify_threads = 0;
  std::uint64_t verify_seed = 0;
  CommonOut verify_out;
  add_net_flags(verify_cmd, verify_net, true);
  verify_cmd->add_option("--c", verify_c, "constant in the scale exponent phi");
  verify_cmd->add_option("--pairs", verify_pairs, "number of sampled pairs");
  verify_cmd->add_option("--grid-res", verify_grid,
                         "points per axis (default: standard for d)");
  verify_cmd->add_option("--seed", verify_seed, "rng seed");
  verify_cmd->add_option("--threads", verify_threads, "worker threads (0 = cores)");
  add_common(verify_cmd, verify_out);

  // entropy
  auto* entropy_cmd =
      app.add_subcommand("entropy", "covering radii of finite point clouds");
  std::string cloud_path, metric_name = "sup", mode_name = "auto";
  double ball_M = 1.0, ball_B = 1.0, ball_q = 0.5;
  int ball_m = 0;  // >0 selects the sampled Lipschitz ball
  int entropy_n = -1, entropy_n_max = -1;
  CommonOut entropy_out;
  entropy_cmd->add_option("--cloud", cloud_path, "CSV file, one point per row");
  entropy_cmd->add_option("--metric", metric_name, "sup | euclid");
  entropy_cmd->add_option("--ball-m", ball_m,
                          "sample a Lipschitz ball on m grid points instead");
  entropy_cmd->add_option("--ball-M", ball_M, "Lipschitz bound of the ball");
  entropy_cmd->add_option("--ball-B", ball_B, "uniform bound of the ball");
  entropy_cmd->add_option("--ball-q", ball_q, "value quantization step");
  entropy_cmd->add_option("--n", entropy_n, "single level (2^n balls)");
  entropy_cmd->add_option("--n-max", entropy_n_max, "curve levels 0..n-max");
  entropy_cmd->add_option("--mode", mode_name, "auto | exact | greedy");
  add_common(entropy_cmd, entropy_out);

  // shared rate flags
  struct RateFlags {
    std::string kind = "polylog";
    double alpha = 1.0, beta = 0.0;
  };
  auto add_rate_flags = [](CLI::App* cmd, RateFlags& rate) {
    cmd->add_option("--rate", rate.kind, "polylog | logonly");
    cmd->add_option("--alpha", rate.alpha, "decay exponent alpha > 0");
    cmd->add_option("--beta", rate.beta, "log exponent beta (polylog only)");
  };

  // bound
  auto* bound_cmd = app.add_subcommand(
      "bound", "approximation-error lower bound along a parameter range");
  NetFlags bound_net;
  RateFlags bound_rate;
  std::string bound_w_rule = "const:1", bound_ns;
  CommonOut bound_out;
  bound_cmd->add_option("--W", bound_net.W, "width")->required();
  bound_cmd->add_option("--l", bound_net.l, "depth")->required();
  bound_cmd->add_option("--act", bound_net.act, "activation");
  bound_cmd->add_option("--act-lip", bound_net.act_lip, "declared Lipschitz constant");
  bound_cmd->add_option("--act-zero", bound_net.act_zero, "declared value at zero");
  bound_cmd->add_option("--w-rule", bound_w_rule,
                        "const:<w> or power:<scale>:<delta>");
  bound_cmd
      ->add_option("--n", bound_ns,
                   "comma list of n values or log2 range <lo>:<hi>[:<step>]")
      ->required();
  add_rate_flags(bound_cmd, bound_rate);
  add_common(bound_cmd, bound_out);

  // tradeoff
  auto* tradeoff_cmd = app.add_subcommand(
      "tradeoff", "depth sweep at a fixed parameter budget");
  NetFlags tradeoff_net;
  RateFlags tradeoff_rate;
  std::string tradeoff_w_rule = "const:1", tradeoff_depths = "1,2,4,8";
  long tradeoff_budget = 0;
  CommonOut tradeoff_out;
  tradeoff_cmd->add_option("--n-budget", tradeoff_budget, "parameter budget")
      ->required();
  tradeoff_cmd->add_option("--l-list", tradeoff_depths, "comma list of depths");
  tradeoff_cmd->add_option("--act", tradeoff_net.act, "activation");
  tradeoff_cmd->add_option("--act-lip", tradeoff_net.act_lip, "declared Lipschitz constant");
  tradeoff_cmd->add_option("--act-zero", tradeoff_net.act_zero, "declared value at zero");
  tradeoff_cmd->add_option("--w-rule", tradeoff_w_rule, "weight rule");
  add_rate_flags(tradeoff_cmd, tradeoff_rate);
  add_common(tradeoff_cmd, tradeoff_out);

  // super
  auto* super_cmd = app.add_subcommand(
      "super", "gap between the network bound and the entropy rate");
  NetFlags super_net;
  RateFlags super_rate;
  std::string super_W_rule = "fixed:4", super_l_rule = "fixed:1";
  std::string super_w_rule = "const:1", super_ns;
  double super_threshold = nnlb::kDefaultGapSlopeThreshold;
  CommonOut super_out;
  super_cmd->add_option("--W-rule", super_W_rule, "fixed:<v> or power:<scale>:<delta>");
  super_cmd->add_option("--l-rule", super_l_rule, "fixed:<v> or power:<scale>:<delta>");
  super_cmd->add_option("--w-rule", super_w_rule, "const:<w> or power:<scale>:<delta>");
  super_cmd->add_option("--act", super_net.act, "activation");
  super_cmd->add_option("--act-lip", super_net.act_lip, "declared Lipschitz constant");
  super_cmd->add_option("--act-zero", super_net.act_zero, "declared value at zero");
  super_cmd
      ->add_option("--n", super_ns,
                   "comma list of n values or log2 range <lo>:<hi>[:<step>]")
      ->required();
  super_cmd->add_option("--slope-threshold", super_threshold,
                        "classification threshold on the fitted slope");
  add_rate_flags(super_cmd, super_rate);
  add_common(super_cmd, super_out);

  // approx
  auto* approx_cmd = app.add_subcommand(
      "approx", "empirical approximation error by box-constrained search");
  NetFlags approx_net;
  std::string approx_target, approx_builtin = "tent", approx_widths;
  long approx_samples = 10000, approx_refine = 200;
  int approx_grid = 0, approx_threads = 0;
  std::uint64_t approx_seed = 0;
  CommonOut approx_out;
  add_net_flags(approx_cmd, approx_net, true);
  approx_cmd->add_option("--target", approx_target, "CSV of grid samples");
  approx_cmd->add_option("--builtin", approx_builtin,
                         "builtin target: zero | tent | const:<v>");
  approx_cmd->add_option("--samples", approx_samples, "random candidates");
  approx_cmd->add_option("--refine", approx_refine, "pattern-search sweeps");
  approx_cmd->add_option("--grid-res", approx_grid, "points per axis");
  approx_cmd->add_option("--seed", approx_seed, "rng seed");
  approx_cmd->add_option("--threads", approx_threads, "worker threads");
  approx_cmd->add_option("--widths", approx_widths,
                         "increasing width list for the warm-started sweep");
  add_common(approx_cmd, approx_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (count_cmd->parsed()) {
      const long n = nnlb::param_count({d, W, l});
      if (count_out.format == "json") {
        nnlb::write_output(count_out.out, dump({{"n", n}}));
      } else {
        nnlb::write_output(count_out.out, std::to_string(n) + "\n");
      }
      return 0;
    }

    if (lip_cmd->parsed()) {
      const Activation act =
          parse_activation(lip_net.act, lip_net.act_lip, lip_net.act_zero);
      const auto report = nnlb::make_lipschitz_report(
          {lip_net.d, lip_net.W, lip_net.l}, act, lip_net.w, lip_c);
      nnlb::write_output(lip_out.out, dump(report.to_json()));
      return 0;
    }

    if (verify_cmd->parsed()) {
      const Activation act = parse_activation(verify_net.act, verify_net.act_lip,
                                              verify_net.act_zero);
      const nnlb::Architecture arch{verify_net.d, verify_net.W, verify_net.l};
      const auto report =
          nnlb::make_lipschitz_report(arch, act, verify_net.w, verify_c);
      nnlb::Grid grid = nnlb::Grid::standard(arch.input_dim);
      if (verify_grid > 0) grid = {arch.input_dim, verify_grid};
      const auto result = nnlb::verify_lipschitz(report, grid, verify_pairs,
                                                 verify_seed, verify_threads);
      nlohmann::json j = nnlb::to_json(result);
      j["report"] = report.to_json();
      nnlb::write_output(verify_out.out, dump(j));
      return result.pass ? 0 : 1;
    }

    if (entropy_cmd->parsed()) {
      const nnlb::Metric metric = [&] {
        if (metric_name == "sup") return nnlb::Metric::SupNorm;
        if (metric_name == "euclid") return nnlb::Metric::Euclidean;
        throw std::invalid_argument("metric must be sup or euclid");
      }();
      nnlb::PointCloud cloud;
      if (ball_m > 0) {
        cloud = nnlb::discretize_lipschitz_ball({ball_M, ball_B, ball_m, ball_q});
        cloud.metric = metric;
      } else if (!cloud_path.empty()) {
        cloud = nnlb::load_cloud_csv(cloud_path, metric);
      } else {
        throw std::invalid_argument("need --cloud or --ball-m");
      }
      if (entropy_n >= 0) {
        nnlb::CoveringResult cover;
        if (mode_name == "exact") {
          cover = nnlb::exact_entropy(cloud, entropy_n);
        } else if (mode_name == "greedy") {
          cover = nnlb::greedy_entropy(cloud, entropy_n);
        } else {
          const bool exact_ok = cloud.size() <= 64 && entropy_n <= 4;
          cover = exact_ok ? nnlb::exact_entropy(cloud, entropy_n)
                           : nnlb::greedy_entropy(cloud, entropy_n);
        }
        if (entropy_out.format == "csv") {
          nnlb::write_output(entropy_out.out, nnlb::entropy_curve_csv({cover}));
        } else {
          nnlb::write_output(entropy_out.out, dump(nnlb::to_json(cover)));
        }
        return 0;
      }
      int n_max = entropy_n_max;
      if (n_max < 0)
        n_max = static_cast<int>(
            std::ceil(std::log2(std::max(2, cloud.size()))));
      const auto curve = nnlb::entropy_curve(cloud, n_max);
      if (entropy_out.format == "csv") {
        nnlb::write_output(entropy_out.out, nnlb::entropy_curve_csv(curve));
      } else {
        nnlb::write_output(entropy_out.out, dump(nnlb::to_json(curve)));
      }
      return 0;
    }

    if (bound_cmd->parsed()) {
      const Activation act = parse_activation(bound_net.act, bound_net.act_lip,
                                              bound_net.act_zero);
      const auto rate =
          parse_rate(bound_rate.kind, bound_rate.alpha, bound_rate.beta);
      const auto rule = parse_weight_rule(bound_w_rule);
      std::vector<std::string> warnings;
      const auto curve = nnlb::bound_curve(bound_net.W, bound_net.l, act, rule,
                                           rate, parse_n_spec(bound_ns),
                                           &warnings);
      for (const auto& warning : warnings)
        std::cerr << "warning: " << warning << '\n';
      if (bound_out.format == "csv") {
        nnlb::write_output(bound_out.out, nnlb::bound_curve_csv(curve));
      } else {
        nnlb::write_output(bound_out.out, dump(nnlb::to_json(curve)));
      }
      return 0;
    }

    if (tradeoff_cmd->parsed()) {
      const Activation act = parse_activation(
          tradeoff_net.act, tradeoff_net.act_lip, tradeoff_net.act_zero);
      const auto rate = parse_rate(tradeoff_rate.kind, tradeoff_rate.alpha,
                                   tradeoff_rate.beta);
      const auto rows =
          nnlb::tradeoff_table(tradeoff_budget, parse_weight_rule(tradeoff_w_rule),
                               rate, act, nnlb::parse_int_list(tradeoff_depths));
      if (tradeoff_out.format == "csv") {
        nnlb::write_output(tradeoff_out.out, nnlb::tradeoff_csv(rows));
      } else {
        nnlb::write_output(tradeoff_out.out, dump(nnlb::to_json(rows)));
      }
      return 0;
    }

    if (super_cmd->parsed()) {
      const Activation act =
          parse_activation(super_net.act, super_net.act_lip, super_net.act_zero);
      const auto rate =
          parse_rate(super_rate.kind, super_rate.alpha, super_rate.beta);
      const auto report = nnlb::superconvergence_gap(
          parse_size_rule(super_W_rule), parse_size_rule(super_l_rule),
          parse_weight_rule(super_w_rule), rate, parse_n_spec(super_ns), act,
          super_threshold);
      if (super_out.format == "csv") {
        nnlb::write_output(super_out.out, nnlb::gap_csv(report));
      } else {
        nnlb::write_output(super_out.out, dump(nnlb::to_json(report)));
      }
      return 0;
    }

    if (approx_cmd->parsed()) {
      const Activation act = parse_activation(approx_net.act, approx_net.act_lip,
                                              approx_net.act_zero);
      const nnlb::Architecture arch{approx_net.d, approx_net.W, approx_net.l};
      nnlb::Grid grid = nnlb::Grid::standard(arch.input_dim);
      if (approx_grid > 0) grid = {arch.input_dim, approx_grid};
      nnlb::TargetFunction target;
      if (!approx_target.empty()) {
        target.values = load_target_values(approx_target);
        target.label = approx_target;
        if (target.values.size() != grid.point_count())
          throw std::invalid_argument(
              "target sample count does not match the grid");
      } else {
        target = make_builtin_target(approx_builtin, grid);
      }
      const nnlb::SearchBudget budget{approx_samples, approx_refine, approx_seed};
      if (!approx_widths.empty()) {
        const auto widths = nnlb::parse_int_list(approx_widths);
        const auto results = nnlb::widen_monotone_experiment(
            target, arch, widths, act, approx_net.w, grid, budget,
            approx_threads);
        nlohmann::json arr = nlohmann::json::array();
        for (std::size_t i = 0; i < results.size(); ++i) {
          nlohmann::json item = nnlb::to_json(results[i]);
          item["W"] = widths[i];
          arr.push_back(std::move(item));
        }
        nnlb::write_output(approx_out.out, dump({{"sweep", arr}}));
      } else {
        const auto result = nnlb::estimate_error(target, arch, act, approx_net.w,
                                                 grid, budget, approx_threads);
        nnlb::write_output(approx_out.out, dump(nnlb::to_json(result)));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
