#include <doctest.h>

#include <cmath>
#include <random>

#include "nnlb/lipschitz.hpp"
#include "nnlb/rng.hpp"

#include <nlohmann/json.hpp>

using namespace nnlb;

namespace {

const Activation kRelu = Activation::relu();
const Architecture kSmall{1, 2, 1};

Eigen::VectorXd abs_network_params() {
  Eigen::VectorXd y(7);
  y << 1, -1, 0, 0, 1, 1, 0;
  return y;
}

}  // namespace

TEST_CASE("recursion constants match hand evaluation") {
  const auto c1 = recursion_constants(kSmall, kRelu, 1.0);
  REQUIRE(c1.size() == 2);
  CHECK(c1[0] == 2.0);
  CHECK(c1[1] == 21.0);

  const auto c0 = recursion_constants(kSmall, kRelu, 0.0);
  CHECK(c0[0] == 2.0);
  CHECK(c0[1] == 11.0);

  const auto deep = recursion_constants({3, 4, 3}, kRelu, 1.0);
  CHECK(deep[0] == 4.0);  // L * (d + 1)
}

TEST_CASE("recursion constants increase strictly in the layer index") {
  for (int W : {2, 4, 8}) {
    for (int l : {1, 2, 3, 4}) {
      for (double w : {0.0, 1.0, 2.0}) {
        const auto c = recursion_constants({2, W, l}, kRelu, w);
        for (std::size_t j = 1; j < c.size(); ++j) CHECK(c[j] > c[j - 1]);
      }
    }
  }
}

TEST_CASE("recursion rejects configurations outside the certified regime") {
  // growth constant 0.5 and width 2 gives L * W = 1.
  CHECK_THROWS_AS(recursion_constants({1, 2, 1}, Activation::scaled_tanh(0.5), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(recursion_constants({1, 1, 1}, kRelu, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(recursion_constants(kSmall, kRelu, -0.5),
                  std::invalid_argument);
}

TEST_CASE("closed form bound matches hand evaluation and caps the recursion") {
  CHECK(closed_form_bound(kSmall, kRelu, 1.0) == 36.0);
  CHECK(closed_form_bound(kSmall, kRelu, 0.0) == 18.0);
  CHECK(recursion_constants(kSmall, kRelu, 1.0).back() < 36.0);
  CHECK(recursion_constants(kSmall, kRelu, 0.0).back() < 18.0);
}

TEST_CASE("closed form strictly dominates the recursion across a grid") {
  for (int d : {1, 2}) {
    for (int W : {2, 4, 8}) {
      for (int l : {1, 2, 3, 4}) {
        for (double w : {0.0, 1.0, 2.0}) {
          const Architecture arch{d, W, l};
          CHECK(recursion_constants(arch, kRelu, w).back() <
                closed_form_bound(arch, kRelu, w));
          CHECK(recursion_constants_log2(arch, kRelu, w).back() <
                closed_form_bound_log2(arch, kRelu, w));
        }
      }
    }
  }
}

TEST_CASE("log2 recursion agrees with the linear recursion where both are finite") {
  const Architecture arch{2, 4, 4};
  const auto lin = recursion_constants(arch, kRelu, 1.5);
  const auto log2v = recursion_constants_log2(arch, kRelu, 1.5);
  for (std::size_t j = 0; j < lin.size(); ++j)
    CHECK(std::log2(lin[j]) == doctest::Approx(log2v[j]).epsilon(1e-12));
}

TEST_CASE("log2 recursion survives depth 1000") {
  const Architecture arch{1, 4, 1000};
  const auto lin = recursion_constants(arch, kRelu, 1.0);
  CHECK(std::isinf(lin.back()));  // saturates in linear scale
  const auto log2v = recursion_constants_log2(arch, kRelu, 1.0);
  CHECK(std::isfinite(log2v.back()));
  CHECK(log2v.back() > 1000.0);
  CHECK(log2v.back() < closed_form_bound_log2(arch, kRelu, 1.0));
}

TEST_CASE("log2 of the closed form doubles when the depth doubles") {
  const double at_512 = closed_form_bound_log2({1, 4, 512}, kRelu, 1.0);
  const double at_1024 = closed_form_bound_log2({1, 4, 1024}, kRelu, 1.0);
  CHECK(at_1024 / at_512 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("layer magnitude bounds match hand evaluation") {
  const auto bounds = layer_magnitude_bounds(kSmall, kRelu, 1.0);
  REQUIRE(bounds.size() == 1);
  CHECK(bounds[0] == 6.0);

  const auto deeper = layer_magnitude_bounds({1, 2, 4}, kRelu, 1.0);
  for (std::size_t j = 1; j < deeper.size(); ++j)
    CHECK(deeper[j] > deeper[j - 1]);
}

TEST_CASE("the |x| network's hidden layer stays within the magnitude bound") {
  const Eigen::VectorXd y = abs_network_params();
  const Eigen::MatrixXd pts = Grid{1, 1024}.points();
  const Eigen::VectorXd maxima = hidden_layer_maxima(kSmall, kRelu, y, pts);
  REQUIRE(maxima.size() == 1);
  CHECK(maxima[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(maxima[0] <= layer_magnitude_bounds(kSmall, kRelu, 1.0)[0]);
}

TEST_CASE("random networks respect the layer magnitude bounds") {
  std::mt19937_64 gen(9001);
  for (int trial = 0; trial < 25; ++trial) {
    const Architecture arch{1, 3, 3};
    const double w = 1.0 + uniform_unit(gen);
    Eigen::VectorXd y(param_count(arch));
    for (long i = 0; i < y.size(); ++i) y[i] = uniform_in(gen, -w, w);
    const Eigen::MatrixXd pts = Grid{1, 256}.points();
    for (const auto& act : {Activation::relu(), Activation::clip()}) {
      const Eigen::VectorXd maxima = hidden_layer_maxima(arch, act, y, pts);
      const auto bounds = layer_magnitude_bounds(arch, act, w);
      for (int j = 0; j < arch.depth; ++j) CHECK(maxima[j] <= bounds[j]);
    }
  }
}

TEST_CASE("phi exponent matches hand evaluation") {
  CHECK(phi_exponent({1, 2, 1}, 1.0, 1.0) == doctest::Approx(2.0));
  CHECK(phi_exponent({1, 2, 3}, 1.0, 1.0) == doctest::Approx(6.0));
  std::string warning;
  CHECK(phi_exponent({1, 2, 1}, 1.0, 0.0, &warning) == 0.0);
  CHECK(!warning.empty());
  CHECK_THROWS_AS(phi_exponent({1, 1, 1}, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("report assembles all certified quantities") {
  const LipschitzReport report = make_lipschitz_report(kSmall, kRelu, 1.0);
  CHECK(report.C == std::vector<double>{2.0, 21.0});
  CHECK(report.closed_form == 36.0);
  CHECK(report.layer_bounds == std::vector<double>{6.0});
  CHECK(report.phi == doctest::Approx(2.0));
  CHECK(report.n == 7);
  CHECK_THROWS_AS(make_lipschitz_report(kSmall, kRelu, 1.0, 0.0),
                  std::invalid_argument);

  const nlohmann::json j = report.to_json();
  CHECK(j["arch"]["W"] == 2);
  CHECK(j["C"][1] == 21.0);
  CHECK(j["closed_form"] == 36.0);
  CHECK(j["c_convention"] == 1.0);
}

TEST_CASE("a hand-built perturbation pair attains ratio 1") {
  const Eigen::VectorXd a = abs_network_params();
  Eigen::VectorXd b = a;
  const double delta = 0.25;
  b[4] = 1.0 + delta;
  const double sup = sup_distance(kSmall, kRelu, a, b, Grid{1, 1024});
  const double ratio = sup / (a - b).cwiseAbs().maxCoeff();
  CHECK(ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ratio <= recursion_constants(kSmall, kRelu, 1.0).back());
}

TEST_CASE("empirical ratios stay below the certificate on small configs") {
  for (const auto& act : {Activation::relu(), Activation::clip()}) {
    for (int W : {2, 4}) {
      for (int l : {1, 2}) {
        const Architecture arch{1, W, l};
        const auto emp =
            empirical_lipschitz(arch, act, 1.0, Grid{1, 256}, 500, 7);
        CHECK_FALSE(emp.no_valid_pairs);
        CHECK(emp.max_ratio > 0.0);
        CHECK(emp.max_ratio <= recursion_constants(arch, act, 1.0).back());
      }
    }
  }
}

TEST_CASE("empirical search is deterministic and thread-count independent") {
  const auto a = empirical_lipschitz(kSmall, kRelu, 1.0, Grid{1, 128}, 301, 99, 1);
  const auto b = empirical_lipschitz(kSmall, kRelu, 1.0, Grid{1, 128}, 301, 99, 4);
  CHECK(a.max_ratio == b.max_ratio);
  CHECK(a.argmax_a == b.argmax_a);
  CHECK(a.argmax_b == b.argmax_b);
  CHECK(a.pairs_used == b.pairs_used);
}

TEST_CASE("a zero-width box yields only degenerate pairs") {
  const auto emp = empirical_lipschitz(kSmall, kRelu, 0.0, Grid{1, 64}, 50, 3);
  CHECK(emp.no_valid_pairs);
  CHECK(emp.max_ratio == 0.0);
  CHECK(emp.pairs_used == 0);
  CHECK(emp.pairs_skipped == 50);
}

TEST_CASE("verification passes on certified configurations") {
  const LipschitzReport report = make_lipschitz_report(kSmall, kRelu, 1.0);
  const VerifyResult result = verify_lipschitz(report, Grid{1, 512}, 2000, 11);
  CHECK(result.pass);
  CHECK(result.certificate == 21.0);
  CHECK(result.margin > 1.0);
}

TEST_CASE("verification flags a corrupted certificate") {
  LipschitzReport report = make_lipschitz_report(kSmall, kRelu, 1.0);
  report.C.back() /= 1e6;
  const VerifyResult result = verify_lipschitz(report, Grid{1, 512}, 1000, 11);
  CHECK_FALSE(result.pass);
  CHECK(result.margin < 1.0);
  // The violating pair is reproducible.
  const double sup = sup_distance(kSmall, kRelu, result.empirical.argmax_a,
                                  result.empirical.argmax_b, Grid{1, 512});
  const double dist =
      (result.empirical.argmax_a - result.empirical.argmax_b).cwiseAbs().maxCoeff();
  CHECK(sup / dist == doctest::Approx(result.empirical.max_ratio));
  CHECK(sup / dist > report.C.back());
}

TEST_CASE("verification requires at least one pair") {
  const LipschitzReport report = make_lipschitz_report(kSmall, kRelu, 1.0);
  CHECK_THROWS_AS(verify_lipschitz(report, Grid{1, 64}, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("mixed coordinate activations keep the same certificate") {
  const Activation mixed =
      Activation::mixed({Activation::relu(), Activation::clip()});
  const Architecture arch{1, 4, 2};
  const auto emp = empirical_lipschitz(arch, mixed, 1.0, Grid{1, 256}, 2000, 5);
  CHECK(emp.max_ratio <= recursion_constants(arch, mixed, 1.0).back());
}

TEST_CASE("fitted envelope constants bracket log2 of the certificate") {
  double c1 = std::numeric_limits<double>::infinity();
  double c2 = 0.0;
  for (int W : {2, 4, 8}) {
    for (int l : {1, 2, 3, 4}) {
      for (double w : {1.0, 2.0}) {
        const Architecture arch{1, W, l};
        const double scale = l * std::log2(W * (w + 1.0));
        const double value = recursion_constants_log2(arch, kRelu, w).back() / scale;
        c1 = std::min(c1, value);
        c2 = std::max(c2, value);
      }
    }
  }
  CHECK(c1 > 0.0);
  CHECK(c2 < 10.0);
  for (int W : {2, 4, 8}) {
    for (int l : {1, 2, 3, 4}) {
      for (double w : {1.0, 2.0}) {
        const Architecture arch{1, W, l};
        const double scale = l * std::log2(W * (w + 1.0));
        const double log_c = recursion_constants_log2(arch, kRelu, w).back();
        CHECK(log_c >= c1 * scale - 1e-9);
        CHECK(log_c <= c2 * scale + 1e-9);
      }
    }
  }
}
