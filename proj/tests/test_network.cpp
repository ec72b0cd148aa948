#include <doctest.h>

#include <cmath>
#include <random>

#include "nnlb/network.hpp"
#include "nnlb/rng.hpp"

using namespace nnlb;

namespace {

// Independent count: walk the affine maps and sum matrix + bias entries.
long count_by_enumeration(const Architecture& arch) {
  long total = 0;
  for (int j = 0; j <= arch.depth; ++j) {
    const long rows = j == arch.depth ? 1 : arch.width;
    const long cols = j == 0 ? arch.input_dim : arch.width;
    total += rows * cols + rows;
  }
  return total;
}

Eigen::VectorXd random_params(const Architecture& arch, double w,
                              std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Eigen::VectorXd y(param_count(arch));
  for (long i = 0; i < y.size(); ++i) y[i] = uniform_in(gen, -w, w);
  return y;
}

// params of the network realizing |x| on [-1, 1]: relu(x) + relu(-x).
Eigen::VectorXd abs_network_params() {
  Eigen::VectorXd y(7);
  y << 1, -1, 0, 0, 1, 1, 0;
  return y;
}

constexpr Architecture kAbsArch{1, 2, 1};

// Product of layer operator bounds: slope constant times the max absolute
// row sum, per layer.
double input_lipschitz_bound(const Architecture& arch, const Activation& act,
                             const Eigen::VectorXd& params) {
  const AffineStack stack = unpack(params, arch);
  double k = 1.0;
  for (int j = 0; j <= arch.depth; ++j) {
    const double row_norm = stack[j].weight.cwiseAbs().rowwise().sum().maxCoeff();
    k *= j < arch.depth ? act.lipschitz() * row_norm : row_norm;
  }
  return k;
}

}  // namespace

TEST_CASE("param_count matches direct enumeration on anchors") {
  CHECK(param_count({1, 2, 1}) == 7);
  CHECK(param_count({2, 3, 2}) == 25);
  CHECK(param_count({1, 1, 1}) == 4);
  CHECK(count_by_enumeration({1, 2, 1}) == 7);
  CHECK(count_by_enumeration({2, 3, 2}) == 25);
  CHECK(count_by_enumeration({1, 1, 1}) == 4);
}

TEST_CASE("param_count equals enumeration and stays near width^2 * depth") {
  for (int d = 1; d <= 3; ++d) {
    for (int W = std::max(d, 2); W <= 16; ++W) {
      for (int l = 2; l <= 8; ++l) {
        const Architecture arch{d, W, l};
        const long n = param_count(arch);
        CHECK(n == count_by_enumeration(arch));
        const double ratio = static_cast<double>(n) / (double(W) * W * l);
        CHECK(ratio >= 0.5);
        CHECK(ratio <= 3.0);
      }
    }
  }
}

TEST_CASE("param_count rejects invalid architectures") {
  CHECK_THROWS_AS(param_count({0, 2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(param_count({1, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(param_count({1, 2, 0}), std::invalid_argument);
}

TEST_CASE("unpack lays out row-major weights then biases") {
  const AffineStack stack = unpack(abs_network_params(), kAbsArch);
  REQUIRE(stack.size() == 2);
  CHECK(stack[0].weight.rows() == 2);
  CHECK(stack[0].weight.cols() == 1);
  CHECK(stack[0].weight(0, 0) == 1.0);
  CHECK(stack[0].weight(1, 0) == -1.0);
  CHECK(stack[0].bias.isZero());
  CHECK(stack[1].weight.rows() == 1);
  CHECK(stack[1].weight(0, 0) == 1.0);
  CHECK(stack[1].weight(0, 1) == 1.0);
  CHECK(stack[1].bias(0) == 0.0);
}

TEST_CASE("unpack of zeros gives zero affine maps") {
  const Architecture arch{2, 3, 2};
  const AffineStack stack = unpack(Eigen::VectorXd::Zero(param_count(arch)), arch);
  for (const auto& layer : stack) {
    CHECK(layer.weight.isZero());
    CHECK(layer.bias.isZero());
  }
}

TEST_CASE("pack inverts unpack on random parameter vectors") {
  const Architecture arch{2, 4, 3};
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd y = random_params(arch, 2.0, 1000 + trial);
    CHECK(pack(unpack(y, arch)) == y);
  }
}

TEST_CASE("unpack rejects length mismatches") {
  CHECK_THROWS_AS(unpack(Eigen::VectorXd::Zero(6), kAbsArch),
                  std::invalid_argument);
}

TEST_CASE("forward of the zero network vanishes") {
  const Architecture arch{1, 3, 2};
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(param_count(arch));
  for (const auto& act :
       {Activation::relu(), Activation::clip(), Activation::scaled_tanh(2.0)}) {
    CHECK(forward(arch, act, zero, Eigen::VectorXd::Constant(1, 0.3)) == 0.0);
  }
}

TEST_CASE("forward reproduces |x| outside the unit interval") {
  const Activation relu = Activation::relu();
  const Eigen::VectorXd y = abs_network_params();
  CHECK(forward(kAbsArch, relu, y, Eigen::VectorXd::Constant(1, -0.5)) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(forward(kAbsArch, relu, y, Eigen::VectorXd::Constant(1, 0.75)) ==
        doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("forward composes relu(1) - 2 relu(0.5) to zero") {
  Eigen::VectorXd y(7);
  y << 1, 1, 0, -0.5, 1, -2, 0;
  CHECK(forward(kAbsArch, Activation::relu(), y,
                Eigen::VectorXd::Constant(1, 1.0)) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("forward is Lipschitz in x against the layer-norm product") {
  const Architecture arch{1, 4, 2};
  const Activation act = Activation::relu();
  const Grid grid{1, 257};
  const Eigen::MatrixXd pts = grid.points();
  const double spacing = 1.0 / (grid.per_axis - 1);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd y = random_params(arch, 1.5, 77 + trial);
    const double k = input_lipschitz_bound(arch, act, y);
    const Eigen::RowVectorXd out = forward_grid(arch, act, y, pts);
    for (long p = 0; p + 1 < pts.cols(); ++p) {
      CHECK(std::abs(out(p + 1) - out(p)) <= k * spacing + 1e-9);
    }
  }
}

TEST_CASE("sup_distance vanishes for identical parameters") {
  const Eigen::VectorXd y = abs_network_params();
  CHECK(sup_distance(kAbsArch, Activation::relu(), y, y, Grid{1, 1024}) == 0.0);
}

TEST_CASE("sup_distance resolves a 0.1 relu gap on [0,1]") {
  const Eigen::VectorXd y = abs_network_params();
  Eigen::VectorXd y2 = y;
  y2[4] = 1.1;  // first output weight
  CHECK(sup_distance(kAbsArch, Activation::relu(), y, y2, Grid{1, 1024}) ==
        doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("sup_distance is symmetric") {
  const Architecture arch{1, 3, 2};
  const Grid grid{1, 128};
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd a = random_params(arch, 1.0, 2000 + trial);
    const Eigen::VectorXd b = random_params(arch, 1.0, 3000 + trial);
    CHECK(sup_distance(arch, Activation::relu(), a, b, grid) ==
          sup_distance(arch, Activation::relu(), b, a, grid));
  }
}

TEST_CASE("embed_wider preserves outputs exactly") {
  const ParamVector params{abs_network_params(), 1.0};
  const Grid grid{1, 1024};
  for (const auto& act : {Activation::relu(), Activation::clip()}) {
    for (int wider : {3, 5, 8}) {
      const ParamVector wide = embed_wider(params, kAbsArch, wider);
      const Architecture wide_arch{1, wider, 1};
      validate_params(wide, wide_arch);
      const Eigen::MatrixXd pts = grid.points();
      const Eigen::RowVectorXd base =
          forward_grid(kAbsArch, act, params.values, pts);
      const Eigen::RowVectorXd embedded =
          forward_grid(wide_arch, act, wide.values, pts);
      CHECK((base - embedded).cwiseAbs().maxCoeff() == 0.0);
      CHECK(wide.values.cwiseAbs().maxCoeff() ==
            params.values.cwiseAbs().maxCoeff());
      CHECK(wide.bound == params.bound);
    }
  }
}

TEST_CASE("embed_wider over random deep networks keeps outputs together") {
  // Wider matrix products may regroup the same nonzero terms, so random
  // configurations are compared at machine precision rather than bit-exactly.
  const Architecture arch{2, 3, 3};
  const Grid grid{2, 17};
  const Eigen::MatrixXd pts = grid.points();
  for (int trial = 0; trial < 10; ++trial) {
    const ParamVector params{random_params(arch, 1.0, 500 + trial), 1.0};
    const ParamVector wide = embed_wider(params, arch, 6);
    const Architecture wide_arch{2, 6, 3};
    const Eigen::RowVectorXd base =
        forward_grid(arch, Activation::clip(), params.values, pts);
    const Eigen::RowVectorXd embedded =
        forward_grid(wide_arch, Activation::clip(), wide.values, pts);
    const double scale = std::max(1.0, base.cwiseAbs().maxCoeff());
    CHECK((base - embedded).cwiseAbs().maxCoeff() <= 8e-16 * scale);
  }
}

TEST_CASE("embed_wider rejects non-increasing widths") {
  const ParamVector params{abs_network_params(), 1.0};
  CHECK_THROWS_AS(embed_wider(params, kAbsArch, 2), std::invalid_argument);
  CHECK_THROWS_AS(embed_wider(params, kAbsArch, 1), std::invalid_argument);
}

TEST_CASE("validate_params enforces length and the box bound") {
  ParamVector params{abs_network_params(), 1.0};
  CHECK_NOTHROW(validate_params(params, kAbsArch));
  params.bound = 0.5;
  CHECK_THROWS_AS(validate_params(params, kAbsArch), std::invalid_argument);
  params.bound = 1.0;
  params.values.conservativeResize(6);
  CHECK_THROWS_AS(validate_params(params, kAbsArch), std::invalid_argument);
}

TEST_CASE("activations satisfy their declared slope bound on random pairs") {
  std::mt19937_64 gen(4242);
  for (const auto& act :
       {Activation::relu(), Activation::leaky_relu(0.2), Activation::clip(),
        Activation::scaled_tanh(1.7)}) {
    for (int trial = 0; trial < 200; ++trial) {
      const double t1 = uniform_in(gen, -5.0, 5.0);
      const double t2 = uniform_in(gen, -5.0, 5.0);
      CHECK(std::abs(act(t1) - act(t2)) <=
            act.lipschitz() * std::abs(t1 - t2) + 1e-12);
    }
  }
}

TEST_CASE("activation constants combine slope and value at zero") {
  CHECK(Activation::relu().growth_constant() == 1.0);
  CHECK(Activation::clip().value_at_zero() == 0.5);
  CHECK(Activation::clip().growth_constant() == 1.0);
  CHECK(Activation::scaled_tanh(2.5).growth_constant() == 2.5);
  const Activation custom = Activation::custom(
      "shifted", [](double t) { return t + 2.0; }, 1.0, 2.0);
  CHECK(custom.growth_constant() == 2.0);
}

TEST_CASE("mixed activation applies components per coordinate") {
  const Activation mixed =
      Activation::mixed({Activation::relu(), Activation::clip()});
  CHECK(mixed.growth_constant() == 1.0);
  Eigen::MatrixXd z(2, 1);
  z << -1.0, -0.2;
  mixed.apply(z);
  CHECK(z(0, 0) == 0.0);                            // relu row
  CHECK(z(1, 0) == doctest::Approx(0.3));           // clip row
  CHECK(mixed(-1.0, 0) == 0.0);
  CHECK(mixed(-0.2, 1) == doctest::Approx(0.3));
}

TEST_CASE("grid lattice has the documented spacing and count") {
  const Grid grid{2, 5};
  CHECK(grid.point_count() == 25);
  const Eigen::MatrixXd pts = grid.points();
  CHECK(pts(0, 0) == 0.0);
  CHECK(pts(1, 1) == doctest::Approx(0.25));
  CHECK(pts(0, 24) == 1.0);
  CHECK(pts(1, 24) == 1.0);
  CHECK_THROWS_AS((Grid{1, 1}.point_count()), std::invalid_argument);
}
