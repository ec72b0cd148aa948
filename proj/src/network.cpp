#include "nnlb/network.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace nnlb {

void Architecture::validate() const {
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  if (width < 1) throw std::invalid_argument("width must be >= 1");
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
}

long param_count(const Architecture& arch) {
  arch.validate();
  const long d = arch.input_dim, W = arch.width, ell = arch.depth;
  return (d + 1) * W + (ell - 1) * W * (W + 1) + W + 1;
}

double Activation::Component::eval(double t) const {
  switch (kind) {
    case Kind::Relu:
      return t > 0.0 ? t : 0.0;
    case Kind::LeakyRelu:
      return t > 0.0 ? t : param * t;
    case Kind::Clip: {
      const double v = t + 0.5;
      return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    case Kind::ScaledTanh:
      return param * std::tanh(t);
    case Kind::Custom:
      return fn(t);
  }
  return 0.0;
}

Activation Activation::relu() {
  Activation a;
  a.name_ = "relu";
  a.components_.push_back({Kind::Relu, 0.0, nullptr, 1.0, 0.0});
  return a;
}

Activation Activation::leaky_relu(double negative_slope) {
  if (negative_slope < 0.0 || negative_slope > 1.0)
    throw std::invalid_argument("leaky_relu slope must be in [0, 1]");
  Activation a;
  a.name_ = "leaky_relu";
  a.components_.push_back({Kind::LeakyRelu, negative_slope, nullptr, 1.0, 0.0});
  return a;
}

Activation Activation::clip() {
  Activation a;
  a.name_ = "clip";
  a.components_.push_back({Kind::Clip, 0.0, nullptr, 1.0, 0.5});
  return a;
}

Activation Activation::scaled_tanh(double scale) {
  if (scale <= 0.0) throw std::invalid_argument("scaled_tanh scale must be > 0");
  Activation a;
  a.name_ = "scaled_tanh";
  a.components_.push_back({Kind::ScaledTanh, scale, nullptr, scale, 0.0});
  return a;
}

Activation Activation::custom(std::string name, std::function<double(double)> fn,
                              double lipschitz, double value_at_zero) {
  if (!fn) throw std::invalid_argument("custom activation requires a function");
  if (lipschitz <= 0.0)
    throw std::invalid_argument("custom activation requires lipschitz > 0");
  Activation a;
  a.name_ = std::move(name);
  a.components_.push_back(
      {Kind::Custom, 0.0, std::move(fn), lipschitz, value_at_zero});
  return a;
}

Activation Activation::mixed(std::vector<Activation> components) {
  if (components.empty())
    throw std::invalid_argument("mixed activation requires components");
  Activation a;
  a.name_ = "mixed";
  for (auto& c : components) {
    a.name_ += ":" + c.name_;
    for (auto& comp : c.components_) a.components_.push_back(comp);
  }
  return a;
}

double Activation::operator()(double t, int coordinate) const {
  const auto& c =
      components_[static_cast<std::size_t>(coordinate) % components_.size()];
  return c.eval(t);
}

double Activation::lipschitz() const {
  double m = 0.0;
  for (const auto& c : components_) m = std::max(m, c.lipschitz);
  return m;
}

double Activation::value_at_zero() const {
  double m = 0.0;
  for (const auto& c : components_)
    if (std::abs(c.value_at_zero) > std::abs(m)) m = c.value_at_zero;
  return m;
}

double Activation::growth_constant() const {
  double m = 0.0;
  for (const auto& c : components_)
    m = std::max(m, std::max(c.lipschitz, std::abs(c.value_at_zero)));
  return m;
}

void Activation::apply_rows(Eigen::Ref<Eigen::MatrixXd> z, const Component& c,
                            int row0, int stride) const {
  for (int r = row0; r < z.rows(); r += stride) {
    auto row = z.row(r).array();
    switch (c.kind) {
      case Kind::Relu:
        row = row.max(0.0);
        break;
      case Kind::LeakyRelu:
        row = row.max(c.param * row);
        break;
      case Kind::Clip:
        row = (row + 0.5).max(0.0).min(1.0);
        break;
      case Kind::ScaledTanh:
        row = c.param * row.tanh();
        break;
      case Kind::Custom:
        row = row.unaryExpr(c.fn);
        break;
    }
  }
}

void Activation::apply(Eigen::Ref<Eigen::MatrixXd> z) const {
  if (components_.size() == 1) {
    auto a = z.array();
    const Component& c = components_.front();
    switch (c.kind) {
      case Kind::Relu:
        a = a.max(0.0);
        return;
      case Kind::LeakyRelu:
        a = a.max(c.param * a);
        return;
      case Kind::Clip:
        a = (a + 0.5).max(0.0).min(1.0);
        return;
      case Kind::ScaledTanh:
        a = c.param * a.tanh();
        return;
      case Kind::Custom:
        a = a.unaryExpr(c.fn);
        return;
    }
  }
  const int k = static_cast<int>(components_.size());
  for (int i = 0; i < k; ++i) apply_rows(z, components_[i], i, k);
}

void validate_params(const ParamVector& params, const Architecture& arch) {
  const long n = param_count(arch);
  if (params.values.size() != n)
    throw std::invalid_argument("parameter vector has length " +
                                std::to_string(params.values.size()) +
                                ", architecture needs " + std::to_string(n));
  if (params.bound < 0.0) throw std::invalid_argument("box bound must be >= 0");
  const double maxabs =
      params.values.size() == 0 ? 0.0 : params.values.cwiseAbs().maxCoeff();
  if (maxabs > params.bound)
    throw std::invalid_argument("parameter entry " + std::to_string(maxabs) +
                                " exceeds box bound " +
                                std::to_string(params.bound));
}

namespace {

// Rows/cols of layer j's weight matrix.
std::pair<long, long> layer_shape(const Architecture& arch, int j) {
  if (j == 0) return {arch.width, arch.input_dim};
  if (j == arch.depth) return {1, arch.width};
  return {arch.width, arch.width};
}

}  // namespace

void unpack_into(const Eigen::VectorXd& values, const Architecture& arch,
                 AffineStack& stack) {
  if (values.size() != param_count(arch))
    throw std::invalid_argument("parameter vector length does not match architecture");
  stack.resize(arch.depth + 1);
  long pos = 0;
  for (int j = 0; j <= arch.depth; ++j) {
    const auto [rows, cols] = layer_shape(arch, j);
    auto& layer = stack[j];
    layer.weight.resize(rows, cols);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) layer.weight(r, c) = values[pos++];
    layer.bias.resize(rows);
    for (long r = 0; r < rows; ++r) layer.bias[r] = values[pos++];
  }
}

AffineStack unpack(const Eigen::VectorXd& values, const Architecture& arch) {
  AffineStack stack;
  unpack_into(values, arch, stack);
  return stack;
}

Eigen::VectorXd pack(const AffineStack& stack) {
  long total = 0;
  for (const auto& layer : stack)
    total += layer.weight.size() + layer.bias.size();
  Eigen::VectorXd values(total);
  long pos = 0;
  for (const auto& layer : stack) {
    for (long r = 0; r < layer.weight.rows(); ++r)
      for (long c = 0; c < layer.weight.cols(); ++c)
        values[pos++] = layer.weight(r, c);
    for (long r = 0; r < layer.bias.size(); ++r) values[pos++] = layer.bias[r];
  }
  return values;
}

void Grid::validate() const {
  if (dim < 1) throw std::invalid_argument("grid dim must be >= 1");
  if (per_axis < 2) throw std::invalid_argument("grid needs >= 2 points per axis");
  double count = std::pow(static_cast<double>(per_axis), dim);
  if (count > 4194304.0)
    throw std::invalid_argument("grid would have more than 2^22 points");
}

long Grid::point_count() const {
  validate();
  long count = 1;
  for (int i = 0; i < dim; ++i) count *= per_axis;
  return count;
}

Eigen::MatrixXd Grid::points() const {
  const long total = point_count();
  Eigen::MatrixXd pts(dim, total);
  const double spacing = 1.0 / (per_axis - 1);
  std::vector<int> odo(dim, 0);
  for (long p = 0; p < total; ++p) {
    for (int a = 0; a < dim; ++a) pts(a, p) = odo[a] * spacing;
    for (int a = dim - 1; a >= 0; --a) {
      if (++odo[a] < per_axis) break;
      odo[a] = 0;
    }
  }
  return pts;
}

Grid Grid::standard(int dim) {
  if (dim == 1) return {1, 1024};
  if (dim == 2) return {2, 64};
  return {dim, 16};
}

const Eigen::RowVectorXd& forward_grid(const AffineStack& stack,
                                       const Activation& act,
                                       const Eigen::MatrixXd& pts,
                                       ForwardWorkspace& ws) {
  const long P = pts.cols();
  const long W = stack.front().weight.rows();
  ws.a.resize(W, P);
  ws.a.noalias() = stack.front().weight * pts;
  ws.a.colwise() += stack.front().bias;
  act.apply(ws.a);
  const int depth = static_cast<int>(stack.size()) - 1;
  for (int j = 1; j < depth; ++j) {
    ws.b.resize(W, P);
    ws.b.noalias() = stack[j].weight * ws.a;
    ws.b.colwise() += stack[j].bias;
    act.apply(ws.b);
    ws.a.swap(ws.b);
  }
  ws.out.resize(P);
  ws.out.noalias() = stack.back().weight.row(0) * ws.a;
  ws.out.array() += stack.back().bias[0];
  return ws.out;
}

Eigen::RowVectorXd forward_grid(const Architecture& arch, const Activation& act,
                                const Eigen::VectorXd& params,
                                const Eigen::MatrixXd& pts) {
  if (pts.rows() != arch.input_dim)
    throw std::invalid_argument("points dimension does not match architecture");
  ForwardWorkspace ws;
  return forward_grid(unpack(params, arch), act, pts, ws);
}

double forward(const Architecture& arch, const Activation& act,
               const Eigen::VectorXd& params, const Eigen::VectorXd& x) {
  if (x.size() != arch.input_dim)
    throw std::invalid_argument("input dimension does not match architecture");
  return forward_grid(arch, act, params, x)(0);
}

Eigen::VectorXd hidden_layer_maxima(const Architecture& arch,
                                    const Activation& act,
                                    const Eigen::VectorXd& params,
                                    const Eigen::MatrixXd& pts) {
  if (pts.rows() != arch.input_dim)
    throw std::invalid_argument("points dimension does not match architecture");
  const AffineStack stack = unpack(params, arch);
  Eigen::VectorXd maxima(arch.depth);
  Eigen::MatrixXd z = stack.front().weight * pts;
  z.colwise() += stack.front().bias;
  act.apply(z);
  maxima[0] = z.cwiseAbs().maxCoeff();
  for (int j = 1; j < arch.depth; ++j) {
    Eigen::MatrixXd next = stack[j].weight * z;
    next.colwise() += stack[j].bias;
    act.apply(next);
    z.swap(next);
    maxima[j] = z.cwiseAbs().maxCoeff();
  }
  return maxima;
}

double sup_distance(const AffineStack& s1, const AffineStack& s2,
                    const Activation& act, const Eigen::MatrixXd& pts,
                    ForwardWorkspace& ws1, ForwardWorkspace& ws2) {
  const Eigen::RowVectorXd& out1 = forward_grid(s1, act, pts, ws1);
  const Eigen::RowVectorXd& out2 = forward_grid(s2, act, pts, ws2);
  return (out1 - out2).cwiseAbs().maxCoeff();
}

double sup_distance(const Architecture& arch, const Activation& act,
                    const Eigen::VectorXd& params1,
                    const Eigen::VectorXd& params2, const Grid& grid) {
  if (grid.dim != arch.input_dim)
    throw std::invalid_argument("grid dimension does not match architecture");
  const Eigen::MatrixXd pts = grid.points();
  ForwardWorkspace ws1, ws2;
  return sup_distance(unpack(params1, arch), unpack(params2, arch), act, pts,
                      ws1, ws2);
}

ParamVector embed_wider(const ParamVector& params, const Architecture& arch,
                        int wider_width) {
  validate_params(params, arch);
  if (wider_width <= arch.width)
    throw std::invalid_argument("embedding width must exceed current width");
  const AffineStack stack = unpack(params.values, arch);
  AffineStack wide(stack.size());
  const int Wp = wider_width;
  for (int j = 0; j < static_cast<int>(stack.size()); ++j) {
    const bool last = j == arch.depth;
    const long rows = last ? 1 : Wp;
    const long cols = j == 0 ? arch.input_dim : Wp;
    wide[j].weight = Eigen::MatrixXd::Zero(rows, cols);
    wide[j].bias = Eigen::VectorXd::Zero(rows);
    wide[j].weight.topLeftCorner(stack[j].weight.rows(), stack[j].weight.cols()) =
        stack[j].weight;
    wide[j].bias.head(stack[j].bias.size()) = stack[j].bias;
  }
  return ParamVector{pack(wide), params.bound};
}

}  // namespace nnlb
