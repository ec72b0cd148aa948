#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nnlb {

// Feed-forward layout on [0,1]^input_dim: an affine map into `width` units,
// `depth` hidden layers in total, and an affine map to a scalar output.
struct Architecture {
  int input_dim = 1;
  int width = 1;
  int depth = 1;

  void validate() const;  // throws std::invalid_argument
  bool operator==(const Architecture&) const = default;
};

// Exact number of weights and biases:
//   (input_dim + 1) * width + (depth - 1) * width * (width + 1) + width + 1.
long param_count(const Architecture& arch);

// Scalar activation applied coordinatewise to hidden layers. Carries declared
// constants: lipschitz() is the slope bound L', value_at_zero() is f(0), and
// growth_constant() = max(L', |f(0)|) bounds both the slope and the output
// growth, |f(t)| <= growth_constant() * (|t| + 1).
//
// mixed() builds an activation whose coordinates cycle through different
// scalar functions; its constants are the maxima over the components.
class Activation {
 public:
  static Activation relu();
  static Activation leaky_relu(double negative_slope = 0.01);
  // clamp(t + 0.5, 0, 1): slope bound 1, value 0.5 at zero.
  static Activation clip();
  static Activation scaled_tanh(double scale = 1.0);
  static Activation custom(std::string name, std::function<double(double)> fn,
                           double lipschitz, double value_at_zero);
  static Activation mixed(std::vector<Activation> components);

  double operator()(double t, int coordinate = 0) const;
  // In-place coordinatewise application; rows are unit coordinates, columns
  // are batch entries.
  void apply(Eigen::Ref<Eigen::MatrixXd> z) const;

  const std::string& name() const { return name_; }
  double lipschitz() const;
  double value_at_zero() const;
  double growth_constant() const;
  bool is_mixed() const { return components_.size() > 1; }

 private:
  enum class Kind { Relu, LeakyRelu, Clip, ScaledTanh, Custom };
  struct Component {
    Kind kind = Kind::Relu;
    double param = 0.0;  // negative slope / tanh scale
    std::function<double(double)> fn;
    double lipschitz = 1.0;
    double value_at_zero = 0.0;
    double eval(double t) const;
  };
  void apply_rows(Eigen::Ref<Eigen::MatrixXd> z, const Component& c, int row0,
                  int stride) const;

  std::string name_;
  std::vector<Component> components_;
};

// One affine layer, y = weight * x + bias.
struct AffineMap {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};
using AffineStack = std::vector<AffineMap>;

// Flat parameter list in canonical order with its box bound: every entry of
// the vector must satisfy |y_i| <= bound.
struct ParamVector {
  Eigen::VectorXd values;
  double bound = 0.0;
};

// Throws if the length does not match param_count(arch) or an entry leaves
// the box.
void validate_params(const ParamVector& params, const Architecture& arch);

// Canonical order: layers front to back; within a layer the weight matrix in
// row-major order, then the bias entries.
AffineStack unpack(const Eigen::VectorXd& values, const Architecture& arch);
// Reuses preallocated matrices in `stack` (shapes fixed by arch).
void unpack_into(const Eigen::VectorXd& values, const Architecture& arch,
                 AffineStack& stack);
Eigen::VectorXd pack(const AffineStack& stack);

// Uniform lattice over [0,1]^dim with per_axis points per axis (spacing
// 1/(per_axis-1)); point_count() = per_axis^dim.
struct Grid {
  int dim = 1;
  int per_axis = 2;

  void validate() const;
  long point_count() const;
  // dim x point_count matrix, one point per column.
  Eigen::MatrixXd points() const;
  // Default resolutions: 1024 points for dim 1, 64 per axis for dim 2,
  // 16 per axis for dim 3.
  static Grid standard(int dim);
};

// Scratch buffers for repeated grid evaluation of networks with the same
// architecture and grid size.
struct ForwardWorkspace {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::RowVectorXd out;
};

double forward(const Architecture& arch, const Activation& act,
               const Eigen::VectorXd& params, const Eigen::VectorXd& x);

// Network output at every column of pts (dim x P). The returned reference
// points into the workspace.
const Eigen::RowVectorXd& forward_grid(const AffineStack& stack,
                                       const Activation& act,
                                       const Eigen::MatrixXd& pts,
                                       ForwardWorkspace& ws);
Eigen::RowVectorXd forward_grid(const Architecture& arch, const Activation& act,
                                const Eigen::VectorXd& params,
                                const Eigen::MatrixXd& pts);

// Maximum |value| per hidden layer (after the activation), over all unit
// coordinates and all grid points. Entry j corresponds to hidden layer j.
Eigen::VectorXd hidden_layer_maxima(const Architecture& arch,
                                    const Activation& act,
                                    const Eigen::VectorXd& params,
                                    const Eigen::MatrixXd& pts);

// Grid estimate of the uniform distance between the two network outputs;
// never exceeds the true sup-norm distance.
double sup_distance(const Architecture& arch, const Activation& act,
                    const Eigen::VectorXd& params1,
                    const Eigen::VectorXd& params2, const Grid& grid);
double sup_distance(const AffineStack& s1, const AffineStack& s2,
                    const Activation& act, const Eigen::MatrixXd& pts,
                    ForwardWorkspace& ws1, ForwardWorkspace& ws2);

// Zero-padding embedding into a wider architecture with identical outputs:
// new units get zero incoming weights, zero bias and zero outgoing weights,
// so their constant output never reaches the next layer. The box bound is
// preserved.
ParamVector embed_wider(const ParamVector& params, const Architecture& arch,
                        int wider_width);

}  // namespace nnlb
