#pragma once

#include <string>
#include <vector>

#include "inrflow/implicit_field.hpp"

namespace inrflow {

// Fully connected scalar field network with one skip-in connection: the input
// point is concatenated to the activations entering layer `skip_index`.
// Parameters live in one flat vector so the optimizer and the finite
// difference checks can treat the network as f(theta, x).
class Mlp {
public:
  // widths = output size of every linear layer; the last entry must be 1.
  Mlp(int input_dim, std::vector<int> widths, int skip_index, double softplus_beta = 100.0);
  Mlp() = default;

  static Mlp make_default(int input_dim, int hidden_layers = 4, int width = 64);

  int input_dim() const { return input_dim_; }
  int layer_count() const { return int(widths_.size()); }
  int layer_in(int i) const { return in_[i]; }
  int layer_out(int i) const { return widths_[i]; }
  int skip_index() const { return skip_index_; }
  double softplus_beta() const { return beta_; }

  std::vector<double>& theta() { return theta_; }
  const std::vector<double>& theta() const { return theta_; }
  std::size_t weight_offset(int layer) const { return w_off_[layer]; }
  std::size_t bias_offset(int layer) const { return b_off_[layer]; }

  // Scaled-normal init with a final-layer bias so that the initial field is an
  // approximate sphere of the given radius (keeps the zero level set alive).
  void init_geometric(std::uint64_t seed, double sphere_radius);

  double forward(const Vec3& x) const;

  // Forward pass that records activations for backpropagation.
  struct Trace {
    std::vector<std::vector<double>> inputs;  // input vector of each layer
    std::vector<std::vector<double>> pre;     // pre-activation of each layer
  };
  double forward_trace(const Vec3& x, Trace& trace) const;

  // Accumulates dL/dtheta into grad given dL/d(output); call after
  // forward_trace with the same trace.
  void backward(const Trace& trace, double upstream, std::vector<double>& grad) const;

  void save(const std::string& path) const;
  static Mlp load(const std::string& path);

  bool operator==(const Mlp& o) const {
    return input_dim_ == o.input_dim_ && widths_ == o.widths_ &&
           skip_index_ == o.skip_index_ && beta_ == o.beta_ && theta_ == o.theta_;
  }

private:
  void build_layout();

  int input_dim_ = 0;
  std::vector<int> widths_;
  int skip_index_ = -1;
  double beta_ = 100.0;

  std::vector<int> in_;
  std::vector<std::size_t> w_off_, b_off_;
  std::vector<double> theta_;
};

// Adapts a trained network to the shared implicit-field interface.
class MlpField : public ImplicitField {
public:
  explicit MlpField(Mlp net, double char_length = 2.0)
      : net_(std::move(net)), char_length_(char_length) {}

  int dim() const override { return net_.input_dim(); }
  double eval(const Vec3& x) const override { return net_.forward(x); }
  double char_length() const override { return char_length_; }
  const Mlp& net() const { return net_; }

private:
  Mlp net_;
  double char_length_;
};

}  // namespace inrflow
