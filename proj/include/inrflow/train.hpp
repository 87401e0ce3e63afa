#pragma once

#include "inrflow/mlp.hpp"
#include "inrflow/sampling.hpp"

namespace inrflow {

enum class LossKind { Igr, L2Clamped, L1Clamped, L2Smooth };

struct TrainConfig {
  // Loss shape
  double delta = 0.001;    // clamp half-width and narrowband sampling width
  double omega = 0.01;     // eikonal/normal window: terms active where |s| < omega
  double lambda_g = 0.1;   // eikonal weight
  double tau = 1.0;        // normal-similarity weight
  LossKind loss = LossKind::Igr;
  double alpha = 2.0;      // free parameter of the smooth-L2 ablation loss

  // Optimization
  std::size_t batch = 128;
  std::size_t steps = 2000;
  double lr = 1e-3;
  double lr_min = 1e-5;
  std::uint64_t seed = 1;

  // Hybrid sampling mix (counts per pool)
  std::size_t n_surface = 2800;
  std::size_t n_narrowband = 3200;
  std::size_t n_uniform = 9000;
  std::size_t val_size = 2048;      // held-out narrowband points
  std::size_t checkpoint_every = 100;

  // Network
  int hidden_layers = 4;
  int width = 64;
  int skip_index = 2;
  double softplus_beta = 100.0;
  double init_radius = 0.5;

  void validate() const;
};

struct TrainSample {
  Vec3 x;
  double s = 0.0;
  Vec3 normal;
  bool has_normal = false;
};

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;          // dLoss/dtheta
  std::size_t skipped_normals = 0;   // normal terms dropped for tiny gradients
};

// Batch loss: mean over samples of the clamped data term plus, where
// |s| < omega, the eikonal and normal terms. grad f_theta is taken by central
// differences (step h); backpropagation through every stencil evaluation is
// exact in theta.
LossResult loss_and_gradient(const Mlp& net, const std::vector<TrainSample>& batch,
                             const TrainConfig& cfg, double h);

struct TrainResult {
  Mlp net;  // best checkpoint by validation NMSE
  std::vector<double> step_loss;
  std::vector<std::pair<std::size_t, double>> val_history;  // (step, best-so-far NMSE)
  std::size_t skipped_normals = 0;
};

// Hybrid sampling + minibatch first-order optimization (Adam, cosine-decayed
// step size). Deterministic for a fixed config and seed.
TrainResult train(const SdfOracle& oracle, const Box& domain, const TrainConfig& cfg);

}  // namespace inrflow
