#include "inrflow/train.hpp"

#include <algorithm>

namespace inrflow {

void TrainConfig::validate() const {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "train: delta must be > 0");
  if (!(omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "train: omega must be > 0");
  if (lambda_g < 0.0 || tau < 0.0)
    throw Error(ErrorCode::InvalidArgument, "train: loss weights must be >= 0");
  if (n_surface + n_narrowband + n_uniform == 0)
    throw Error(ErrorCode::InvalidArgument, "train: sample mix total must be positive");
  if (batch == 0) throw Error(ErrorCode::InvalidArgument, "train: batch must be > 0");
}

static double clamp_to(double v, double d) { return std::min(d, std::max(-d, v)); }

LossResult loss_and_gradient(const Mlp& net, const std::vector<TrainSample>& batch,
                             const TrainConfig& cfg, double h) {
  if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "loss: empty batch");
  LossResult res;
  res.grad.assign(net.theta().size(), 0.0);

  const int dim = net.input_dim();
  Mlp::Trace trace0;
  std::array<Mlp::Trace, 6> stencil;  // +/- per axis

  double total = 0.0;
  for (const TrainSample& sample : batch) {
    double f0 = net.forward_trace(sample.x, trace0);

    // Data term.
    double up0 = 0.0;
    switch (cfg.loss) {
      case LossKind::Igr:
      case LossKind::L2Clamped: {
        double e = clamp_to(sample.s, cfg.delta) - clamp_to(f0, cfg.delta);
        total += e * e;
        if (std::abs(f0) < cfg.delta) up0 = -2.0 * e;
        break;
      }
      case LossKind::L1Clamped: {
        double e = clamp_to(sample.s, cfg.delta) - clamp_to(f0, cfg.delta);
        total += std::abs(e);
        if (std::abs(f0) < cfg.delta && e != 0.0) up0 = e > 0.0 ? -1.0 : 1.0;
        break;
      }
      case LossKind::L2Smooth: {
        double wgt = 1.0 + std::pow(cfg.alpha, std::abs(sample.s));
        double e = sample.s - f0;
        total += wgt * e * e;
        up0 = -2.0 * wgt * e;
        break;
      }
    }
    if (up0 != 0.0) net.backward(trace0, up0, res.grad);

    // Eikonal + normal terms inside the window.
    if (cfg.loss == LossKind::Igr && std::abs(sample.s) < cfg.omega &&
        (cfg.lambda_g > 0.0 || cfg.tau > 0.0)) {
      Vec3 g;
      for (int a = 0; a < dim; ++a) {
        Vec3 xp = sample.x, xm = sample.x;
        xp[a] += h;
        xm[a] -= h;
        double fp = net.forward_trace(xp, stencil[2 * a]);
        double fm = net.forward_trace(xm, stencil[2 * a + 1]);
        g[a] = (fp - fm) / (2.0 * h);
      }
      double gn = norm(g);
      Vec3 dg;  // dLoss/dg
      if (gn < 1e-12) {
        total += cfg.lambda_g;  // (0 - 1)^2; no usable direction for gradients
        if (sample.has_normal) res.skipped_normals++;
      } else {
        double eik = gn - 1.0;
        total += cfg.lambda_g * eik * eik;
        dg += g * (2.0 * cfg.lambda_g * eik / gn);
        if (cfg.tau > 0.0 && sample.has_normal) {
          if (gn < 1e-8) {
            res.skipped_normals++;
          } else {
            Vec3 u = g / gn;
            double c = dot(u, sample.normal);
            total += cfg.tau * (c - 1.0) * (c - 1.0);
            Vec3 dcos = (sample.normal - u * c) / gn;
            dg += dcos * (2.0 * cfg.tau * (c - 1.0));
          }
        }
        for (int a = 0; a < dim; ++a) {
          double w = dg[a] / (2.0 * h);
          if (w != 0.0) {
            net.backward(stencil[2 * a], w, res.grad);
            net.backward(stencil[2 * a + 1], -w, res.grad);
          }
        }
      }
    }
  }

  double inv = 1.0 / double(batch.size());
  res.loss = total * inv;
  for (double& gv : res.grad) gv *= inv;
  return res;
}

// ---------------------------------------------------------------------------
// Training pipeline
// ---------------------------------------------------------------------------

namespace {

struct Pools {
  std::vector<TrainSample> train;
  std::vector<TrainSample> validation;
};

Pools build_pools(const SdfOracle& oracle, const Box& domain, const TrainConfig& cfg) {
  Pools pools;
  pools.train.reserve(cfg.n_surface + cfg.n_narrowband + cfg.n_uniform);

  Rng surf_rng(cfg.seed ^ 0x51f00001ULL);
  for (std::size_t i = 0; i < cfg.n_surface; ++i) {
    SurfaceSample s = oracle.sample_surface_point(surf_rng);
    pools.train.push_back({s.x, 0.0, s.normal, true});
  }

  auto narrowband = [&](std::size_t n, std::uint64_t seed, std::vector<TrainSample>& out) {
    Rng rng(seed);
    std::size_t attempts = 0, accepted = 0;
    while (accepted < n) {
      attempts++;
      SurfaceSample s = oracle.sample_surface_point(rng);
      double t = rng.uniform(-cfg.delta, cfg.delta);
      Vec3 x = s.x + s.normal * t;
      double sd = oracle.signed_distance(x);
      if (std::abs(sd) <= cfg.delta) {
        out.push_back({x, sd, s.normal, true});
        accepted++;
      }
      if (attempts >= 200 && accepted * 10 < attempts)
        throw Error(ErrorCode::InvalidArgument,
                    "train: narrowband rejection rate above 90%");
    }
  };
  narrowband(cfg.n_narrowband, cfg.seed ^ 0xba9d0002ULL, pools.train);

  Rng uni_rng(cfg.seed ^ 0x00f00003ULL);
  for (std::size_t i = 0; i < cfg.n_uniform; ++i) {
    Vec3 x = uni_rng.point_in_box(domain, oracle.dim());
    pools.train.push_back({x, oracle.signed_distance(x), Vec3{}, false});
  }

  narrowband(cfg.val_size, cfg.seed ^ 0x7a11da7eULL, pools.validation);
  return pools;
}

double validation_nmse(const Mlp& net, const std::vector<TrainSample>& val, double delta_char) {
  if (val.empty()) return 0.0;
  double acc = 0.0;
  for (const TrainSample& v : val) {
    double e = v.s - net.forward(v.x);
    acc += e * e;
  }
  return acc / double(val.size()) / delta_char;
}

}  // namespace

TrainResult train(const SdfOracle& oracle, const Box& domain, const TrainConfig& cfg) {
  cfg.validate();
  const int dim = oracle.dim();
  const double delta_char = domain.max_edge(dim);
  const double h = 1e-4 * delta_char;

  Pools pools = build_pools(oracle, domain, cfg);

  std::vector<int> hidden(std::size_t(cfg.hidden_layers), cfg.width);
  hidden.push_back(1);
  Mlp net(dim, hidden, cfg.skip_index, cfg.softplus_beta);
  net.init_geometric(cfg.seed ^ 0x11117777ULL, cfg.init_radius);

  TrainResult result;
  result.net = net;
  double best_val = validation_nmse(net, pools.validation, delta_char);
  result.val_history.push_back({0, best_val});
  if (cfg.steps == 0) return result;

  // Adam with cosine-decayed step size.
  std::vector<double> m(net.theta().size(), 0.0), v(net.theta().size(), 0.0);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;

  Rng shuffle_rng(cfg.seed ^ 0x5aff1e00ULL);
  std::vector<std::size_t> order(pools.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t cursor = order.size();  // force an initial shuffle

  std::vector<TrainSample> batch;
  double initial_loss = -1.0;
  int high_loss_streak = 0;

  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    batch.clear();
    for (std::size_t k = 0; k < cfg.batch; ++k) {
      if (cursor >= order.size()) {
        // Fisher-Yates reshuffle per epoch.
        for (std::size_t i = order.size(); i > 1; --i)
          std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
        cursor = 0;
      }
      batch.push_back(pools.train[order[cursor++]]);
    }

    LossResult lr_res = loss_and_gradient(net, batch, cfg, h);
    result.skipped_normals += lr_res.skipped_normals;
    result.step_loss.push_back(lr_res.loss);

    if (initial_loss < 0.0) initial_loss = std::max(lr_res.loss, 1e-300);
    if (lr_res.loss > 1e3 * initial_loss) {
      if (++high_loss_streak >= 100)
        throw Error(ErrorCode::TrainingDiverged,
                    "training diverged at step " + std::to_string(step));
    } else {
      high_loss_streak = 0;
    }

    double progress = double(step - 1) / double(cfg.steps);
    double lr_t = cfg.lr_min + 0.5 * (cfg.lr - cfg.lr_min) * (1.0 + std::cos(M_PI * progress));
    double bc1 = 1.0 - std::pow(b1, double(step));
    double bc2 = 1.0 - std::pow(b2, double(step));
    std::vector<double>& theta = net.theta();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      double g = lr_res.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      theta[i] -= lr_t * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }

    if (step % cfg.checkpoint_every == 0 || step == cfg.steps) {
      double val = validation_nmse(net, pools.validation, delta_char);
      if (val < best_val) {
        best_val = val;
        result.net = net;
      }
      result.val_history.push_back({step, best_val});
    }
  }
  return result;
}

}  // namespace inrflow
