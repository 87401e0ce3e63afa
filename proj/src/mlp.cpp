#include "inrflow/mlp.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace inrflow {

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

namespace {

inline double softplus(double z, double beta) {
  double bz = beta * z;
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(bz))) / beta;
}

inline double softplus_deriv(double z, double beta) {
  double bz = beta * z;
  if (bz > 40.0) return 1.0;
  if (bz < -40.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-bz));
}

}  // namespace

Mlp::Mlp(int input_dim, std::vector<int> widths, int skip_index, double softplus_beta)
    : input_dim_(input_dim), widths_(std::move(widths)), skip_index_(skip_index),
      beta_(softplus_beta) {
  if (input_dim_ != 2 && input_dim_ != 3)
    throw Error(ErrorCode::InvalidArgument, "Mlp: input dim must be 2 or 3");
  if (widths_.empty() || widths_.back() != 1)
    throw Error(ErrorCode::InvalidArgument, "Mlp: last layer width must be 1");
  if (skip_index_ <= 0 || skip_index_ >= int(widths_.size()))
    throw Error(ErrorCode::InvalidArgument, "Mlp: skip index out of range");
  build_layout();
}

Mlp Mlp::make_default(int input_dim, int hidden_layers, int width) {
  std::vector<int> widths(hidden_layers, width);
  widths.push_back(1);
  return Mlp(input_dim, widths, hidden_layers / 2);
}

void Mlp::build_layout() {
  const int L = int(widths_.size());
  in_.resize(L);
  w_off_.resize(L);
  b_off_.resize(L);
  std::size_t off = 0;
  for (int i = 0; i < L; ++i) {
    in_[i] = (i == 0) ? input_dim_ : widths_[i - 1];
    if (i == skip_index_) in_[i] += input_dim_;
    w_off_[i] = off;
    off += std::size_t(widths_[i]) * in_[i];
    b_off_[i] = off;
    off += widths_[i];
  }
  theta_.assign(off, 0.0);
}

void Mlp::init_geometric(std::uint64_t seed, double sphere_radius) {
  Rng rng(seed);
  const int L = int(widths_.size());
  for (int i = 0; i < L; ++i) {
    double* W = theta_.data() + w_off_[i];
    double* b = theta_.data() + b_off_[i];
    if (i + 1 < L) {
      double sigma = std::sqrt(2.0 / in_[i]);
      for (int k = 0; k < widths_[i] * in_[i]; ++k) W[k] = sigma * rng.normal();
      for (int k = 0; k < widths_[i]; ++k) b[k] = 0.0;
    } else {
      // Final layer biased toward a sphere of the requested radius.
      double mu = std::sqrt(M_PI / in_[i]);
      for (int k = 0; k < in_[i]; ++k) W[k] = mu + 0.25 * mu * rng.normal();
      b[0] = -sphere_radius;
    }
  }
}

double Mlp::forward(const Vec3& x) const {
  thread_local std::vector<double> buf_a, buf_b;
  const int L = int(widths_.size());
  int max_w = input_dim_;
  for (int i = 0; i < L; ++i) max_w = std::max(max_w, in_[i]);
  buf_a.resize(max_w);
  buf_b.resize(max_w);

  double* cur = buf_a.data();
  double* nxt = buf_b.data();
  for (int a = 0; a < input_dim_; ++a) cur[a] = x[a];

  for (int i = 0; i < L; ++i) {
    int nin = in_[i], nout = widths_[i];
    if (i == skip_index_) {
      // append the raw input after the activations already in cur
      for (int a = 0; a < input_dim_; ++a) cur[nin - input_dim_ + a] = x[a];
    }
    const double* W = theta_.data() + w_off_[i];
    const double* b = theta_.data() + b_off_[i];
    for (int r = 0; r < nout; ++r) {
      const double* row = W + std::size_t(r) * nin;
      double acc = b[r];
      for (int c = 0; c < nin; ++c) acc += row[c] * cur[c];
      nxt[r] = (i + 1 < L) ? softplus(acc, beta_) : acc;
    }
    std::swap(cur, nxt);
  }
  return cur[0];
}

double Mlp::forward_trace(const Vec3& x, Trace& trace) const {
  const int L = int(widths_.size());
  trace.inputs.resize(L);
  trace.pre.resize(L);

  std::vector<double> act(std::size_t(input_dim_), 0.0);
  for (int a = 0; a < input_dim_; ++a) act[std::size_t(a)] = x[a];

  for (int i = 0; i < L; ++i) {
    int nin = in_[i], nout = widths_[i];
    std::vector<double>& input = trace.inputs[i];
    input.assign(std::size_t(nin), 0.0);
    std::copy(act.begin(), act.end(), input.begin());
    if (i == skip_index_)
      for (int a = 0; a < input_dim_; ++a) input[nin - input_dim_ + a] = x[a];

    std::vector<double>& pre = trace.pre[i];
    pre.assign(std::size_t(nout), 0.0);
    const double* W = theta_.data() + w_off_[i];
    const double* b = theta_.data() + b_off_[i];
    for (int r = 0; r < nout; ++r) {
      const double* row = W + std::size_t(r) * nin;
      double acc = b[r];
      for (int c = 0; c < nin; ++c) acc += row[c] * input[c];
      pre[r] = acc;
    }
    act.assign(std::size_t(nout), 0.0);
    for (int r = 0; r < nout; ++r)
      act[r] = (i + 1 < L) ? softplus(pre[r], beta_) : pre[r];
  }
  return trace.pre[L - 1][0];
}

void Mlp::backward(const Trace& trace, double upstream, std::vector<double>& grad) const {
  const int L = int(widths_.size());
  if (grad.size() != theta_.size()) grad.assign(theta_.size(), 0.0);

  std::vector<double> delta{upstream};  // dL/d(pre-activation) of current layer
  for (int i = L - 1; i >= 0; --i) {
    int nin = in_[i], nout = widths_[i];
    const std::vector<double>& input = trace.inputs[i];
    const double* W = theta_.data() + w_off_[i];
    double* gW = grad.data() + w_off_[i];
    double* gb = grad.data() + b_off_[i];

    std::vector<double> dinput(std::size_t(nin), 0.0);
    for (int r = 0; r < nout; ++r) {
      double d = delta[r];
      gb[r] += d;
      const double* row = W + std::size_t(r) * nin;
      double* grow = gW + std::size_t(r) * nin;
      for (int c = 0; c < nin; ++c) {
        grow[c] += d * input[c];
        dinput[c] += d * row[c];
      }
    }
    if (i == 0) break;
    // Drop the skip copy of x; no parameters upstream of it.
    int carry = (i == skip_index_) ? nin - input_dim_ : nin;
    delta.assign(std::size_t(carry), 0.0);
    const std::vector<double>& prev_pre = trace.pre[i - 1];
    for (int c = 0; c < carry; ++c)
      delta[c] = dinput[c] * softplus_deriv(prev_pre[c], beta_);
  }
}

// Model layout: "INR1" | u32 input_dim | u32 n_layers | u32 widths[n] |
// u32 skip_index | u32 activation_id | f64 sharpness | per layer f64 weights
// (row-major) then f64 biases.
void Mlp::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write model: " + path);
  out.write("INR1", 4);
  auto u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  u32(std::uint32_t(input_dim_));
  u32(std::uint32_t(widths_.size()));
  for (int w : widths_) u32(std::uint32_t(w));
  u32(std::uint32_t(skip_index_));
  u32(0);  // activation id: softplus
  out.write(reinterpret_cast<const char*>(&beta_), 8);
  const int L = int(widths_.size());
  for (int i = 0; i < L; ++i) {
    out.write(reinterpret_cast<const char*>(theta_.data() + w_off_[i]),
              std::streamsize(std::size_t(widths_[i]) * in_[i] * 8));
    out.write(reinterpret_cast<const char*>(theta_.data() + b_off_[i]),
              std::streamsize(std::size_t(widths_[i]) * 8));
  }
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

Mlp Mlp::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open model: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "INR1", 4) != 0)
    throw Error(ErrorCode::Format, "not an INR1 model: " + path);
  auto u32 = [&]() {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), 4))
      throw Error(ErrorCode::Format, "truncated model: " + path);
    return v;
  };
  std::uint32_t dim = u32();
  std::uint32_t nl = u32();
  if (nl == 0 || nl > 64) throw Error(ErrorCode::Format, "bad layer count: " + path);
  std::vector<int> widths(nl);
  for (auto& w : widths) w = int(u32());
  std::uint32_t skip = u32();
  std::uint32_t act = u32();
  if (act != 0) throw Error(ErrorCode::Format, "unknown activation id");
  double beta = 0.0;
  if (!in.read(reinterpret_cast<char*>(&beta), 8))
    throw Error(ErrorCode::Format, "truncated model: " + path);

  Mlp net(int(dim), widths, int(skip), beta);
  const int L = int(widths.size());
  for (int i = 0; i < L; ++i) {
    if (!in.read(reinterpret_cast<char*>(net.theta_.data() + net.w_off_[i]),
                 std::streamsize(std::size_t(widths[i]) * net.in_[i] * 8)) ||
        !in.read(reinterpret_cast<char*>(net.theta_.data() + net.b_off_[i]),
                 std::streamsize(std::size_t(widths[i]) * 8)))
      throw Error(ErrorCode::Format, "truncated model payload: " + path);
  }
  return net;
}

}  // namespace inrflow
