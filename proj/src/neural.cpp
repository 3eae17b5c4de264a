#include "trajshield/neural.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace trajshield {

namespace {

void check_dims(const std::vector<int>& dims) {
  if (dims.size() != 4) throw std::invalid_argument("mlp dims must have exactly 4 entries");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("mlp dims must all be >= 1");
}

// y = W x + b, W row-major (rows x cols)
void affine(std::span<const double> w, std::span<const double> b, std::span<const double> x,
            std::vector<double>& y) {
  const std::size_t rows = b.size();
  const std::size_t cols = x.size();
  y.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w.data() + r * cols;
    double acc = b[r];
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

}  // namespace

Mlp mlp_init(const std::vector<int>& dims, std::uint64_t seed, Mlp::Output output) {
  check_dims(dims);
  Mlp net;
  net.dims = dims;
  net.output = output;
  std::mt19937_64 rng(seed);
  for (int l = 0; l < 3; ++l) {
    const std::size_t fan_in = static_cast<std::size_t>(dims[l]);
    const std::size_t fan_out = static_cast<std::size_t>(dims[l + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> uni(-bound, bound);
    net.w[l].resize(fan_out * fan_in);
    net.b[l].resize(fan_out);
    for (auto& v : net.w[l]) v = uni(rng);
    for (auto& v : net.b[l]) v = uni(rng);
  }
  return net;
}

std::size_t param_count(const Mlp& net) {
  std::size_t n = 0;
  for (int l = 0; l < 3; ++l) n += net.w[l].size() + net.b[l].size();
  return n;
}

std::vector<double> forward(const Mlp& net, std::span<const double> x) {
  return forward_cached(net, x).y;
}

ForwardCache forward_cached(const Mlp& net, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(net.dims[0]))
    throw std::invalid_argument("mlp forward: input dimension mismatch");
  ForwardCache c;
  c.x.assign(x.begin(), x.end());
  std::span<const double> in = c.x;
  for (int l = 0; l < 2; ++l) {
    affine(net.w[l], net.b[l], in, c.pre[l]);
    c.post[l] = c.pre[l];
    for (auto& v : c.post[l])
      if (v < 0.0) v = 0.0;
    in = c.post[l];
  }
  affine(net.w[2], net.b[2], in, c.y);
  if (net.output == Mlp::Output::Tanh)
    for (auto& v : c.y) v = std::tanh(v);
  return c;
}

void MlpGrads::zero() {
  for (auto& g : w) std::fill(g.begin(), g.end(), 0.0);
  for (auto& g : b) std::fill(g.begin(), g.end(), 0.0);
}

MlpGrads make_grads(const Mlp& net) {
  MlpGrads g;
  for (int l = 0; l < 3; ++l) {
    g.w[l].assign(net.w[l].size(), 0.0);
    g.b[l].assign(net.b[l].size(), 0.0);
  }
  return g;
}

std::vector<double> backward(const Mlp& net, const ForwardCache& cache,
                             std::span<const double> dy, MlpGrads& grads) {
  if (dy.size() != cache.y.size())
    throw std::invalid_argument("mlp backward: output gradient dimension mismatch");

  std::vector<double> delta(dy.begin(), dy.end());
  if (net.output == Mlp::Output::Tanh)
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= 1.0 - cache.y[i] * cache.y[i];

  std::vector<double> dprev;
  for (int l = 2; l >= 0; --l) {
    const std::span<const double> in = l == 0 ? std::span<const double>(cache.x)
                                              : std::span<const double>(cache.post[l - 1]);
    const std::size_t rows = delta.size();
    const std::size_t cols = in.size();
    for (std::size_t r = 0; r < rows; ++r) {
      double* gw = grads.w[l].data() + r * cols;
      const double d = delta[r];
      for (std::size_t c = 0; c < cols; ++c) gw[c] += d * in[c];
      grads.b[l][r] += d;
    }
    dprev.assign(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* wr = net.w[l].data() + r * cols;
      const double d = delta[r];
      for (std::size_t c = 0; c < cols; ++c) dprev[c] += wr[c] * d;
    }
    if (l > 0) {
      // ReLU gate; zero subgradient at the kink
      for (std::size_t c = 0; c < cols; ++c)
        if (cache.pre[l - 1][c] <= 0.0) dprev[c] = 0.0;
    }
    delta = dprev;
  }
  return delta;
}

OptimState OptimState::make(const Mlp& net, AdamConfig cfg) {
  OptimState s;
  s.cfg = cfg;
  s.m = make_grads(net);
  s.v = make_grads(net);
  return s;
}

void apply_adam(Mlp& net, OptimState& opt, const MlpGrads& grads) {
  ++opt.step;
  const double bc1 = 1.0 - std::pow(opt.cfg.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(opt.cfg.beta2, static_cast<double>(opt.step));
  auto update = [&](std::vector<double>& p, std::vector<double>& m, std::vector<double>& v,
                    const std::vector<double>& g) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = opt.cfg.beta1 * m[i] + (1.0 - opt.cfg.beta1) * g[i];
      v[i] = opt.cfg.beta2 * v[i] + (1.0 - opt.cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= opt.cfg.lr * mhat / (std::sqrt(vhat) + opt.cfg.eps);
    }
  };
  for (int l = 0; l < 3; ++l) {
    update(net.w[l], opt.m.w[l], opt.v.w[l], grads.w[l]);
    update(net.b[l], opt.m.b[l], opt.v.b[l], grads.b[l]);
  }
}

double train_step(Mlp& net, OptimState& opt, std::span<const TrainPair> batch) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  const std::size_t out_dim = static_cast<std::size_t>(net.dims[3]);
  MlpGrads grads = make_grads(net);
  const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(out_dim));
  double loss = 0.0;
  std::vector<double> dy(out_dim);
  for (const auto& pair : batch) {
    if (pair.target.size() != out_dim)
      throw std::invalid_argument("train_step: target dimension mismatch");
    ForwardCache cache = forward_cached(net, pair.input);
    for (std::size_t i = 0; i < out_dim; ++i) {
      const double err = cache.y[i] - pair.target[i];
      loss += err * err * scale;
      dy[i] = 2.0 * err * scale;
    }
    backward(net, cache, dy, grads);
  }
  if (!std::isfinite(loss)) throw std::runtime_error("train_step: non-finite loss (diverged)");
  apply_adam(net, opt, grads);
  return loss;
}

void save_mlp(const std::string& path, const Mlp& net) {
  nlohmann::ordered_json j;
  j["dims"] = net.dims;
  j["output"] = net.output == Mlp::Output::Tanh ? "tanh" : "identity";
  j["w"] = net.w;
  j["b"] = net.b;
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write checkpoint: " + path);
  file << j.dump() << '\n';
  if (!file) throw std::runtime_error("checkpoint write failed: " + path);
}

Mlp load_mlp(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::ordered_json j;
  try {
    file >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": malformed checkpoint: " + e.what());
  }
  Mlp net;
  net.dims = j.at("dims").get<std::vector<int>>();
  check_dims(net.dims);
  const std::string out = j.at("output").get<std::string>();
  if (out == "tanh")
    net.output = Mlp::Output::Tanh;
  else if (out == "identity")
    net.output = Mlp::Output::Identity;
  else
    throw std::runtime_error(path + ": unknown output activation '" + out + "'");
  auto w = j.at("w").get<std::array<std::vector<double>, 3>>();
  auto b = j.at("b").get<std::array<std::vector<double>, 3>>();
  for (int l = 0; l < 3; ++l) {
    const std::size_t rows = static_cast<std::size_t>(net.dims[l + 1]);
    const std::size_t cols = static_cast<std::size_t>(net.dims[l]);
    if (w[l].size() != rows * cols || b[l].size() != rows)
      throw std::runtime_error(path + ": checkpoint shape mismatch");
  }
  net.w = std::move(w);
  net.b = std::move(b);
  return net;
}

}  // namespace trajshield
