#ifndef TRAJSHIELD_NEURAL_HPP
#define TRAJSHIELD_NEURAL_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace trajshield {

// Fixed-topology fully connected net: affine-ReLU-affine-ReLU-affine, with an
// optional tanh on the output for bounded actions. Weights are row-major
// (out x in).
struct Mlp {
  enum class Output { Identity, Tanh };

  std::vector<int> dims;  // exactly {in, h1, h2, out}
  Output output = Output::Identity;
  std::array<std::vector<double>, 3> w;
  std::array<std::vector<double>, 3> b;
};

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], deterministic per seed.
Mlp mlp_init(const std::vector<int>& dims, std::uint64_t seed,
             Mlp::Output output = Mlp::Output::Identity);

std::size_t param_count(const Mlp& net);

std::vector<double> forward(const Mlp& net, std::span<const double> x);

struct MlpGrads {
  std::array<std::vector<double>, 3> w;
  std::array<std::vector<double>, 3> b;

  void zero();
};

MlpGrads make_grads(const Mlp& net);

// Activations needed to backpropagate one input.
struct ForwardCache {
  std::vector<double> x;
  std::array<std::vector<double>, 2> pre;   // hidden pre-activations
  std::array<std::vector<double>, 2> post;  // hidden post-ReLU
  std::vector<double> y;                    // output (after tanh if any)
};

ForwardCache forward_cached(const Mlp& net, std::span<const double> x);

// Accumulates parameter gradients for dL/dy and returns dL/dx.
std::vector<double> backward(const Mlp& net, const ForwardCache& cache,
                             std::span<const double> dy, MlpGrads& grads);

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimState {
  AdamConfig cfg;
  std::int64_t step = 0;
  MlpGrads m;
  MlpGrads v;

  static OptimState make(const Mlp& net, AdamConfig cfg = {});
};

void apply_adam(Mlp& net, OptimState& opt, const MlpGrads& grads);

struct TrainPair {
  std::vector<double> input;
  std::vector<double> target;
};

// Mean squared error over the batch (mean over batch and output dims),
// one backprop + Adam update. Returns the pre-update loss; throws if the
// loss is non-finite (divergence signal).
double train_step(Mlp& net, OptimState& opt, std::span<const TrainPair> batch);

// JSON checkpoint; exact round trip for finite parameters.
void save_mlp(const std::string& path, const Mlp& net);
Mlp load_mlp(const std::string& path);

}  // namespace trajshield

#endif  // TRAJSHIELD_NEURAL_HPP
