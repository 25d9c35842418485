#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ngmkl/dataset.hpp"
#include "ngmkl/kernels.hpp"

namespace ngmkl {

/// Scaled hyperbolic tangent f(x) = 1.7159 tanh(2x/3), or identity.
enum class Activation { scaled_tanh, linear };

inline constexpr double kScaledTanhGain = 1.7159;
inline constexpr double kScaledTanhSlope = 2.0 / 3.0;

double scaled_tanh(double x);
double scaled_tanh_prime(double x);
double activate(Activation a, double x);
double activate_prime(Activation a, double x);

/// The kernelized network: one projection vector gamma_j per input kernel
/// (each acting on the kernel representation K_x^j over the training
/// anchors), a stack of dense layers on the concatenated projections, and an
/// affine output read out by a softmax. No bias terms anywhere.
struct KernelNetwork {
    std::vector<KernelSpec> kernels;   // selected input kernels, bank order
    std::vector<int> kernel_indices;   // positions in the original bank
    Matrix anchors;                    // training features, n x d
    Matrix gammas;                     // S x n, row j projects K_x^j
    std::vector<Matrix> hidden_layers; // first n1 x S, then n_i x n_{i-1}
    Matrix output_weights;             // C x n_last
    Activation kernel_activation = Activation::scaled_tanh;
    Activation hidden_activation = Activation::scaled_tanh;

    std::size_t kernel_count() const { return kernels.size(); }
    std::size_t anchor_count() const { return anchors.rows(); }
    std::size_t class_count() const { return output_weights.rows(); }
};

/// Intermediates of one forward pass, as needed by backward().
struct ForwardCache {
    Matrix kernel_rows;                       // S x n, row j = K_x^j
    std::vector<double> z1_pre, z1;           // S
    std::vector<std::vector<double>> hidden_pre, hidden;  // per dense layer
    std::vector<double> logits;               // C
};

/// Loss gradients with the same shapes as the model weights.
struct Gradients {
    Matrix gammas;
    std::vector<Matrix> hidden_layers;
    Matrix output_weights;
};

/// Numerically stable softmax (max-subtracted).
std::vector<double> softmax(std::span<const double> logits);

/// Cross-entropy -z_k + log sum_j exp(z_j), via max-subtracted log-sum-exp.
double cross_entropy(std::span<const double> logits, std::size_t target);

/// kernel_rows must hold K_x^j against the model's anchors, one row per
/// selected kernel in model order.
std::pair<std::vector<double>, ForwardCache> forward(const KernelNetwork& model,
                                                     const Matrix& kernel_rows);

/// Reverse-mode gradients of cross_entropy(forward(...), target) with respect
/// to every weight.
Gradients backward(const KernelNetwork& model, const ForwardCache& cache,
                   std::size_t target);

/// w <- w - lr * (g + weight_decay * w) on every parameter.
void sgd_step(KernelNetwork& model, const Gradients& grads, double lr,
              double weight_decay);

struct TrainConfig {
    std::size_t batch_size = 40;
    double learning_rate = 0.01;
    double weight_decay = 5e-6;
    std::size_t epochs = 200;
    std::size_t hidden_width = 64;
    std::uint64_t seed = 0;
};

struct EpochStats {
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
};

struct TrainResult {
    KernelNetwork model;
    std::vector<EpochStats> curve;
};

/// Fresh model with uniform(-sqrt(3/fan_in), +sqrt(3/fan_in)) weights drawn
/// from SplitMix64(config.seed) in a fixed order (gammas, hidden, output).
KernelNetwork init_network(const Dataset& train, const std::vector<KernelSpec>& kernels,
                           const std::vector<int>& kernel_indices,
                           const TrainConfig& config);

/// Minibatch SGD on shuffled epochs; batch gradient is the mean over the
/// batch and the final short batch is used as-is. Deterministic for a fixed
/// seed.
TrainResult train(const Dataset& train_data, const std::vector<KernelSpec>& kernels,
                  const std::vector<int>& kernel_indices, const TrainConfig& config);

/// Argmax-of-logits labels for feature rows (kernel rows are computed against
/// the stored anchors). Ties resolve to the lowest class index.
std::vector<int> predict(const KernelNetwork& model, const Matrix& features);

/// Decision values logit[0] - logit[1] for binary models.
std::vector<double> binary_decision(const KernelNetwork& model, const Matrix& features);

/// Versioned little-endian binary model file; bit-exact round-trip. Anchors
/// are not embedded (only their count); supply them again on load.
void save_network(const KernelNetwork& model, const std::string& path);
KernelNetwork load_network(const std::string& path, Matrix anchors);

std::string training_curve_csv(std::span<const EpochStats> curve);

}  // namespace ngmkl
