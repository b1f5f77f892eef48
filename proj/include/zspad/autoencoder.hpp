#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "zspad/bscan.hpp"
#include "zspad/tensor.hpp"

namespace zspad {

struct AEConfig {
  int input_height = 64;
  int input_width = 192;
  int encoder_blocks = 5;
  int decoder_blocks = 6;
  int base_channels = 4;
  std::vector<int> atrous_rates{1, 2, 5};
  int kernel = 3;
  double leaky_slope = 0.2;
  // Desk-scale defaults: much smaller init scales starve the 5-block
  // encoder of signal, and learning rates orders of magnitude lower cannot
  // move the loss within a few hundred Adam steps. Both stay configurable.
  double init_std = 0.1;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  int epochs = 20;
  int batch_size = 2;
  uint64_t seed = 7;
};

void validate(const AEConfig& cfg);  // throws ConfigError

// Encoder: residual atrous blocks, each closed by a stride-2 convolution.
// Decoder: bilinear x2 upsample + convolution per block, squashed to (0,1)
// on the last layer.
// Weight tensors are float32 (checkpoints are bit-exact); math runs in double.
struct AutoencoderModel {
  AEConfig config;
  std::vector<std::vector<float>> weights;  // declaration order: per conv, W then b
  bool trained = false;
};

AutoencoderModel build_model(const AEConfig& cfg);

// One activation stack per decoder block, in forward order; the last entry
// is the reconstruction itself.
using FeatureMapSet = std::vector<Tensor>;

struct Reconstruction {
  BScan output;
  FeatureMapSet feature_maps;
};

// Forward pass; usable on an untrained model (shape / determinism checks).
Reconstruction forward(const AutoencoderModel& model, const BScan& x);

// Same as forward but requires model.trained.
Reconstruction reconstruct(const AutoencoderModel& model, const BScan& x);

// ||xhat - x||_2 / pixel count.
double raw_error(const BScan& x, const BScan& xhat);

// Per-parameter-tensor gradients of raw_error(x, forward(x)) together with
// the loss value. This is the training backward pass; exposed so the
// finite-difference gradient check can probe it directly.
struct LossGradients {
  double loss = 0.0;
  std::vector<std::vector<double>> grads;  // same shape as model.weights
};
LossGradients loss_gradients(const AutoencoderModel& model, const BScan& x);

struct TrainOptions {
  int threads = 1;  // per-batch sample parallelism; results are thread-count independent
  std::function<void(int epoch, double mean_loss)> on_epoch;
};

// Adam on the mean reconstruction error over all B-scans of the (bonafide
// only) model set. Deterministic for a fixed seed and data order.
void train(AutoencoderModel& model, std::span<const ScanVolume> model_set,
           const TrainOptions& opts = {});

void save_model(const AutoencoderModel& model, const std::filesystem::path& path);
AutoencoderModel load_model(const std::filesystem::path& path);

}  // namespace zspad
