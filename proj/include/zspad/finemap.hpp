#pragma once

#include <filesystem>

#include "zspad/autoencoder.hpp"
#include "zspad/bscan.hpp"
#include "zspad/tensor.hpp"

namespace zspad {

// Fine-grained saliency map; dimensions match the associated B-scan and
// values lie in [0,1] (max value is 1 unless the degenerate constant case
// collapsed the map to all ones).
struct SaliencyMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double at(int y, int x) const { return values[size_t(y) * size_t(width) + size_t(x)]; }
};

// Channel mean of one decoder layer's activations, bilinearly resized to
// (out_h, out_w). Returned as a single-channel tensor (not yet normalized).
Tensor layer_map(const Tensor& fmap, int out_h, int out_w);

// Mean of the per-layer maps over all decoder layers, then min-max
// normalized to [0,1]. A constant mean map (range <= 1e-12) becomes all
// ones so the refined error falls back to the raw error.
SaliencyMap fine_map(const FeatureMapSet& fs, int out_h, int out_w);

// ||xhat.map - x.map||_2 / pixel count (Hadamard-weighted raw error).
double refined_error(const BScan& x, const BScan& xhat, const SaliencyMap& map);

// Inspection export (8-bit PGM).
void save_saliency_pgm(const SaliencyMap& map, const std::filesystem::path& path);

}  // namespace zspad
