#pragma once

#include "zspad/bscan.hpp"

namespace zspad {

struct PreprocessConfig {
  int target_height = 256;
  int target_width = 768;
  double nlm_filter_strength = 19.0;  // on the 8-bit scale; h = strength/255 for [0,1] data
  int nlm_template = 7;
  int nlm_search = 21;
  bool denoise_enabled = true;
};

void validate(const PreprocessConfig& cfg);  // throws ConfigError

// Bilinear resize, half-pixel centers, edge clamping. Identity (bit-exact)
// when the target equals the source dimensions.
BScan resize_bilinear(const BScan& img, int out_h, int out_w);

// Resizes one image plane; shared by preprocess, the decoder upsampling and
// the saliency maps so all stages use the same sampler.
void resize_plane(const double* src, int src_h, int src_w,
                  double* dst, int dst_h, int dst_w);

// Transpose of resize_plane: accumulates dst-side gradients into grad_src.
void resize_plane_backward(const double* grad_dst, int dst_h, int dst_w,
                           double* grad_src, int src_h, int src_w);

// Non-Local Means. Pixel weights are exp(-max(d^2 - 2*sigma^2, 0)/h^2) with
// the patch distance d^2 averaged over the template window and patches
// clamped at the borders. sigma is 0 here; h = nlm_filter_strength/255.
BScan nlm_denoise(const BScan& img, const PreprocessConfig& cfg);

// Resize then (optionally) denoise every member B-scan.
ScanVolume preprocess_volume(const ScanVolume& v, const PreprocessConfig& cfg);

}  // namespace zspad
