#include "zspad/finemap.hpp"

#include <algorithm>
#include <cmath>

#include "zspad/pgm_io.hpp"
#include "zspad/preprocess.hpp"

namespace zspad {

Tensor layer_map(const Tensor& fmap, int out_h, int out_w) {
  if (fmap.c < 1 || fmap.h < 1 || fmap.w < 1)
    throw ArgumentError("layer_map: empty activation stack");
  if (out_h <= 0 || out_w <= 0) throw ArgumentError("layer_map: bad output dimensions");

  // Channel mean first, then one resize; bilinear resize is linear in the
  // pixel values so this matches per-channel resizing.
  Tensor mean(1, fmap.h, fmap.w);
  const double inv_c = 1.0 / double(fmap.c);
  for (int c = 0; c < fmap.c; ++c) {
    const double* plane = fmap.plane(c);
    for (size_t i = 0; i < mean.v.size(); ++i) mean.v[i] += plane[i];
  }
  for (double& v : mean.v) v *= inv_c;

  Tensor out(1, out_h, out_w);
  resize_plane(mean.v.data(), mean.h, mean.w, out.v.data(), out_h, out_w);
  return out;
}

SaliencyMap fine_map(const FeatureMapSet& fs, int out_h, int out_w) {
  if (fs.empty()) throw ArgumentError("fine_map: empty feature map set");

  SaliencyMap map;
  map.height = out_h;
  map.width = out_w;
  map.values.assign(size_t(out_h) * size_t(out_w), 0.0);

  const double inv_i = 1.0 / double(fs.size());
  for (const Tensor& fmap : fs) {
    const Tensor lm = layer_map(fmap, out_h, out_w);
    for (size_t i = 0; i < map.values.size(); ++i) map.values[i] += lm.v[i];
  }
  for (double& v : map.values) v *= inv_i;

  const auto [lo_it, hi_it] = std::minmax_element(map.values.begin(), map.values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi - lo > 1e-12)) {
    // Constant map: fall back to all ones so the refined error reduces to
    // the raw error.
    std::fill(map.values.begin(), map.values.end(), 1.0);
    return map;
  }
  const double inv_range = 1.0 / (hi - lo);
  for (double& v : map.values) v = (v - lo) * inv_range;
  return map;
}

double refined_error(const BScan& x, const BScan& xhat, const SaliencyMap& map) {
  if (x.width != xhat.width || x.height != xhat.height || x.width != map.width ||
      x.height != map.height)
    throw ArgumentError("refined_error: dimension mismatch");
  double sum2 = 0.0;
  for (size_t i = 0; i < x.pixels.size(); ++i) {
    const double d = map.values[i] * xhat.pixels[i] - map.values[i] * x.pixels[i];
    sum2 += d * d;
  }
  return std::sqrt(sum2) / double(x.pixel_count());
}

void save_saliency_pgm(const SaliencyMap& map, const std::filesystem::path& path) {
  BScan b = make_bscan(map.height, map.width);
  b.pixels = map.values;
  save_bscan(b, path, 8);
}

}  // namespace zspad
