#include "zspad/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace zspad {

void validate(const PreprocessConfig& cfg) {
  if (cfg.target_height <= 0 || cfg.target_width <= 0)
    throw ConfigError("preprocess target dimensions must be positive");
  if (cfg.nlm_template <= 0 || cfg.nlm_template % 2 == 0)
    throw ConfigError("nlm_template must be odd and positive");
  if (cfg.nlm_search <= 0 || cfg.nlm_search % 2 == 0)
    throw ConfigError("nlm_search must be odd and positive");
  if (cfg.nlm_template > cfg.nlm_search)
    throw ConfigError("nlm_template must not exceed nlm_search");
  if (!(cfg.nlm_filter_strength > 0.0))
    throw ConfigError("nlm_filter_strength must be positive");
}

void resize_plane(const double* src, int src_h, int src_w,
                  double* dst, int dst_h, int dst_w) {
  const double sy = double(src_h) / double(dst_h);
  const double sx = double(src_w) / double(dst_w);
  for (int y = 0; y < dst_h; ++y) {
    double fy = (double(y) + 0.5) * sy - 0.5;
    if (fy < 0.0) fy = 0.0;
    if (fy > double(src_h - 1)) fy = double(src_h - 1);
    const int y0 = int(fy);
    const int y1 = std::min(y0 + 1, src_h - 1);
    const double wy = fy - double(y0);
    for (int x = 0; x < dst_w; ++x) {
      double fx = (double(x) + 0.5) * sx - 0.5;
      if (fx < 0.0) fx = 0.0;
      if (fx > double(src_w - 1)) fx = double(src_w - 1);
      const int x0 = int(fx);
      const int x1 = std::min(x0 + 1, src_w - 1);
      const double wx = fx - double(x0);
      const double top = src[y0 * src_w + x0] * (1.0 - wx) + src[y0 * src_w + x1] * wx;
      const double bot = src[y1 * src_w + x0] * (1.0 - wx) + src[y1 * src_w + x1] * wx;
      dst[y * dst_w + x] = top * (1.0 - wy) + bot * wy;
    }
  }
}

void resize_plane_backward(const double* grad_dst, int dst_h, int dst_w,
                           double* grad_src, int src_h, int src_w) {
  const double sy = double(src_h) / double(dst_h);
  const double sx = double(src_w) / double(dst_w);
  for (int y = 0; y < dst_h; ++y) {
    double fy = (double(y) + 0.5) * sy - 0.5;
    if (fy < 0.0) fy = 0.0;
    if (fy > double(src_h - 1)) fy = double(src_h - 1);
    const int y0 = int(fy);
    const int y1 = std::min(y0 + 1, src_h - 1);
    const double wy = fy - double(y0);
    for (int x = 0; x < dst_w; ++x) {
      double fx = (double(x) + 0.5) * sx - 0.5;
      if (fx < 0.0) fx = 0.0;
      if (fx > double(src_w - 1)) fx = double(src_w - 1);
      const int x0 = int(fx);
      const int x1 = std::min(x0 + 1, src_w - 1);
      const double wx = fx - double(x0);
      const double g = grad_dst[y * dst_w + x];
      grad_src[y0 * src_w + x0] += g * (1.0 - wy) * (1.0 - wx);
      grad_src[y0 * src_w + x1] += g * (1.0 - wy) * wx;
      grad_src[y1 * src_w + x0] += g * wy * (1.0 - wx);
      grad_src[y1 * src_w + x1] += g * wy * wx;
    }
  }
}

BScan resize_bilinear(const BScan& img, int out_h, int out_w) {
  validate(img);
  if (out_h <= 0 || out_w <= 0) throw ArgumentError("resize target dimensions must be positive");
  BScan out = make_bscan(out_h, out_w);
  out.scan_id = img.scan_id;
  out.index = img.index;
  resize_plane(img.pixels.data(), img.height, img.width, out.pixels.data(), out_h, out_w);
  return out;
}

BScan nlm_denoise(const BScan& img, const PreprocessConfig& cfg) {
  validate(cfg);
  validate(img);
  const int h = img.height, w = img.width;
  if (h < cfg.nlm_template || w < cfg.nlm_template)
    throw ArgumentError("image smaller than the NLM template window");

  const int tr = cfg.nlm_template / 2;
  const int sr = cfg.nlm_search / 2;
  const double h_eff = cfg.nlm_filter_strength / 255.0;
  const double inv_h2 = 1.0 / (h_eff * h_eff);
  const double sigma_noise = 0.0;
  const double two_sigma2 = 2.0 * sigma_noise * sigma_noise;
  const double patch_px = double(cfg.nlm_template) * double(cfg.nlm_template);

  // Expanded (clamp-padded) grid: row r maps to image row r - tr.
  const int eh = h + 2 * tr, ew = w + 2 * tr;
  std::vector<double> diff2(size_t(eh) * size_t(ew));
  std::vector<double> integ(size_t(eh + 1) * size_t(ew + 1), 0.0);
  std::vector<double> acc(img.pixels.size(), 0.0), wsum(img.pixels.size(), 0.0);

  auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };

  for (int dy = -sr; dy <= sr; ++dy) {
    for (int dx = -sr; dx <= sr; ++dx) {
      for (int r = 0; r < eh; ++r) {
        const int ya = clampi(r - tr, h - 1);
        const int yb = clampi(r - tr + dy, h - 1);
        double* row = diff2.data() + size_t(r) * ew;
        for (int c = 0; c < ew; ++c) {
          const int xa = clampi(c - tr, w - 1);
          const int xb = clampi(c - tr + dx, w - 1);
          const double d = img.at(ya, xa) - img.at(yb, xb);
          row[c] = d * d;
        }
      }
      // Summed-area table over diff2; box sums give the patch SSDs.
      for (int r = 0; r < eh; ++r) {
        const double* row = diff2.data() + size_t(r) * ew;
        double* cur = integ.data() + size_t(r + 1) * (ew + 1);
        const double* prev = integ.data() + size_t(r) * (ew + 1);
        double rowsum = 0.0;
        for (int c = 0; c < ew; ++c) {
          rowsum += row[c];
          cur[c + 1] = prev[c + 1] + rowsum;
        }
      }

      // Only search positions that land inside the image contribute.
      const int y_lo = std::max(0, -dy), y_hi = std::min(h - 1, h - 1 - dy);
      const int x_lo = std::max(0, -dx), x_hi = std::min(w - 1, w - 1 - dx);
      for (int y = y_lo; y <= y_hi; ++y) {
        const double* i0 = integ.data() + size_t(y) * (ew + 1);
        const double* i1 = integ.data() + size_t(y + 2 * tr + 1) * (ew + 1);
        for (int x = x_lo; x <= x_hi; ++x) {
          const double ssd = i1[x + 2 * tr + 1] - i1[x] - i0[x + 2 * tr + 1] + i0[x];
          const double d2 = ssd / patch_px;
          const double e = d2 - two_sigma2;
          const double wgt = std::exp(-(e > 0.0 ? e : 0.0) * inv_h2);
          const size_t p = size_t(y) * w + size_t(x);
          acc[p] += wgt * (img.at(y + dy, x + dx) - img.pixels[p]);
          wsum[p] += wgt;
        }
      }
    }
  }

  BScan out = make_bscan(h, w);
  out.scan_id = img.scan_id;
  out.index = img.index;
  for (size_t p = 0; p < out.pixels.size(); ++p) {
    double v = img.pixels[p] + acc[p] / wsum[p];
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    out.pixels[p] = v;
  }
  return out;
}

ScanVolume preprocess_volume(const ScanVolume& v, const PreprocessConfig& cfg) {
  validate(cfg);
  validate(v);
  ScanVolume out;
  out.scan_id = v.scan_id;
  out.label = v.label;
  out.bscans.reserve(v.bscans.size());
  for (const BScan& b : v.bscans) {
    BScan resized = resize_bilinear(b, cfg.target_height, cfg.target_width);
    out.bscans.push_back(cfg.denoise_enabled ? nlm_denoise(resized, cfg) : std::move(resized));
  }
  return out;
}

}  // namespace zspad
