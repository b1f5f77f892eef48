// Test-only reference implementations. These stay deliberately naive and
// independent of the library code paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "zspad/bscan.hpp"
#include "zspad/preprocess.hpp"
#include "zspad/tensor.hpp"

namespace oracle {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Quadruple-loop NLM: for every pixel, walk the search window, compute the
// template-window SSD with clamped indexing, accumulate exp weights.
inline zspad::BScan nlm_reference(const zspad::BScan& img, const zspad::PreprocessConfig& cfg) {
  const int h = img.height, w = img.width;
  const int tr = cfg.nlm_template / 2;
  const int sr = cfg.nlm_search / 2;
  const double h_eff = cfg.nlm_filter_strength / 255.0;
  const double inv_h2 = 1.0 / (h_eff * h_eff);
  const double patch_px = double(cfg.nlm_template) * double(cfg.nlm_template);

  zspad::BScan out = zspad::make_bscan(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0, wsum = 0.0;
      for (int qy = y - sr; qy <= y + sr; ++qy) {
        for (int qx = x - sr; qx <= x + sr; ++qx) {
          if (qy < 0 || qy >= h || qx < 0 || qx >= w) continue;
          double ssd = 0.0;
          for (int ty = -tr; ty <= tr; ++ty) {
            for (int tx = -tr; tx <= tr; ++tx) {
              const double a = img.at(clampi(y + ty, 0, h - 1), clampi(x + tx, 0, w - 1));
              const double b = img.at(clampi(qy + ty, 0, h - 1), clampi(qx + tx, 0, w - 1));
              ssd += (a - b) * (a - b);
            }
          }
          const double d2 = ssd / patch_px;
          const double wgt = std::exp(-(d2 > 0.0 ? d2 : 0.0) * inv_h2);
          acc += wgt * img.at(qy, qx);
          wsum += wgt;
        }
      }
      out.at(y, x) = acc / wsum;
    }
  }
  return out;
}

// Independently written bilinear sampler (half-pixel centers, edge clamp).
inline double bilinear_sample(const std::vector<double>& src, int sh, int sw, double fy,
                              double fx) {
  fy = std::max(0.0, std::min(fy, double(sh - 1)));
  fx = std::max(0.0, std::min(fx, double(sw - 1)));
  const int y0 = int(std::floor(fy)), x0 = int(std::floor(fx));
  const int y1 = std::min(y0 + 1, sh - 1), x1 = std::min(x0 + 1, sw - 1);
  const double ay = fy - y0, ax = fx - x0;
  return src[size_t(y0) * sw + size_t(x0)] * (1 - ay) * (1 - ax) +
         src[size_t(y0) * sw + size_t(x1)] * (1 - ay) * ax +
         src[size_t(y1) * sw + size_t(x0)] * ay * (1 - ax) +
         src[size_t(y1) * sw + size_t(x1)] * ay * ax;
}

// Explicit per-channel resize + channel mean + layer mean + min-max
// normalization; mirrors the defining formulas rather than the library's
// mean-first ordering.
inline std::vector<double> finemap_reference(const std::vector<zspad::Tensor>& fs, int out_h,
                                             int out_w) {
  std::vector<double> acc(size_t(out_h) * size_t(out_w), 0.0);
  for (const zspad::Tensor& f : fs) {
    std::vector<double> layer(acc.size(), 0.0);
    for (int c = 0; c < f.c; ++c) {
      std::vector<double> plane(f.plane(c), f.plane(c) + f.plane_size());
      for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
          const double fy = (y + 0.5) * double(f.h) / out_h - 0.5;
          const double fx = (x + 0.5) * double(f.w) / out_w - 0.5;
          layer[size_t(y) * out_w + x] += bilinear_sample(plane, f.h, f.w, fy, fx);
        }
      }
    }
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += layer[i] / double(f.c);
  }
  for (double& v : acc) v /= double(fs.size());

  const double lo = *std::min_element(acc.begin(), acc.end());
  const double hi = *std::max_element(acc.begin(), acc.end());
  if (!(hi - lo > 1e-12)) {
    std::fill(acc.begin(), acc.end(), 1.0);
    return acc;
  }
  for (double& v : acc) v = (v - lo) / (hi - lo);
  return acc;
}

inline void mean_std(const std::vector<double>& xs, double& mean, double& std_out) {
  double s = 0.0;
  for (double x : xs) s += x;
  mean = s / double(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  std_out = std::sqrt(ss / double(xs.size()));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Exact overlap of two equal-variance unit Gaussians separated by d.
inline double equal_variance_overlap(double d) { return 2.0 * normal_cdf(-std::abs(d) / 2.0); }

struct EvalOracleResult {
  double err = 1.0;
  double tpr10 = 0.0;
  double tpr5 = 0.0;
};

// Brute force over every candidate threshold (all values, midpoints and
// sentinels), counting errors sample by sample.
inline EvalOracleResult eval_reference(const std::vector<double>& values,
                                       const std::vector<bool>& is_bona, bool larger_is_pa) {
  std::vector<double> canon(values.size());
  for (size_t i = 0; i < values.size(); ++i) canon[i] = larger_is_pa ? values[i] : -values[i];

  std::vector<double> cands = canon;
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  std::vector<double> thresholds;
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < cands.size(); ++i) {
    thresholds.push_back(cands[i]);
    if (i + 1 < cands.size()) thresholds.push_back(0.5 * (cands[i] + cands[i + 1]));
  }
  thresholds.push_back(std::numeric_limits<double>::infinity());

  int nb = 0, np = 0;
  for (bool b : is_bona) b ? ++nb : ++np;

  EvalOracleResult r;
  for (double t : thresholds) {
    int ba = 0, pa = 0;
    for (size_t i = 0; i < canon.size(); ++i) {
      const bool accept = canon[i] <= t;
      if (accept && is_bona[i]) ++ba;
      if (accept && !is_bona[i]) ++pa;
    }
    const double err = double((nb - ba) + pa) / double(nb + np);
    r.err = std::min(r.err, err);
    const double tpr = double(ba) / nb, fpr = double(pa) / np;
    if (fpr <= 0.10 + 1e-12) r.tpr10 = std::max(r.tpr10, tpr);
    if (fpr <= 0.05 + 1e-12) r.tpr5 = std::max(r.tpr5, tpr);
  }
  return r;
}

}  // namespace oracle
