#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "zspad/preprocess.hpp"
#include "zspad/rng.hpp"
#include "zspad/synth.hpp"

using namespace zspad;

namespace {

BScan random_bscan(int h, int w, uint64_t seed) {
  Rng rng(seed);
  BScan b = make_bscan(h, w);
  for (double& p : b.pixels) p = rng.uniform();
  return b;
}

}  // namespace

TEST_CASE("resize: identity at equal dimensions is bit-exact") {
  for (uint64_t seed : {1u, 2u, 3u}) {
    const BScan src = random_bscan(7, 11, seed);
    const BScan out = resize_bilinear(src, 7, 11);
    CHECK(out.pixels == src.pixels);
  }
}

TEST_CASE("resize: 2x2 checkerboard to 1x1 averages all corners") {
  BScan src = make_bscan(2, 2);
  src.pixels = {0.0, 1.0, 1.0, 0.0};
  const BScan out = resize_bilinear(src, 1, 1);
  CHECK(out.pixels[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("resize: full-resolution 500x1500 -> 256x768") {
  const BScan src = make_bscan(500, 1500, 0.25);
  const BScan out = resize_bilinear(src, 256, 768);
  CHECK(out.height == 256);
  CHECK(out.width == 768);
  for (double p : out.pixels) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("resize: output range stays within input range") {
  for (uint64_t seed : {5u, 6u}) {
    const BScan src = random_bscan(9, 13, seed);
    const auto [lo, hi] = std::minmax_element(src.pixels.begin(), src.pixels.end());
    for (auto [oh, ow] : {std::pair{4, 5}, {17, 29}, {9, 40}}) {
      const BScan out = resize_bilinear(src, oh, ow);
      for (double p : out.pixels) {
        CHECK(p >= *lo - 1e-15);
        CHECK(p <= *hi + 1e-15);
      }
    }
  }
}

TEST_CASE("resize: matches the independent sampler on random shapes") {
  const BScan src = random_bscan(8, 10, 42);
  const BScan out = resize_bilinear(src, 5, 7);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 7; ++x) {
      const double fy = (y + 0.5) * 8.0 / 5.0 - 0.5;
      const double fx = (x + 0.5) * 10.0 / 7.0 - 0.5;
      const double want = oracle::bilinear_sample(src.pixels, 8, 10, fy, fx);
      CHECK(out.at(y, x) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("resize: zero target dimension rejected") {
  const BScan src = random_bscan(4, 4, 1);
  CHECK_THROWS_AS(resize_bilinear(src, 0, 4), ArgumentError);
  CHECK_THROWS_AS(resize_bilinear(src, 4, 0), ArgumentError);
}

TEST_CASE("nlm: constant image is reproduced exactly") {
  PreprocessConfig cfg;
  cfg.nlm_template = 3;
  cfg.nlm_search = 7;
  const BScan src = make_bscan(9, 9, 0.37);
  const BScan out = nlm_denoise(src, cfg);
  CHECK(out.pixels == src.pixels);
}

TEST_CASE("nlm: single bright pixel is attenuated") {
  PreprocessConfig cfg;
  cfg.nlm_template = 3;
  cfg.nlm_search = 7;
  BScan src = make_bscan(11, 11, 0.0);
  src.at(5, 5) = 1.0;
  const BScan out = nlm_denoise(src, cfg);
  const BScan ref = oracle::nlm_reference(src, cfg);
  CHECK(out.at(5, 5) < 1.0);
  CHECK(out.at(5, 5) == doctest::Approx(ref.at(5, 5)).epsilon(1e-9));
}

TEST_CASE("nlm: huge filter strength approaches the search-window mean") {
  PreprocessConfig cfg;
  cfg.nlm_filter_strength = 1e6;
  cfg.nlm_template = 3;
  cfg.nlm_search = 5;
  const BScan src = random_bscan(10, 12, 77);
  const BScan out = nlm_denoise(src, cfg);
  const int sr = cfg.nlm_search / 2;
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      double sum = 0.0;
      int count = 0;
      for (int qy = std::max(0, y - sr); qy <= std::min(src.height - 1, y + sr); ++qy)
        for (int qx = std::max(0, x - sr); qx <= std::min(src.width - 1, x + sr); ++qx) {
          sum += src.at(qy, qx);
          ++count;
        }
      CHECK(out.at(y, x) == doctest::Approx(sum / count).epsilon(1e-6));
    }
  }
}

TEST_CASE("nlm: matches the quadruple-loop reference on small images") {
  PreprocessConfig cfg;  // defaults: strength 19, template 7, search 21
  Rng rng(2024);
  for (int trial = 0; trial < 8; ++trial) {
    const int h = 7 + rng.uniform_int(10);
    const int w = 7 + rng.uniform_int(10);
    const BScan src = random_bscan(h, w, 1000 + uint64_t(trial));
    const BScan out = nlm_denoise(src, cfg);
    const BScan ref = oracle::nlm_reference(src, cfg);
    for (size_t i = 0; i < src.pixels.size(); ++i)
      CHECK(std::abs(out.pixels[i] - ref.pixels[i]) <= 1e-6);
  }
}

TEST_CASE("nlm: image smaller than the template window rejected") {
  PreprocessConfig cfg;
  CHECK_THROWS_AS(nlm_denoise(random_bscan(5, 20, 1), cfg), ArgumentError);
}

TEST_CASE("nlm: denoising reduces MSE against the clean phantom") {
  SynthParams p;
  p.height = 32;
  p.width = 96;
  p.bscans_per_volume = 1;
  p.speckle_sigma = 0.0;
  p.layer_jitter = 0.0;
  const BScan clean = generate_volume(p, "clean").bscans[0];

  PreprocessConfig cfg;
  for (double sigma : {0.05, 0.1, 0.2}) {
    Rng rng(uint64_t(sigma * 1000));
    BScan noisy = clean;
    for (double& v : noisy.pixels) {
      v += sigma * rng.gaussian();
      v = std::clamp(v, 0.0, 1.0);
    }
    const BScan denoised = nlm_denoise(noisy, cfg);
    double mse_noisy = 0.0, mse_denoised = 0.0;
    for (size_t i = 0; i < clean.pixels.size(); ++i) {
      mse_noisy += std::pow(noisy.pixels[i] - clean.pixels[i], 2);
      mse_denoised += std::pow(denoised.pixels[i] - clean.pixels[i], 2);
    }
    CHECK(mse_denoised < mse_noisy);
  }
}

TEST_CASE("preprocess_volume: constants, ablation switch, ordering") {
  ScanVolume v;
  v.scan_id = "v";
  v.label = Label::Bonafide;
  for (int i = 0; i < 3; ++i) {
    BScan b = make_bscan(10, 20, 0.2 + 0.1 * i);
    b.scan_id = "v";
    b.index = i;
    v.bscans.push_back(std::move(b));
  }

  PreprocessConfig cfg;
  cfg.target_height = 8;
  cfg.target_width = 16;
  cfg.nlm_template = 3;
  cfg.nlm_search = 5;

  const ScanVolume out = preprocess_volume(v, cfg);
  REQUIRE(out.bscans.size() == 3);
  CHECK(out.label == Label::Bonafide);
  for (int i = 0; i < 3; ++i) {
    CHECK(out.bscans[i].height == 8);
    CHECK(out.bscans[i].width == 16);
    CHECK(out.bscans[i].index == i);
    for (double p : out.bscans[i].pixels)
      CHECK(p == doctest::Approx(0.2 + 0.1 * i).epsilon(1e-12));
  }

  // denoise off must equal the resize-only path
  PreprocessConfig no_denoise = cfg;
  no_denoise.denoise_enabled = false;
  const ScanVolume resized_only = preprocess_volume(v, no_denoise);
  for (int i = 0; i < 3; ++i) {
    const BScan direct = resize_bilinear(v.bscans[i], 8, 16);
    CHECK(resized_only.bscans[i].pixels == direct.pixels);
  }
}

TEST_CASE("preprocess config validation") {
  PreprocessConfig cfg;
  cfg.nlm_template = 4;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = PreprocessConfig{};
  cfg.nlm_template = 23;  // larger than search
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = PreprocessConfig{};
  cfg.target_height = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}
