#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "zspad/rng.hpp"
#include "zspad/scorer.hpp"

using namespace zspad;

namespace {

ScoreCalibration calibration_from(std::vector<std::vector<double>> per_volume) {
  return build_calibration(per_volume);
}

// Two crafted volumes with distinct per-volume (m*, s*) whose pooled fit is
// exactly N(0,1): sums are -1 and +1, squared sums 2.5 and 1.5.
ScoreCalibration unit_pooled_calibration() {
  const double r = std::sqrt(2.0);
  return calibration_from({{-1.5, 0.5}, {(1.0 + r) / 2.0, (1.0 - r) / 2.0}});
}

}  // namespace

TEST_CASE("fit_scan_gaussian: closed forms") {
  {
    const std::vector<double> e{1.0, 1.0, 1.0};
    const ScanGaussian g = fit_scan_gaussian(e);
    CHECK(g.m == 1.0);
    CHECK(g.s == 0.0);
    CHECK(g.n == 3);
  }
  {
    const std::vector<double> e{0.0, 2.0};
    const ScanGaussian g = fit_scan_gaussian(e);
    CHECK(g.m == 1.0);
    CHECK(g.s == 1.0);  // population variance, divisor n
  }
  CHECK_THROWS_AS(fit_scan_gaussian(std::vector<double>{}), ArgumentError);
}

TEST_CASE("fit_scan_gaussian: matches the brute-force oracle") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> e(size_t(1 + rng.uniform_int(500)));
    for (double& v : e) v = rng.gaussian() * 2.0 + 0.3;
    const ScanGaussian g = fit_scan_gaussian(e);
    double m = 0.0, s = 0.0;
    oracle::mean_std(e, m, s);
    CHECK(std::abs(g.m - m) <= 1e-9);
    CHECK(std::abs(g.s - s) <= 1e-9);
  }
}

TEST_CASE("fit_scan_gaussian: recovers seeded Gaussian parameters") {
  Rng rng(987);
  std::vector<double> e(10000);
  for (double& v : e) v = 3.0 + 0.5 * rng.gaussian();
  const ScanGaussian g = fit_scan_gaussian(e);
  CHECK(std::abs(g.m - 3.0) <= 0.02);
  CHECK(std::abs(g.s - 0.5) <= 0.02);
}

TEST_CASE("calibration: aggregation arithmetic") {
  // Volumes with (m*, s*) = (1, 0.1) and (3, 0.3).
  const ScoreCalibration cal = calibration_from({{0.9, 1.1}, {2.7, 3.3}});
  CHECK(cal.m_bar == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cal.m_max == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(cal.s_bar == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(cal.s_max == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(cal.volume_count == 2);
}

TEST_CASE("calibration: pooled Gaussian over concatenated errors") {
  // The pooled fit runs over the concatenation {0, 2, 2.5, 3.5}, not over
  // the per-volume statistics.
  const ScoreCalibration cal = calibration_from({{0.0, 2.0}, {2.5, 3.5}});
  double m = 0.0, s = 0.0;
  oracle::mean_std({0.0, 2.0, 2.5, 3.5}, m, s);
  CHECK(cal.pooled.m == doctest::Approx(m).epsilon(1e-12));
  CHECK(cal.pooled.s == doctest::Approx(s).epsilon(1e-12));
  CHECK(cal.pooled.n == 4);

  // Pooled-fit arithmetic on the flat list {1,1,3,3}.
  const ScanGaussian flat = fit_scan_gaussian(std::vector<double>{1.0, 1.0, 3.0, 3.0});
  CHECK(flat.m == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(flat.s == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("calibration: single volume is degenerate") {
  CHECK_THROWS_AS(calibration_from({{1.0, 2.0}}), CalibrationDegenerateError);
}

TEST_CASE("calibration: identical volumes are degenerate") {
  CHECK_THROWS_AS(calibration_from({{1.0, 2.0}, {1.0, 2.0}}), CalibrationDegenerateError);
}

TEST_CASE("m_score and s_score normalization") {
  const ScoreCalibration cal = calibration_from({{0.9, 1.1}, {2.7, 3.3}});
  // m_bar=2, m_max=3, s_bar=0.2, s_max=0.3
  ScanGaussian t;
  t.n = 1;

  t.m = 2.0;
  CHECK(m_score(t, cal) == doctest::Approx(0.0));
  t.m = 3.0;
  CHECK(m_score(t, cal) == doctest::Approx(1.0));
  t.m = 4.0;
  CHECK(m_score(t, cal) == doctest::Approx(2.0));  // beyond the score-set max
  t.m = 1.0;  // absolute deviation counts too
  CHECK(m_score(t, cal) == doctest::Approx(1.0));

  t.s = 0.2;
  CHECK(s_score(t, cal) == doctest::Approx(0.0));
  t.s = 0.3;
  CHECK(s_score(t, cal) == doctest::Approx(1.0));
  t.s = 0.25;
  CHECK(s_score(t, cal) == doctest::Approx(0.5));
}

TEST_CASE("sm_score and ms_decide") {
  CHECK(sm_score(0.0, 0.0) == 0.0);
  CHECK(sm_score(1.0, 0.0) == 0.5);
  CHECK(sm_score(0.4, 0.6) == doctest::Approx(0.5));

  const Thresholds t{0.5, 0.5};
  CHECK(ms_decide(0.0, 0.0, t) == Label::Bonafide);
  CHECK(ms_decide(0.6, 0.0, t) == Label::PA);   // S veto
  CHECK(ms_decide(0.0, 0.6, t) == Label::PA);   // M veto
  CHECK(ms_decide(0.5, 0.5, t) == Label::Bonafide);  // boundary inclusive
}

TEST_CASE("ms_decide: raising thresholds never flips bonafide to PA") {
  Rng rng(44);
  for (int i = 0; i < 200; ++i) {
    const double s = rng.uniform() * 2.0, m = rng.uniform() * 2.0;
    const Thresholds lo{rng.uniform(), rng.uniform()};
    const Thresholds hi{lo.s_thres + rng.uniform(), lo.m_thres + rng.uniform()};
    if (ms_decide(s, m, lo) == Label::Bonafide) CHECK(ms_decide(s, m, hi) == Label::Bonafide);
  }
}

TEST_CASE("pd scores against the pooled density") {
  const ScoreCalibration cal = unit_pooled_calibration();
  REQUIRE(cal.pooled.m == doctest::Approx(0.0).epsilon(1e-9));
  REQUIRE(cal.pooled.s == doctest::Approx(1.0).epsilon(1e-9));

  const double peak = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);

  // All errors at the pooled mean hit the density peak.
  const std::vector<double> at_mean{0.0, 0.0};
  CHECK(pd_postp(at_mean, cal) == doctest::Approx(peak).epsilon(1e-8));

  const std::vector<double> sym{-1.0, 1.0};
  CHECK(pd_postp(sym, cal) == doctest::Approx(0.24197072451914337).epsilon(1e-6));
  CHECK(pd_prep(sym, cal) == doctest::Approx(0.3989422804014327).epsilon(1e-6));
  CHECK(pd_prep(sym, cal) > pd_postp(sym, cal));

  // Single error: expectation of one point makes both scores equal.
  const std::vector<double> one{0.7};
  CHECK(pd_prep(one, cal) == doctest::Approx(pd_postp(one, cal)).epsilon(1e-12));

  // Deep tail stays positive and finite.
  const std::vector<double> tail{9.0};
  CHECK(pd_postp(tail, cal) < 1e-14);
  CHECK(pd_postp(tail, cal) > 0.0);
  CHECK(std::isfinite(pd_postp(tail, cal)));
}

TEST_CASE("pd scores: degenerate pooled density") {
  ScoreCalibration cal;
  cal.m_bar = 0.0;
  cal.m_max = 1.0;
  cal.s_bar = 0.0;
  cal.s_max = 1.0;
  cal.pooled = ScanGaussian{1.0, 0.0, 3};
  CHECK_THROWS_AS(pd_postp(std::vector<double>{1.0}, cal), DegenerateDensityError);
}

TEST_CASE("kl divergence: closed forms, asymmetry, non-negativity") {
  const ScanGaussian n01{0.0, 1.0, 10};
  const ScanGaussian n11{1.0, 1.0, 10};
  const ScanGaussian n02{0.0, 2.0, 10};

  CHECK(kl_divergence(n01, n01) <= 1e-12);
  CHECK(kl_divergence(n01, n11) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(kl_divergence(n01, n02) ==
        doctest::Approx(std::log(2.0) - 3.0 / 8.0).epsilon(1e-12));
  CHECK(kl_divergence(n01, n02) != kl_divergence(n02, n01));

  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const ScanGaussian p{rng.gaussian(), 0.1 + rng.uniform() * 3.0, 5};
    const ScanGaussian q{rng.gaussian(), 0.1 + rng.uniform() * 3.0, 5};
    CHECK(kl_divergence(p, q) >= -1e-12);
  }

  CHECK_THROWS_AS(kl_divergence(ScanGaussian{0.0, 0.0, 1}, n01), DegenerateDensityError);
}

TEST_CASE("iou: identity, separation limit, closed-form cross-check") {
  const ScanGaussian a{0.3, 0.7, 10};
  CHECK(iou_score(a, a) == doctest::Approx(1.0).epsilon(1e-6));

  // Monotone decreasing in separation for equal variances.
  double prev = 1.1;
  for (double d : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double v = iou_score(ScanGaussian{0.0, 1.0, 5}, ScanGaussian{d, 1.0, 5});
    CHECK(v < prev);
    prev = v;
  }

  // N(0,1) vs N(2,1): overlap 2*Phi(-1), IoU = ov/(2-ov).
  const double ov = oracle::equal_variance_overlap(2.0);
  const double want = ov / (2.0 - ov);
  CHECK(want == doctest::Approx(0.18857).epsilon(1e-3));
  CHECK(iou_score(ScanGaussian{0.0, 1.0, 5}, ScanGaussian{2.0, 1.0, 5}) ==
        doctest::Approx(want).epsilon(1e-4));
}

TEST_CASE("iou: symmetry and range") {
  Rng rng(21);
  for (int i = 0; i < 40; ++i) {
    const ScanGaussian p{rng.gaussian() * 2.0, 0.05 + rng.uniform() * 2.0, 5};
    const ScanGaussian q{rng.gaussian() * 2.0, 0.05 + rng.uniform() * 2.0, 5};
    const double pq = iou_score(p, q), qp = iou_score(q, p);
    CHECK(std::abs(pq - qp) <= 1e-9);
    CHECK(pq >= 0.0);
    CHECK(pq <= 1.0);
  }
  CHECK_THROWS_AS(iou_score(ScanGaussian{0.0, 0.0, 1}, ScanGaussian{0.0, 1.0, 1}),
                  DegenerateDensityError);
}

TEST_CASE("score polarity contract") {
  CHECK(score_polarity("s_score") == Polarity::LargerIsPa);
  CHECK(score_polarity("m_score") == Polarity::LargerIsPa);
  CHECK(score_polarity("sm_score") == Polarity::LargerIsPa);
  CHECK(score_polarity("kl_pre") == Polarity::LargerIsPa);
  CHECK(score_polarity("kl_post") == Polarity::LargerIsPa);
  CHECK(score_polarity("pd_postp") == Polarity::LargerIsBonafide);
  CHECK(score_polarity("pd_prep") == Polarity::LargerIsBonafide);
  CHECK(score_polarity("iou_score") == Polarity::LargerIsBonafide);
  CHECK_THROWS_AS(score_polarity("nope"), ArgumentError);
}

TEST_CASE("build_confidence_report: degenerate test deviation flags kl/iou only") {
  const ScoreCalibration cal = calibration_from({{0.9, 1.1}, {2.7, 3.3}});
  const std::vector<double> uniform{2.0, 2.0, 2.0};
  const ConfidenceReport r = build_confidence_report("t", uniform, cal, Thresholds{});
  CHECK(r.divergence_degenerate);
  CHECK(std::isnan(r.kl_pre));
  CHECK(std::isnan(r.kl_post));
  CHECK(std::isnan(r.iou_score));
  CHECK(std::isfinite(r.s_score));
  CHECK(std::isfinite(r.m_score));
  CHECK(std::isfinite(r.pd_postp));
  CHECK(std::isfinite(r.pd_prep));
  CHECK(r.m_score == doctest::Approx(0.0));  // m at the calibration mean
}

TEST_CASE("scale coherence: scaling all errors by k leaves scale-free scores unchanged") {
  Rng rng(64);
  for (double k : {0.25, 3.0, 42.0}) {
    std::vector<std::vector<double>> vols(3);
    for (auto& v : vols) {
      v.resize(8);
      for (double& e : v) e = 0.5 + rng.uniform();
    }
    std::vector<double> test(8);
    for (double& e : test) e = 0.5 + rng.uniform();

    const ScoreCalibration cal = build_calibration(vols);
    const ConfidenceReport base = build_confidence_report("t", test, cal, Thresholds{});

    std::vector<std::vector<double>> scaled_vols = vols;
    for (auto& v : scaled_vols)
      for (double& e : v) e *= k;
    std::vector<double> scaled_test = test;
    for (double& e : scaled_test) e *= k;

    const ScoreCalibration cal_k = build_calibration(scaled_vols);
    const ConfidenceReport rep_k =
        build_confidence_report("t", scaled_test, cal_k, Thresholds{});

    CHECK(rep_k.s_score == doctest::Approx(base.s_score).epsilon(1e-9));
    CHECK(rep_k.m_score == doctest::Approx(base.m_score).epsilon(1e-9));
    CHECK(rep_k.sm_score == doctest::Approx(base.sm_score).epsilon(1e-9));
    CHECK(rep_k.ms_decision == base.ms_decision);
    CHECK(rep_k.kl_pre == doctest::Approx(base.kl_pre).epsilon(1e-9));
    CHECK(rep_k.kl_post == doctest::Approx(base.kl_post).epsilon(1e-9));
    CHECK(rep_k.iou_score == doctest::Approx(base.iou_score).epsilon(1e-6));
  }
}

TEST_CASE("calibration file: round trip and version check") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "zspad_cal";
  fs::create_directories(dir);

  ScoreCalibration cal = calibration_from({{0.9, 1.1}, {2.7, 3.3}});
  cal.model_hash = 0xdeadbeefcafef00dull;
  save_calibration(cal, dir / "cal.txt");
  const ScoreCalibration back = load_calibration(dir / "cal.txt");
  CHECK(back.m_bar == cal.m_bar);
  CHECK(back.m_max == cal.m_max);
  CHECK(back.s_bar == cal.s_bar);
  CHECK(back.s_max == cal.s_max);
  CHECK(back.pooled.m == cal.pooled.m);
  CHECK(back.pooled.s == cal.pooled.s);
  CHECK(back.pooled.n == cal.pooled.n);
  CHECK(back.volume_count == cal.volume_count);
  CHECK(back.model_hash == cal.model_hash);
}
