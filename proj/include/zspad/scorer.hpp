#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "zspad/autoencoder.hpp"
#include "zspad/bscan.hpp"
#include "zspad/preprocess.hpp"

namespace zspad {

// MLE Gaussian of one scan's refined reconstruction errors (population
// standard deviation, divisor n).
struct ScanGaussian {
  double m = 0.0;
  double s = 0.0;
  int n = 0;
};

ScanGaussian fit_scan_gaussian(std::span<const double> errors);

double gaussian_pdf(const ScanGaussian& g, double x);  // requires g.s > 0

// Score-set statistics shared by all nine confidence scores.
struct ScoreCalibration {
  double m_bar = 0.0;
  double m_max = 0.0;
  double s_bar = 0.0;
  double s_max = 0.0;
  ScanGaussian pooled;  // fit over all refined errors of all score volumes
  int volume_count = 0;
  uint64_t model_hash = 0;  // checkpoint hash recorded at calibration time
};

// Aggregation step: per-volume Gaussians -> calibration. Throws
// CalibrationDegenerateError when max == mean for either statistic.
ScoreCalibration build_calibration(const std::vector<std::vector<double>>& per_volume_errors);

// Full path: preprocess -> reconstruct -> fine_map -> refined_error per
// B-scan of every (bonafide) score volume, then build_calibration.
ScoreCalibration calibrate(std::span<const ScanVolume> score_volumes,
                           const AutoencoderModel& model, const PreprocessConfig& pre_cfg);

double m_score(const ScanGaussian& test, const ScoreCalibration& cal);
double s_score(const ScanGaussian& test, const ScoreCalibration& cal);
double sm_score(double s, double m);

struct Thresholds {
  double s_thres = 1.0;
  double m_thres = 1.0;
};

// Bonafide iff s <= s_thres and m <= m_thres; each score holds veto power.
Label ms_decide(double s, double m, const Thresholds& t);

double pd_postp(std::span<const double> test_errors, const ScoreCalibration& cal);
double pd_prep(std::span<const double> test_errors, const ScoreCalibration& cal);

// Closed-form Gaussian KL divergence KL(p||q).
double kl_divergence(const ScanGaussian& p, const ScanGaussian& q);

// Overlap / union of two Gaussian densities, by trapezoidal integration of
// min(p,q) over [min(m)-8*s_max, max(m)+8*s_max]; IoU = ov/(2-ov).
double iou_score(const ScanGaussian& p, const ScanGaussian& q);

struct ConfidenceReport {
  std::string scan_id;
  double s_score = 0.0;
  double m_score = 0.0;
  double sm_score = 0.0;
  Label ms_decision = Label::PA;
  double pd_postp = 0.0;
  double pd_prep = 0.0;
  double kl_pre = 0.0;    // KL(pooled || test)
  double kl_post = 0.0;   // KL(test || pooled)
  double iou_score = 0.0;
  bool divergence_degenerate = false;  // test s* == 0: kl/iou carry NaN sentinels
  ScanGaussian test_gaussian;
};

enum class Polarity { LargerIsPa, LargerIsBonafide };

// Fixed contract: {s,m,sm,kl_pre,kl_post} larger = PA-like,
// {pd_postp,pd_prep,iou} larger = bonafide-like.
Polarity score_polarity(std::string_view score_name);  // throws ArgumentError

std::vector<double> refined_errors_for_volume(const ScanVolume& v,
                                              const AutoencoderModel& model,
                                              const PreprocessConfig& pre_cfg);

// Scores one volume's already-computed refined errors against a calibration.
ConfidenceReport build_confidence_report(std::string scan_id,
                                         std::span<const double> test_errors,
                                         const ScoreCalibration& cal, const Thresholds& t);

// Runs the full per-B-scan pipeline and fills every score field.
ConfidenceReport score_volume(const ScanVolume& v, const AutoencoderModel& model,
                              const PreprocessConfig& pre_cfg, const ScoreCalibration& cal,
                              const Thresholds& t);

// Key-value text document; numbers round-trip exactly.
void save_calibration(const ScoreCalibration& cal, const std::filesystem::path& path);
ScoreCalibration load_calibration(const std::filesystem::path& path);

}  // namespace zspad
