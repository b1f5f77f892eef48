#include "zspad/scorer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "zspad/finemap.hpp"

namespace zspad {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError(std::string("calibration: unparsable ") + what + " '" + s + "'");
  return v;
}

}  // namespace

ScanGaussian fit_scan_gaussian(std::span<const double> errors) {
  if (errors.empty()) throw ArgumentError("fit_scan_gaussian: empty error list");
  ScanGaussian g;
  g.n = int(errors.size());
  double sum = 0.0;
  for (double e : errors) sum += e;
  g.m = sum / double(g.n);
  double ss = 0.0;
  for (double e : errors) {
    const double d = e - g.m;
    ss += d * d;
  }
  g.s = std::sqrt(ss / double(g.n));  // MLE divisor n
  return g;
}

double gaussian_pdf(const ScanGaussian& g, double x) {
  if (!(g.s > 0.0)) throw DegenerateDensityError("gaussian_pdf: zero standard deviation");
  const double z = (x - g.m) / g.s;
  return std::exp(-0.5 * z * z) / (g.s * std::sqrt(kTwoPi));
}

ScoreCalibration build_calibration(const std::vector<std::vector<double>>& per_volume_errors) {
  if (per_volume_errors.empty()) throw ArgumentError("calibration requires at least one volume");

  std::vector<ScanGaussian> gs;
  std::vector<double> pooled_errors;
  for (const std::vector<double>& errs : per_volume_errors) {
    gs.push_back(fit_scan_gaussian(errs));
    pooled_errors.insert(pooled_errors.end(), errs.begin(), errs.end());
  }

  ScoreCalibration cal;
  cal.volume_count = int(gs.size());
  cal.m_bar = 0.0;
  cal.s_bar = 0.0;
  cal.m_max = -std::numeric_limits<double>::infinity();
  cal.s_max = -std::numeric_limits<double>::infinity();
  for (const ScanGaussian& g : gs) {
    cal.m_bar += g.m;
    cal.s_bar += g.s;
    cal.m_max = std::max(cal.m_max, g.m);
    cal.s_max = std::max(cal.s_max, g.s);
  }
  cal.m_bar /= double(gs.size());
  cal.s_bar /= double(gs.size());

  if (!(cal.m_max - cal.m_bar > 1e-12) || !(cal.s_max - cal.s_bar > 1e-12))
    throw CalibrationDegenerateError(
        "score-set statistics are degenerate (max equals mean); need >= 2 volumes with "
        "distinct per-scan means and deviations");

  cal.pooled = fit_scan_gaussian(pooled_errors);
  return cal;
}

std::vector<double> refined_errors_for_volume(const ScanVolume& v,
                                              const AutoencoderModel& model,
                                              const PreprocessConfig& pre_cfg) {
  const ScanVolume pre = preprocess_volume(v, pre_cfg);
  std::vector<double> errors;
  errors.reserve(pre.bscans.size());
  for (const BScan& b : pre.bscans) {
    const Reconstruction rec = reconstruct(model, b);
    const SaliencyMap map = fine_map(rec.feature_maps, b.height, b.width);
    errors.push_back(refined_error(b, rec.output, map));
  }
  return errors;
}

ScoreCalibration calibrate(std::span<const ScanVolume> score_volumes,
                           const AutoencoderModel& model, const PreprocessConfig& pre_cfg) {
  std::vector<std::vector<double>> per_volume;
  for (const ScanVolume& v : score_volumes) {
    if (v.label != Label::Bonafide)
      throw ZeroPaViolation("volume '" + v.scan_id + "' in the score set is not bonafide");
    per_volume.push_back(refined_errors_for_volume(v, model, pre_cfg));
  }
  return build_calibration(per_volume);
}

namespace {

void require_normalizable(const ScoreCalibration& cal) {
  if (!(cal.m_max - cal.m_bar > 1e-12) || !(cal.s_max - cal.s_bar > 1e-12))
    throw CalibrationDegenerateError("calibration cannot normalize scores");
}

}  // namespace

double m_score(const ScanGaussian& test, const ScoreCalibration& cal) {
  require_normalizable(cal);
  return std::abs(test.m - cal.m_bar) / (cal.m_max - cal.m_bar);
}

double s_score(const ScanGaussian& test, const ScoreCalibration& cal) {
  require_normalizable(cal);
  return std::abs(test.s - cal.s_bar) / (cal.s_max - cal.s_bar);
}

double sm_score(double s, double m) { return 0.5 * (s + m); }

Label ms_decide(double s, double m, const Thresholds& t) {
  return (s <= t.s_thres && m <= t.m_thres) ? Label::Bonafide : Label::PA;
}

double pd_postp(std::span<const double> test_errors, const ScoreCalibration& cal) {
  if (test_errors.empty()) throw ArgumentError("pd_postp: empty error list");
  double sum = 0.0;
  for (double e : test_errors) sum += gaussian_pdf(cal.pooled, e);
  return sum / double(test_errors.size());
}

double pd_prep(std::span<const double> test_errors, const ScoreCalibration& cal) {
  if (test_errors.empty()) throw ArgumentError("pd_prep: empty error list");
  double sum = 0.0;
  for (double e : test_errors) sum += e;
  return gaussian_pdf(cal.pooled, sum / double(test_errors.size()));
}

double kl_divergence(const ScanGaussian& p, const ScanGaussian& q) {
  if (!(p.s > 0.0) || !(q.s > 0.0))
    throw DegenerateDensityError("kl_divergence: zero standard deviation");
  const double dm = p.m - q.m;
  return std::log(q.s / p.s) + (p.s * p.s + dm * dm) / (2.0 * q.s * q.s) - 0.5;
}

double iou_score(const ScanGaussian& p, const ScanGaussian& q) {
  if (!(p.s > 0.0) || !(q.s > 0.0))
    throw DegenerateDensityError("iou_score: zero standard deviation");
  const double s_max = std::max(p.s, q.s);
  const double lo = std::min(p.m, q.m) - 8.0 * s_max;
  const double hi = std::max(p.m, q.m) + 8.0 * s_max;
  const int n = 16384;  // intervals; 16385 grid points
  const double h = (hi - lo) / double(n);

  double ov = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + h * double(i);
    const double f = std::min(gaussian_pdf(p, x), gaussian_pdf(q, x));
    ov += (i == 0 || i == n) ? 0.5 * f : f;
  }
  ov *= h;
  // integral(min) + integral(max) == 2, so IoU = ov / (2 - ov)
  return ov / (2.0 - ov);
}

Polarity score_polarity(std::string_view score_name) {
  if (score_name == "s_score" || score_name == "m_score" || score_name == "sm_score" ||
      score_name == "kl_pre" || score_name == "kl_post")
    return Polarity::LargerIsPa;
  if (score_name == "pd_postp" || score_name == "pd_prep" || score_name == "iou_score")
    return Polarity::LargerIsBonafide;
  throw ArgumentError("unknown score name: '" + std::string(score_name) + "'");
}

ConfidenceReport build_confidence_report(std::string scan_id,
                                         std::span<const double> test_errors,
                                         const ScoreCalibration& cal, const Thresholds& t) {
  ConfidenceReport r;
  r.scan_id = std::move(scan_id);
  r.test_gaussian = fit_scan_gaussian(test_errors);

  r.s_score = s_score(r.test_gaussian, cal);
  r.m_score = m_score(r.test_gaussian, cal);
  r.sm_score = sm_score(r.s_score, r.m_score);
  r.ms_decision = ms_decide(r.s_score, r.m_score, t);
  r.pd_postp = pd_postp(test_errors, cal);
  r.pd_prep = pd_prep(test_errors, cal);

  if (r.test_gaussian.s > 0.0) {
    r.kl_pre = kl_divergence(cal.pooled, r.test_gaussian);
    r.kl_post = kl_divergence(r.test_gaussian, cal.pooled);
    r.iou_score = iou_score(r.test_gaussian, cal.pooled);
  } else {
    // Perfectly uniform test errors: divergence scores are undefined.
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.kl_pre = nan;
    r.kl_post = nan;
    r.iou_score = nan;
    r.divergence_degenerate = true;
  }
  return r;
}

ConfidenceReport score_volume(const ScanVolume& v, const AutoencoderModel& model,
                              const PreprocessConfig& pre_cfg, const ScoreCalibration& cal,
                              const Thresholds& t) {
  const std::vector<double> errors = refined_errors_for_volume(v, model, pre_cfg);
  return build_confidence_report(v.scan_id, errors, cal, t);
}

void save_calibration(const ScoreCalibration& cal, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write calibration '" + path.string() + "'");
  out << "zspad_calibration_version=1\n";
  out << "volume_count=" << cal.volume_count << "\n";
  out << "m_bar=" << format_double(cal.m_bar) << "\n";
  out << "m_max=" << format_double(cal.m_max) << "\n";
  out << "s_bar=" << format_double(cal.s_bar) << "\n";
  out << "s_max=" << format_double(cal.s_max) << "\n";
  out << "pooled_m=" << format_double(cal.pooled.m) << "\n";
  out << "pooled_s=" << format_double(cal.pooled.s) << "\n";
  out << "pooled_n=" << cal.pooled.n << "\n";
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(cal.model_hash));
  out << "model_hash=" << hash << "\n";
  if (!out) throw IoError("write failed for calibration '" + path.string() + "'");
}

ScoreCalibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calibration '" + path.string() + "'");

  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("calibration: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }

  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(std::string("calibration: missing key '") + key + "'");
    return it->second;
  };

  if (get("zspad_calibration_version") != "1")
    throw IncompatibleCheckpointError("unsupported calibration version");

  ScoreCalibration cal;
  cal.volume_count = int(parse_double(get("volume_count"), "volume_count"));
  cal.m_bar = parse_double(get("m_bar"), "m_bar");
  cal.m_max = parse_double(get("m_max"), "m_max");
  cal.s_bar = parse_double(get("s_bar"), "s_bar");
  cal.s_max = parse_double(get("s_max"), "s_max");
  cal.pooled.m = parse_double(get("pooled_m"), "pooled_m");
  cal.pooled.s = parse_double(get("pooled_s"), "pooled_s");
  cal.pooled.n = int(parse_double(get("pooled_n"), "pooled_n"));
  const std::string& hash = get("model_hash");
  auto [ptr, ec] = std::from_chars(hash.data(), hash.data() + hash.size(), cal.model_hash, 16);
  if (ec != std::errc() || ptr != hash.data() + hash.size())
    throw FormatError("calibration: unparsable model_hash '" + hash + "'");
  return cal;
}

}  // namespace zspad
