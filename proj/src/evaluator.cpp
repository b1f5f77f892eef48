#include "zspad/evaluator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace zspad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

double parse_double(std::string_view s, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError(std::string("report: unparsable ") + what);
  return v;
}

struct SweepPoint {
  double threshold;
  int bona_accept;
  int pa_accept;
};

// Shared metric extraction: points must be ordered by ascending threshold
// with monotone nondecreasing acceptance counts.
EvalReport report_from_sweep(const std::vector<SweepPoint>& points, int n_bona, int n_pa) {
  EvalReport r;
  r.err = 1.0;
  const double total = double(n_bona + n_pa);
  for (const SweepPoint& p : points) {
    const double tpr = double(p.bona_accept) / double(n_bona);
    const double fpr = double(p.pa_accept) / double(n_pa);
    r.roc.emplace_back(fpr, tpr);
    const double err = (double(n_bona - p.bona_accept) + double(p.pa_accept)) / total;
    if (err < r.err) {
      r.err = err;
      r.best_threshold = p.threshold;
    }
    if (fpr <= 0.10 + 1e-12) r.tpr_at_fpr10 = std::max(r.tpr_at_fpr10, tpr);
    if (fpr <= 0.05 + 1e-12) r.tpr_at_fpr5 = std::max(r.tpr_at_fpr5, tpr);
  }
  return r;
}

}  // namespace

EvalReport eval_score(std::span<const LabeledScore> scores) {
  if (scores.empty()) throw ArgumentError("eval_score: no scores");
  const Polarity polarity = scores.front().polarity;

  // Canonical orientation: larger value means more PA-like, accept (call
  // bonafide) at value <= threshold.
  std::vector<double> bona, pa;
  for (const LabeledScore& s : scores) {
    if (s.polarity != polarity) throw ArgumentError("eval_score: mixed polarities");
    if (!std::isfinite(s.value)) throw ArgumentError("eval_score: non-finite score value");
    const double v = polarity == Polarity::LargerIsPa ? s.value : -s.value;
    if (s.truth == Label::Bonafide)
      bona.push_back(v);
    else if (s.truth == Label::PA)
      pa.push_back(v);
    else
      throw ArgumentError("eval_score: sample with unknown truth label");
  }
  if (bona.empty() || pa.empty())
    throw ArgumentError("eval_score: need at least one bonafide and one PA");

  std::sort(bona.begin(), bona.end());
  std::sort(pa.begin(), pa.end());

  std::vector<double> values;
  values.reserve(bona.size() + pa.size());
  values.insert(values.end(), bona.begin(), bona.end());
  values.insert(values.end(), pa.begin(), pa.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  // Midpoints between consecutive distinct values, plus sentinels; this
  // exhausts every achievable confusion matrix.
  std::vector<double> thresholds;
  thresholds.push_back(-kInf);
  for (size_t i = 0; i + 1 < values.size(); ++i)
    thresholds.push_back(0.5 * (values[i] + values[i + 1]));
  thresholds.push_back(kInf);

  std::vector<SweepPoint> points;
  points.reserve(thresholds.size());
  for (double t : thresholds) {
    const int ba = int(std::upper_bound(bona.begin(), bona.end(), t) - bona.begin());
    const int pea = int(std::upper_bound(pa.begin(), pa.end(), t) - pa.begin());
    points.push_back({t, ba, pea});
  }

  return report_from_sweep(points, int(bona.size()), int(pa.size()));
}

EvalReport eval_ms(std::span<const MsSample> pairs) {
  if (pairs.empty()) throw ArgumentError("eval_ms: no samples");

  std::vector<const MsSample*> bona, pa;
  std::vector<double> values;
  for (const MsSample& p : pairs) {
    if (!std::isfinite(p.s) || !std::isfinite(p.m))
      throw ArgumentError("eval_ms: non-finite score value");
    if (p.truth == Label::Bonafide)
      bona.push_back(&p);
    else if (p.truth == Label::PA)
      pa.push_back(&p);
    else
      throw ArgumentError("eval_ms: sample with unknown truth label");
    values.push_back(p.s);
    values.push_back(p.m);
  }
  if (bona.empty() || pa.empty())
    throw ArgumentError("eval_ms: need at least one bonafide and one PA");

  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  // Tied sweep s_thres = m_thres = t over the union of observed values;
  // accepting requires both scores at or under t, so each sample flips at
  // t = max(s, m).
  std::vector<double> thresholds;
  thresholds.push_back(-kInf);
  thresholds.insert(thresholds.end(), values.begin(), values.end());

  std::vector<SweepPoint> points;
  points.reserve(thresholds.size());
  for (double t : thresholds) {
    int ba = 0, pea = 0;
    for (const MsSample* p : bona)
      if (p->s <= t && p->m <= t) ++ba;
    for (const MsSample* p : pa)
      if (p->s <= t && p->m <= t) ++pea;
    points.push_back({t, ba, pea});
  }
  return report_from_sweep(points, int(bona.size()), int(pa.size()));
}

void export_report(const EvalReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report '" + path.string() + "'");
  out << "fpr,tpr\n";
  for (const auto& [fpr, tpr] : r.roc)
    out << format_double(fpr) << "," << format_double(tpr) << "\n";
  out << "# err=" << format_double(r.err) << " tpr@0.10=" << format_double(r.tpr_at_fpr10)
      << " tpr@0.05=" << format_double(r.tpr_at_fpr5)
      << " threshold=" << format_double(r.best_threshold) << "\n";
  if (!out) throw IoError("write failed for report '" + path.string() + "'");
}

EvalReport import_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report '" + path.string() + "'");

  EvalReport r;
  r.err = 0.0;
  std::string line;
  bool header_seen = false;
  bool summary_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "fpr,tpr") throw FormatError("report: missing fpr,tpr header");
      header_seen = true;
      continue;
    }
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        const size_t eq = tok.find('=');
        if (eq == std::string::npos) throw FormatError("report: malformed summary token");
        const std::string key = tok.substr(0, eq);
        const double v = parse_double(tok.substr(eq + 1), key.c_str());
        if (key == "err")
          r.err = v;
        else if (key == "tpr@0.10")
          r.tpr_at_fpr10 = v;
        else if (key == "tpr@0.05")
          r.tpr_at_fpr5 = v;
        else if (key == "threshold")
          r.best_threshold = v;
        else
          throw FormatError("report: unknown summary key '" + key + "'");
      }
      summary_seen = true;
      continue;
    }
    const size_t comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("report: malformed ROC row");
    r.roc.emplace_back(parse_double(line.substr(0, comma), "fpr"),
                       parse_double(line.substr(comma + 1), "tpr"));
  }
  if (!summary_seen) throw FormatError("report: missing summary line");
  return r;
}

}  // namespace zspad
