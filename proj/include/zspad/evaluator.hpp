#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zspad/bscan.hpp"
#include "zspad/scorer.hpp"

namespace zspad {

struct LabeledScore {
  std::string scan_id;
  Label truth = Label::Unknown;
  double value = 0.0;
  Polarity polarity = Polarity::LargerIsPa;
};

struct EvalReport {
  double err = 1.0;           // min misclassification rate over thresholds
  double tpr_at_fpr10 = 0.0;  // max bonafide acceptance with PA acceptance <= 10%
  double tpr_at_fpr5 = 0.0;
  std::vector<std::pair<double, double>> roc;  // (fpr, tpr), ascending
  // Threshold achieving err in the canonical larger-is-PA orientation
  // (negate it for larger-is-bonafide scores). Accept at value <= threshold.
  double best_threshold = 0.0;
};

// Sweeps every achievable threshold (midpoints between consecutive distinct
// values plus +-inf sentinels). Bonafide counts as the positive class: TPR
// is the bonafide acceptance rate, FPR the PA acceptance rate.
EvalReport eval_score(std::span<const LabeledScore> scores);

struct MsSample {
  double s = 0.0;
  double m = 0.0;
  Label truth = Label::Unknown;
};

// MS voting sweep with tied thresholds s_thres = m_thres = t over the union
// of observed s and m values.
EvalReport eval_ms(std::span<const MsSample> pairs);

// CSV: header `fpr,tpr`, one row per ROC point, then a summary line
// `# err=<v> tpr@0.10=<v> tpr@0.05=<v> threshold=<v>`.
void export_report(const EvalReport& r, const std::filesystem::path& path);
EvalReport import_report(const std::filesystem::path& path);

}  // namespace zspad
