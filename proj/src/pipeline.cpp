#include "zspad/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace zspad {

AutoencoderModel train_from_dataset(const Dataset& ds, const AEConfig& ae_cfg,
                                    const PreprocessConfig& pre_cfg,
                                    const TrainOptions& opts) {
  if (ds.split.model_set.empty()) throw ManifestError("empty model set");
  std::vector<ScanVolume> model_volumes;
  for (const ScanVolume& raw : collect(ds, ds.split.model_set))
    model_volumes.push_back(preprocess_volume(raw, pre_cfg));

  AutoencoderModel model = build_model(ae_cfg);
  train(model, model_volumes, opts);
  return model;
}

ScoreCalibration calibrate_from_dataset(const Dataset& ds, const AutoencoderModel& model,
                                        const PreprocessConfig& pre_cfg) {
  if (ds.split.score_set.empty())
    throw CalibrationDegenerateError("empty score set: calibration needs >= 2 volumes");
  const std::vector<ScanVolume> score_volumes = collect(ds, ds.split.score_set);
  return calibrate(score_volumes, model, pre_cfg);
}

std::vector<ScoreRow> score_dataset(const Dataset& ds, const AutoencoderModel& model,
                                    const PreprocessConfig& pre_cfg,
                                    const ScoreCalibration& cal, const Thresholds& t) {
  std::vector<ScoreRow> rows;
  for (const ScanVolume& v : collect(ds, ds.split.test_set)) {
    ScoreRow row;
    row.truth = v.label;
    row.report = score_volume(v, model, pre_cfg, cal, t);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

double pick_value(const ConfidenceReport& r, const std::string& name) {
  if (name == "s_score") return r.s_score;
  if (name == "m_score") return r.m_score;
  if (name == "sm_score") return r.sm_score;
  if (name == "pd_postp") return r.pd_postp;
  if (name == "pd_prep") return r.pd_prep;
  if (name == "kl_pre") return r.kl_pre;
  if (name == "kl_post") return r.kl_post;
  if (name == "iou_score") return r.iou_score;
  throw ArgumentError("unknown score name: '" + name + "'");
}

}  // namespace

std::map<std::string, EvalReport> evaluate_rows(std::span<const ScoreRow> rows,
                                                const std::optional<std::string>& only) {
  static const char* kScalarScores[] = {"s_score", "m_score",  "sm_score", "pd_postp",
                                        "pd_prep", "kl_pre",   "kl_post",  "iou_score"};

  if (only && *only != "ms") score_polarity(*only);  // reject unknown names up front

  std::map<std::string, EvalReport> out;
  for (const char* name : kScalarScores) {
    if (only && *only != name) continue;
    std::vector<LabeledScore> scores;
    int n_bona = 0, n_pa = 0;
    for (const ScoreRow& row : rows) {
      if (row.truth == Label::Unknown) continue;
      const double v = pick_value(row.report, name);
      if (!std::isfinite(v)) continue;  // degenerate divergence sentinel
      (row.truth == Label::Bonafide ? n_bona : n_pa) += 1;
      scores.push_back({row.report.scan_id, row.truth, v, score_polarity(name)});
    }
    if (n_bona == 0 || n_pa == 0) {
      // Every row of one class was degenerate for this score; an evaluation
      // of the remainder would be meaningless.
      if (only)
        throw ArgumentError("score '" + std::string(name) + "' has no evaluable rows for both classes");
      continue;
    }
    out.emplace(name, eval_score(scores));
  }

  if (!only || *only == "ms") {
    std::vector<MsSample> pairs;
    for (const ScoreRow& row : rows) {
      if (row.truth == Label::Unknown) continue;
      pairs.push_back({row.report.s_score, row.report.m_score, row.truth});
    }
    out.emplace("ms", eval_ms(pairs));
  }
  return out;
}

void write_scatter_csv(const std::filesystem::path& path, std::span<const ScoreRow> rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scatter CSV '" + path.string() + "'");
  out << "s_score,m_score,truth\n";
  for (const ScoreRow& row : rows) {
    char s[64], m[64];
    auto r1 = std::to_chars(s, s + sizeof(s), row.report.s_score);
    auto r2 = std::to_chars(m, m + sizeof(m), row.report.m_score);
    out << std::string(s, r1.ptr) << "," << std::string(m, r2.ptr) << ","
        << to_string(row.truth) << "\n";
  }
  if (!out) throw IoError("write failed for scatter CSV '" + path.string() + "'");
}

}  // namespace zspad
