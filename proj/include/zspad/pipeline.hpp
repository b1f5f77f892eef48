#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "zspad/autoencoder.hpp"
#include "zspad/evaluator.hpp"
#include "zspad/manifest.hpp"
#include "zspad/preprocess.hpp"
#include "zspad/score_csv.hpp"
#include "zspad/scorer.hpp"

namespace zspad {

struct PipelinePaths {
  std::filesystem::path data_manifest;
  std::filesystem::path model_path;
  std::filesystem::path calibration_path;
  std::filesystem::path report_dir;
};

struct PipelineConfig {
  PreprocessConfig pre;
  AEConfig ae;
  Thresholds thresholds;
  PipelinePaths paths;
};

// Preprocesses the model split and trains; throws ManifestError when the
// model split is empty.
AutoencoderModel train_from_dataset(const Dataset& ds, const AEConfig& ae_cfg,
                                    const PreprocessConfig& pre_cfg,
                                    const TrainOptions& opts = {});

ScoreCalibration calibrate_from_dataset(const Dataset& ds, const AutoencoderModel& model,
                                        const PreprocessConfig& pre_cfg);

// One row per test-split volume, manifest order.
std::vector<ScoreRow> score_dataset(const Dataset& ds, const AutoencoderModel& model,
                                    const PreprocessConfig& pre_cfg,
                                    const ScoreCalibration& cal, const Thresholds& t);

// Evaluates every score family on the rows: the eight scalar scores by
// threshold sweep plus "ms" via the tied two-threshold voting sweep.
// Rows with Unknown truth or a non-finite value for a given score are
// skipped for that score. `only` restricts output to one name.
std::map<std::string, EvalReport> evaluate_rows(std::span<const ScoreRow> rows,
                                                const std::optional<std::string>& only = {});

// Score-space view: header `s_score,m_score,truth`, one row per volume.
void write_scatter_csv(const std::filesystem::path& path, std::span<const ScoreRow> rows);

}  // namespace zspad
