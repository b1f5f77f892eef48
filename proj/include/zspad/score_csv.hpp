#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "zspad/bscan.hpp"
#include "zspad/scorer.hpp"

namespace zspad {

struct ScoreRow {
  Label truth = Label::Unknown;
  ConfidenceReport report;
};

// Fixed column contract:
// scan_id,truth,s_score,m_score,sm_score,ms_decision,pd_postp,pd_prep,kl_pre,kl_post,iou_score
extern const char* const kScoreCsvHeader;

void write_score_csv(const std::filesystem::path& path, std::span<const ScoreRow> rows);
std::vector<ScoreRow> read_score_csv(const std::filesystem::path& path);

}  // namespace zspad
