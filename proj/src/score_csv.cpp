#include "zspad/score_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

namespace zspad {

const char* const kScoreCsvHeader =
    "scan_id,truth,s_score,m_score,sm_score,ms_decision,pd_postp,pd_prep,kl_pre,kl_post,"
    "iou_score";

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

double parse_double(const std::string& s, const char* what) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError(std::string("score CSV: unparsable ") + what + " '" + s + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_score_csv(const std::filesystem::path& path, std::span<const ScoreRow> rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write score CSV '" + path.string() + "'");
  out << kScoreCsvHeader << "\n";
  for (const ScoreRow& row : rows) {
    const ConfidenceReport& r = row.report;
    out << r.scan_id << "," << to_string(row.truth) << "," << format_double(r.s_score) << ","
        << format_double(r.m_score) << "," << format_double(r.sm_score) << ","
        << to_string(r.ms_decision) << "," << format_double(r.pd_postp) << ","
        << format_double(r.pd_prep) << "," << format_double(r.kl_pre) << ","
        << format_double(r.kl_post) << "," << format_double(r.iou_score) << "\n";
  }
  if (!out) throw IoError("write failed for score CSV '" + path.string() + "'");
}

std::vector<ScoreRow> read_score_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open score CSV '" + path.string() + "'");

  std::vector<ScoreRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kScoreCsvHeader) throw FormatError("score CSV: unexpected header");
      header_seen = true;
      continue;
    }
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 11) throw FormatError("score CSV: expected 11 columns");
    ScoreRow row;
    row.report.scan_id = f[0];
    row.truth = label_from_string(f[1]);
    row.report.s_score = parse_double(f[2], "s_score");
    row.report.m_score = parse_double(f[3], "m_score");
    row.report.sm_score = parse_double(f[4], "sm_score");
    row.report.ms_decision = label_from_string(f[5]);
    row.report.pd_postp = parse_double(f[6], "pd_postp");
    row.report.pd_prep = parse_double(f[7], "pd_prep");
    row.report.kl_pre = parse_double(f[8], "kl_pre");
    row.report.kl_post = parse_double(f[9], "kl_post");
    row.report.iou_score = parse_double(f[10], "iou_score");
    row.report.divergence_degenerate =
        std::isnan(row.report.kl_pre) || std::isnan(row.report.iou_score);
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw FormatError("score CSV: empty file");
  return rows;
}

}  // namespace zspad
