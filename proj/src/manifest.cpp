#include "zspad/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "zspad/pgm_io.hpp"

namespace zspad {

const char* to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::Model: return "model";
    case SplitTag::Score: return "score";
    case SplitTag::Test: return "test";
  }
  return "test";
}

SplitTag split_from_string(std::string_view s) {
  if (s == "model") return SplitTag::Model;
  if (s == "score") return SplitTag::Score;
  if (s == "test") return SplitTag::Test;
  throw ManifestError("unrecognized split tag: '" + std::string(s) + "'");
}

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
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

Dataset load_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest '" + manifest_path.string() + "'");
  const std::filesystem::path base = manifest_path.parent_path();

  Dataset ds;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    const std::vector<std::string> fields = split_on(line, '\t');
    if (fields.size() != 4)
      throw ManifestError("manifest line " + std::to_string(line_no) +
                          ": expected 4 tab-separated fields");

    const std::string& scan_id = fields[0];
    if (scan_id.empty())
      throw ManifestError("manifest line " + std::to_string(line_no) + ": empty scan_id");
    if (!seen.insert(scan_id).second)
      throw ManifestError("duplicate scan_id '" + scan_id + "'");

    Label label;
    try {
      label = label_from_string(fields[1]);
    } catch (const FormatError& e) {
      throw ManifestError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    const SplitTag split = split_from_string(fields[2]);

    if (split != SplitTag::Test && label != Label::Bonafide)
      throw ZeroPaViolation("volume '" + scan_id + "' with label '" + to_string(label) +
                            "' tagged '" + to_string(split) +
                            "': model and score splits are bonafide-only");

    ScanVolume vol;
    vol.scan_id = scan_id;
    vol.label = label;
    for (const std::string& rel : split_on(fields[3], ',')) {
      if (rel.empty())
        throw ManifestError("manifest line " + std::to_string(line_no) + ": empty path");
      std::filesystem::path p(rel);
      if (p.is_relative()) p = base / p;
      BScan b = load_bscan(p);
      b.scan_id = scan_id;
      b.index = int(vol.bscans.size());
      vol.bscans.push_back(std::move(b));
    }
    validate(vol);

    switch (split) {
      case SplitTag::Model: ds.split.model_set.push_back(scan_id); break;
      case SplitTag::Score: ds.split.score_set.push_back(scan_id); break;
      case SplitTag::Test: ds.split.test_set.push_back(scan_id); break;
    }
    ds.volumes.push_back(std::move(vol));
  }
  return ds;
}

void write_manifest(const std::filesystem::path& manifest_path,
                    const std::vector<ManifestRecord>& records) {
  std::ofstream out(manifest_path);
  if (!out) throw IoError("cannot write manifest '" + manifest_path.string() + "'");
  out << "# scan_id\tlabel\tsplit\tcomma-separated-paths\n";
  for (const ManifestRecord& r : records) {
    out << r.scan_id << '\t' << to_string(r.label) << '\t' << to_string(r.split) << '\t';
    for (size_t i = 0; i < r.paths.size(); ++i) {
      if (i) out << ',';
      out << r.paths[i];
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for manifest '" + manifest_path.string() + "'");
}

std::vector<ScanVolume> collect(const Dataset& ds, const std::vector<std::string>& ids) {
  std::vector<ScanVolume> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) {
    auto it = std::find_if(ds.volumes.begin(), ds.volumes.end(),
                           [&](const ScanVolume& v) { return v.scan_id == id; });
    if (it == ds.volumes.end()) throw ManifestError("unknown scan_id '" + id + "'");
    out.push_back(*it);
  }
  return out;
}

}  // namespace zspad
