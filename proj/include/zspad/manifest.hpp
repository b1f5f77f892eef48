#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "zspad/bscan.hpp"

namespace zspad {

enum class SplitTag { Model, Score, Test };

const char* to_string(SplitTag tag);
SplitTag split_from_string(std::string_view s);  // throws ManifestError

// One manifest line: `scan_id<TAB>label<TAB>split<TAB>comma-separated-paths`.
// Paths are stored as written (normally relative to the manifest directory).
struct ManifestRecord {
  std::string scan_id;
  Label label = Label::Unknown;
  SplitTag split = SplitTag::Test;
  std::vector<std::string> paths;
};

struct Dataset {
  std::vector<ScanVolume> volumes;  // manifest order
  DatasetSplit split;
};

// Loads every referenced B-scan and checks the Zero-PA split invariants.
Dataset load_manifest(const std::filesystem::path& manifest_path);

void write_manifest(const std::filesystem::path& manifest_path,
                    const std::vector<ManifestRecord>& records);

// Copies of the volumes whose ids appear in `ids`, in id-list order.
std::vector<ScanVolume> collect(const Dataset& ds, const std::vector<std::string>& ids);

}  // namespace zspad
