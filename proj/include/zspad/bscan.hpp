#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "zspad/errors.hpp"

namespace zspad {

enum class Label { Bonafide, PA, Unknown };

const char* to_string(Label label);
Label label_from_string(std::string_view s);  // throws FormatError

// One grayscale cross-section image. Intensities are row-major in [0,1].
struct BScan {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;
  std::string scan_id;
  int index = 0;  // position inside the owning scan volume

  double at(int y, int x) const { return pixels[size_t(y) * size_t(width) + size_t(x)]; }
  double& at(int y, int x) { return pixels[size_t(y) * size_t(width) + size_t(x)]; }
  size_t pixel_count() const { return pixels.size(); }
};

BScan make_bscan(int height, int width, double fill = 0.0);

// Throws ArgumentError if dimensions, pixel count or intensity range are off.
void validate(const BScan& b);

// Ordered B-scans from one fingertip / PAI scan.
struct ScanVolume {
  std::string scan_id;
  Label label = Label::Unknown;
  std::vector<BScan> bscans;
};

void validate(const ScanVolume& v);

// Zero-PA partition: model and score sets are bonafide-only and disjoint,
// and neither overlaps the test set.
struct DatasetSplit {
  std::vector<std::string> model_set;
  std::vector<std::string> score_set;
  std::vector<std::string> test_set;
};

}  // namespace zspad
