#include "zspad/bscan.hpp"

#include <cmath>

namespace zspad {

const char* to_string(Label label) {
  switch (label) {
    case Label::Bonafide: return "bonafide";
    case Label::PA: return "pa";
    case Label::Unknown: return "unknown";
  }
  return "unknown";
}

Label label_from_string(std::string_view s) {
  if (s == "bonafide" || s == "Bonafide" || s == "BONAFIDE") return Label::Bonafide;
  if (s == "pa" || s == "PA" || s == "Pa") return Label::PA;
  if (s == "unknown" || s == "Unknown" || s == "UNKNOWN") return Label::Unknown;
  throw FormatError("unrecognized label: '" + std::string(s) + "'");
}

BScan make_bscan(int height, int width, double fill) {
  if (height <= 0 || width <= 0) throw ArgumentError("B-scan dimensions must be positive");
  BScan b;
  b.height = height;
  b.width = width;
  b.pixels.assign(size_t(height) * size_t(width), fill);
  return b;
}

void validate(const BScan& b) {
  if (b.width <= 0 || b.height <= 0) throw ArgumentError("B-scan dimensions must be positive");
  if (b.pixels.size() != size_t(b.width) * size_t(b.height))
    throw ArgumentError("B-scan pixel count does not match dimensions");
  for (double p : b.pixels) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw ArgumentError("B-scan intensity outside [0,1]");
  }
}

void validate(const ScanVolume& v) {
  if (v.bscans.empty()) throw ArgumentError("scan volume is empty");
  const int w = v.bscans.front().width;
  const int h = v.bscans.front().height;
  for (size_t i = 0; i < v.bscans.size(); ++i) {
    const BScan& b = v.bscans[i];
    if (b.width != w || b.height != h)
      throw ArgumentError("scan volume members differ in dimensions");
    if (b.index != int(i)) throw ArgumentError("scan volume indices are not 0..n-1");
    validate(b);
  }
}

}  // namespace zspad
