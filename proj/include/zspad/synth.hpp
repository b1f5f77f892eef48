#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "zspad/bscan.hpp"
#include "zspad/manifest.hpp"

namespace zspad {

// Bonafide: epidermis + dermis bands. PAI presets: single layer (2D), one
// thick flattened layer (3D pressed), an implausibly separated double layer
// plus a lens-reflection line (3D unpressed), or near-zero signal
// (transparent, the documented miss).
enum class SynthPreset { Bonafide, Pai2d, Pai3dPressed, Pai3dUnpressed, PaiTransparent };

const char* to_string(SynthPreset p);
Label preset_label(SynthPreset p);

struct SynthParams {
  uint64_t seed = 7;
  int height = 64;
  int width = 192;
  int bscans_per_volume = 16;
  SynthPreset preset = SynthPreset::Bonafide;
  double speckle_sigma = 0.1;  // multiplicative speckle strength
  double layer_jitter = 0.8;   // per-column depth jitter, pixels
};

void validate(const SynthParams& p);  // throws ArgumentError

// Deterministic: identical params and scan_id always produce identical
// pixels. The scan_id seeds the per-volume stream, so distinct volumes of a
// dataset differ while reruns are bit-identical.
ScanVolume generate_volume(const SynthParams& p, const std::string& scan_id);

struct SynthRequest {
  SplitTag split = SplitTag::Test;
  SynthPreset preset = SynthPreset::Bonafide;
  int count = 0;
};

struct GeneratedDataset {
  std::vector<ScanVolume> volumes;
  DatasetSplit split;
  std::filesystem::path manifest_path;
};

// Writes 16-bit PGMs plus a manifest consumable by load_manifest. Requests
// placing a PAI preset in the model or score split throw ZeroPaViolation.
GeneratedDataset generate_dataset(uint64_t seed, std::span<const SynthRequest> requests,
                                  const SynthParams& base,
                                  const std::filesystem::path& out_dir);

}  // namespace zspad
