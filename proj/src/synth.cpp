#include "zspad/synth.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "zspad/pgm_io.hpp"
#include "zspad/rng.hpp"

namespace zspad {

const char* to_string(SynthPreset p) {
  switch (p) {
    case SynthPreset::Bonafide: return "bonafide";
    case SynthPreset::Pai2d: return "pai-2d";
    case SynthPreset::Pai3dPressed: return "pai-3d-pressed";
    case SynthPreset::Pai3dUnpressed: return "pai-3d-unpressed";
    case SynthPreset::PaiTransparent: return "pai-transparent";
  }
  return "bonafide";
}

Label preset_label(SynthPreset p) {
  return p == SynthPreset::Bonafide ? Label::Bonafide : Label::PA;
}

void validate(const SynthParams& p) {
  if (p.height <= 0 || p.width <= 0) throw ArgumentError("synth dimensions must be positive");
  if (p.bscans_per_volume < 1) throw ArgumentError("bscans_per_volume must be >= 1");
  if (p.speckle_sigma < 0.0) throw ArgumentError("speckle_sigma must be >= 0");
  if (p.layer_jitter < 0.0) throw ArgumentError("layer_jitter must be >= 0");
}

namespace {

struct LayerShape {
  double depth;      // mean center row
  double sigma;      // band thickness (rows)
  double amplitude;  // peak intensity
  double und_amp;    // undulation amplitude (rows)
  double und_freq;   // cycles across the width
  double und_phase;
};

void add_layer(BScan& img, const LayerShape& layer, double jitter_sigma, Rng& rng,
               bool undulate) {
  const int h = img.height, w = img.width;
  const double inv2s2 = 1.0 / (2.0 * layer.sigma * layer.sigma);
  for (int x = 0; x < w; ++x) {
    double center = layer.depth;
    if (undulate)
      center += layer.und_amp *
                std::sin(2.0 * 3.14159265358979323846 *
                         (layer.und_freq * double(x) / double(w) + layer.und_phase));
    if (jitter_sigma > 0.0) center += jitter_sigma * rng.gaussian();
    for (int y = 0; y < h; ++y) {
      const double d = double(y) - center;
      img.at(y, x) += layer.amplitude * std::exp(-d * d * inv2s2);
    }
  }
}

BScan render_bscan(const SynthParams& p, uint64_t bscan_seed,
                   const std::vector<LayerShape>& layers, bool artifact_line,
                   double artifact_row, double artifact_amp) {
  Rng rng(bscan_seed);
  BScan img = make_bscan(p.height, p.width);

  for (const LayerShape& layer : layers)
    add_layer(img, layer, p.layer_jitter, rng, true);

  if (artifact_line) {
    // Lens reflection: a flat bright line, no undulation, no jitter.
    LayerShape line{artifact_row, 0.8, artifact_amp, 0.0, 0.0, 0.0};
    add_layer(img, line, 0.0, rng, false);
  }

  if (p.speckle_sigma > 0.0) {
    for (double& v : img.pixels) {
      const double gain = 1.0 + p.speckle_sigma * rng.gaussian();
      v *= gain > 0.0 ? gain : 0.0;
    }
  }
  for (double& v : img.pixels) {
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
  }
  return img;
}

}  // namespace

ScanVolume generate_volume(const SynthParams& p, const std::string& scan_id) {
  validate(p);
  const double h = double(p.height);
  const uint64_t vol_seed = derive_seed(derive_seed(p.seed, scan_id), uint64_t(p.preset));
  Rng vol_rng(vol_seed);

  // Per-volume morphology so distinct volumes have distinct statistics.
  std::vector<LayerShape> layers;
  bool artifact_line = false;
  double artifact_row = 0.0, artifact_amp = 0.0;

  switch (p.preset) {
    case SynthPreset::Bonafide: {
      // Variation within the preset stays small so score-set statistics
      // carry over to unseen bonafide volumes.
      LayerShape epidermis;
      epidermis.depth = h * (0.28 + 0.02 * vol_rng.uniform());
      epidermis.sigma = h * 0.035;
      epidermis.amplitude = 0.86 + 0.04 * vol_rng.uniform();
      epidermis.und_amp = h * (0.025 + 0.01 * vol_rng.uniform());
      epidermis.und_freq = 1.2 + 0.6 * vol_rng.uniform();
      epidermis.und_phase = vol_rng.uniform();
      LayerShape dermis;
      dermis.depth = epidermis.depth + h * (0.25 + 0.02 * vol_rng.uniform());
      dermis.sigma = h * 0.05;
      dermis.amplitude = 0.58 + 0.04 * vol_rng.uniform();
      dermis.und_amp = h * (0.025 + 0.01 * vol_rng.uniform());
      dermis.und_freq = 1.2 + 0.6 * vol_rng.uniform();
      dermis.und_phase = vol_rng.uniform();
      layers = {epidermis, dermis};
      break;
    }
    case SynthPreset::Pai2d: {
      LayerShape single;
      single.depth = h * (0.30 + 0.04 * vol_rng.uniform());
      single.sigma = h * 0.03;
      single.amplitude = 0.82 + 0.06 * vol_rng.uniform();
      single.und_amp = h * (0.015 + 0.01 * vol_rng.uniform());
      single.und_freq = 1.0 + 1.0 * vol_rng.uniform();
      single.und_phase = vol_rng.uniform();
      layers = {single};
      break;
    }
    case SynthPreset::Pai3dPressed: {
      // One thick, flattened band.
      LayerShape thick;
      thick.depth = h * (0.32 + 0.06 * vol_rng.uniform());
      thick.sigma = h * 0.10;
      thick.amplitude = 0.74 + 0.06 * vol_rng.uniform();
      thick.und_amp = h * 0.008;
      thick.und_freq = 1.0 + vol_rng.uniform();
      thick.und_phase = vol_rng.uniform();
      layers = {thick};
      break;
    }
    case SynthPreset::Pai3dUnpressed: {
      // Deceptive double band at an implausible separation.
      LayerShape surface;
      surface.depth = h * (0.12 + 0.03 * vol_rng.uniform());
      surface.sigma = h * 0.03;
      surface.amplitude = 0.78 + 0.06 * vol_rng.uniform();
      surface.und_amp = h * 0.015;
      surface.und_freq = 1.0 + vol_rng.uniform();
      surface.und_phase = vol_rng.uniform();
      LayerShape deep;
      deep.depth = h * (0.80 + 0.04 * vol_rng.uniform());
      deep.sigma = h * 0.04;
      deep.amplitude = 0.52 + 0.06 * vol_rng.uniform();
      deep.und_amp = h * 0.015;
      deep.und_freq = 1.0 + vol_rng.uniform();
      deep.und_phase = vol_rng.uniform();
      layers = {surface, deep};
      artifact_line = true;
      artifact_row = h * 0.045;
      artifact_amp = 0.6;
      break;
    }
    case SynthPreset::PaiTransparent:
      // Near-zero signal; FineMap has nothing to latch onto (documented miss).
      layers = {};
      break;
  }

  ScanVolume vol;
  vol.scan_id = scan_id;
  vol.label = preset_label(p.preset);
  vol.bscans.reserve(size_t(p.bscans_per_volume));
  for (int i = 0; i < p.bscans_per_volume; ++i) {
    BScan b = render_bscan(p, derive_seed(vol_seed, uint64_t(i)), layers, artifact_line,
                           artifact_row, artifact_amp);
    b.scan_id = scan_id;
    b.index = i;
    vol.bscans.push_back(std::move(b));
  }
  return vol;
}

GeneratedDataset generate_dataset(uint64_t seed, std::span<const SynthRequest> requests,
                                  const SynthParams& base,
                                  const std::filesystem::path& out_dir) {
  for (const SynthRequest& req : requests) {
    if (req.count < 0) throw ArgumentError("negative volume count");
    if (req.split != SplitTag::Test && preset_label(req.preset) != Label::Bonafide)
      throw ZeroPaViolation(std::string("PAI preset '") + to_string(req.preset) +
                            "' requested for the " + to_string(req.split) + " split");
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "scans", ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");

  GeneratedDataset ds;
  std::vector<ManifestRecord> records;
  std::map<std::string, int> name_counters;

  for (const SynthRequest& req : requests) {
    for (int i = 0; i < req.count; ++i) {
      std::string group = std::string(to_string(req.split));
      if (req.split == SplitTag::Test) group += std::string("_") + to_string(req.preset);
      char id[96];
      std::snprintf(id, sizeof(id), "%s_%03d", group.c_str(), name_counters[group]++);

      SynthParams p = base;
      p.seed = seed;
      p.preset = req.preset;
      ScanVolume vol = generate_volume(p, id);

      const std::filesystem::path vol_dir = out_dir / "scans" / id;
      std::filesystem::create_directories(vol_dir, ec);
      if (ec) throw IoError("cannot create '" + vol_dir.string() + "'");

      ManifestRecord rec;
      rec.scan_id = id;
      rec.label = vol.label;
      rec.split = req.split;
      for (const BScan& b : vol.bscans) {
        char name[32];
        std::snprintf(name, sizeof(name), "b%03d.pgm", b.index);
        save_bscan(b, vol_dir / name, 16);
        rec.paths.push_back((std::filesystem::path("scans") / id / name).generic_string());
      }
      records.push_back(std::move(rec));

      switch (req.split) {
        case SplitTag::Model: ds.split.model_set.push_back(id); break;
        case SplitTag::Score: ds.split.score_set.push_back(id); break;
        case SplitTag::Test: ds.split.test_set.push_back(id); break;
      }
      ds.volumes.push_back(std::move(vol));
    }
  }

  ds.manifest_path = out_dir / "manifest.tsv";
  write_manifest(ds.manifest_path, records);
  return ds;
}

}  // namespace zspad
