// Batch front end: synth | train | calibrate | score | eval.
//
// Exit codes:
//   0 success                       5 training diverged
//   2 argument / config / format    6 degenerate calibration or density
//   3 I/O or corrupt data           7 missing or unusable checkpoint/calibration
//   4 zero-PA violation             8 single-class evaluation input
//   1 unexpected failure

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include "zspad/hashing.hpp"
#include "zspad/pipeline.hpp"
#include "zspad/synth.hpp"

namespace fs = std::filesystem;
using namespace zspad;

namespace {

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void add_preprocess_flags(CLI::App* cmd, PreprocessConfig& pre) {
  cmd->add_option("--nlm-strength", pre.nlm_filter_strength, "NLM filter strength (8-bit scale)");
  cmd->add_option("--nlm-template", pre.nlm_template, "NLM template window (odd)");
  cmd->add_option("--nlm-search", pre.nlm_search, "NLM search window (odd)");
  cmd->add_flag("--denoise,!--no-denoise", pre.denoise_enabled, "Apply NLM denoising");
}

std::string config_placeholder;  // value consumed by expand_config_args below

void add_config_option(CLI::App* cmd) {
  cmd->add_option("--config", config_placeholder,
                  "Flat key=value config file; flags override file values (env ZSPAD_CONFIG)");
}

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t");
  std::string t = s.substr(a, b - a + 1);
  if (t.size() >= 2 && ((t.front() == '"' && t.back() == '"') ||
                        (t.front() == '\'' && t.back() == '\'')))
    t = t.substr(1, t.size() - 2);
  return t;
}

// Expands `--config file` (or ZSPAD_CONFIG) into `--key=value` tokens placed
// right after the subcommand name; explicit command-line flags come later
// and win via the take-last policy.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string cfg_path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      cfg_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      cfg_path = args[i].substr(9);
  }
  if (cfg_path.empty())
    if (const char* env = std::getenv("ZSPAD_CONFIG")) cfg_path = env;
  if (cfg_path.empty() || args.empty()) return args;

  std::ifstream in(cfg_path);
  if (!in) throw IoError("cannot open config file '" + cfg_path + "'");
  std::vector<std::string> injected;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw FormatError("config file: malformed line '" + line + "'");
    injected.push_back("--" + trim(stripped.substr(0, eq)) + "=" +
                       trim(stripped.substr(eq + 1)));
  }

  std::vector<std::string> out;
  out.push_back(args[0]);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Zero-shot OCT fingerprint presentation-attack detection pipeline"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // ---- synth ----
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic phantom dataset");
  add_config_option(synth_cmd);
  std::string synth_out = "data";
  uint64_t synth_seed = 7;
  SynthParams sp;
  int n_model = 8, n_score = 4, n_test_bona = 6, n_test_pai = 6, n_test_transparent = 0;
  synth_cmd->add_option("--out", synth_out, "Output directory")->envname("ZSPAD_DATA");
  synth_cmd->add_option("--seed", synth_seed, "Dataset seed")->envname("ZSPAD_SEED");
  synth_cmd->add_option("--height", sp.height, "B-scan height");
  synth_cmd->add_option("--width", sp.width, "B-scan width");
  synth_cmd->add_option("--bscans", sp.bscans_per_volume, "B-scans per volume");
  synth_cmd->add_option("--speckle", sp.speckle_sigma, "Multiplicative speckle sigma");
  synth_cmd->add_option("--jitter", sp.layer_jitter, "Per-column layer jitter (pixels)");
  synth_cmd->add_option("--model", n_model, "Bonafide volumes in the model split");
  synth_cmd->add_option("--score", n_score, "Bonafide volumes in the score split");
  synth_cmd->add_option("--test-bona", n_test_bona, "Bonafide volumes in the test split");
  synth_cmd->add_option("--test-pai", n_test_pai,
                        "PAI volumes in the test split (2D / 3D-pressed / 3D-unpressed round-robin)");
  synth_cmd->add_option("--test-transparent", n_test_transparent,
                        "Transparent-PAI volumes in the test split (known miss)");

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "Train the autoencoder on the model split");
  add_config_option(train_cmd);
  std::string train_data, train_model_out = "model.zspc";
  AEConfig ae;
  PreprocessConfig train_pre;
  int train_threads = 0;
  train_cmd->add_option("--data", train_data, "Dataset manifest")->required()->envname("ZSPAD_DATA_MANIFEST");
  train_cmd->add_option("--model-out", train_model_out, "Checkpoint output path");
  train_cmd->add_option("--height", ae.input_height, "Working height");
  train_cmd->add_option("--width", ae.input_width, "Working width");
  train_cmd->add_option("--epochs", ae.epochs, "Training epochs");
  train_cmd->add_option("--batch", ae.batch_size, "Batch size");
  train_cmd->add_option("--lr", ae.learning_rate, "Adam learning rate");
  train_cmd->add_option("--beta1", ae.adam_beta1, "Adam beta1");
  train_cmd->add_option("--beta2", ae.adam_beta2, "Adam beta2");
  train_cmd->add_option("--seed", ae.seed, "Run seed")->envname("ZSPAD_SEED");
  train_cmd->add_option("--base-channels", ae.base_channels, "Base channel width");
  train_cmd->add_option("--encoder-blocks", ae.encoder_blocks, "Encoder block count");
  train_cmd->add_option("--decoder-blocks", ae.decoder_blocks, "Decoder block count");
  train_cmd->add_option("--leaky-slope", ae.leaky_slope, "Leaky rectifier slope");
  train_cmd->add_option("--init-std", ae.init_std, "Weight init standard deviation");
  train_cmd->add_option("--threads", train_threads, "Worker threads (0 = hardware)");
  add_preprocess_flags(train_cmd, train_pre);

  // ---- calibrate ----
  auto* cal_cmd = app.add_subcommand("calibrate", "Build score-set calibration");
  add_config_option(cal_cmd);
  std::string cal_data, cal_model = "model.zspc", cal_out = "calibration.txt";
  PreprocessConfig cal_pre;
  cal_cmd->add_option("--data", cal_data, "Dataset manifest")->required()->envname("ZSPAD_DATA_MANIFEST");
  cal_cmd->add_option("--model", cal_model, "Checkpoint path")->envname("ZSPAD_MODEL");
  cal_cmd->add_option("--calib-out", cal_out, "Calibration output path");
  add_preprocess_flags(cal_cmd, cal_pre);

  // ---- score ----
  auto* score_cmd = app.add_subcommand("score", "Score every test-split volume");
  add_config_option(score_cmd);
  std::string score_data, score_model = "model.zspc", score_calib = "calibration.txt",
              score_out = "scores.csv";
  PreprocessConfig score_pre;
  Thresholds thresholds;
  score_cmd->add_option("--data", score_data, "Dataset manifest")->required()->envname("ZSPAD_DATA_MANIFEST");
  score_cmd->add_option("--model", score_model, "Checkpoint path")->envname("ZSPAD_MODEL");
  score_cmd->add_option("--calib", score_calib, "Calibration path")->envname("ZSPAD_CALIB");
  score_cmd->add_option("--out", score_out, "Score CSV output path");
  score_cmd->add_option("--s-thres", thresholds.s_thres, "MS voting S-threshold");
  score_cmd->add_option("--m-thres", thresholds.m_thres, "MS voting M-threshold");
  add_preprocess_flags(score_cmd, score_pre);

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a score CSV");
  add_config_option(eval_cmd);
  std::string eval_scores = "scores.csv", eval_report_dir = "reports", eval_only;
  eval_cmd->add_option("--scores", eval_scores, "Score CSV path");
  eval_cmd->add_option("--report-dir", eval_report_dir, "Report output directory");
  eval_cmd->add_option("--score", eval_only, "Restrict to one score name (e.g. ms, pd_postp)");

  std::vector<std::string> expanded;
  try {
    expanded = expand_config_args(argc, argv);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::vector<const char*> cargv;
  cargv.push_back(argv[0]);
  for (const std::string& a : expanded) cargv.push_back(a.c_str());

  try {
    app.parse(int(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // help/version exit 0, parse problems exit 2
  }

  try {
    if (synth_cmd->parsed()) {
      validate(sp);
      std::vector<SynthRequest> reqs;
      reqs.push_back({SplitTag::Model, SynthPreset::Bonafide, n_model});
      reqs.push_back({SplitTag::Score, SynthPreset::Bonafide, n_score});
      reqs.push_back({SplitTag::Test, SynthPreset::Bonafide, n_test_bona});
      const SynthPreset pais[] = {SynthPreset::Pai2d, SynthPreset::Pai3dPressed,
                                  SynthPreset::Pai3dUnpressed};
      int counts[3] = {0, 0, 0};
      for (int i = 0; i < n_test_pai; ++i) ++counts[i % 3];
      for (int i = 0; i < 3; ++i)
        if (counts[i] > 0) reqs.push_back({SplitTag::Test, pais[i], counts[i]});
      if (n_test_transparent > 0)
        reqs.push_back({SplitTag::Test, SynthPreset::PaiTransparent, n_test_transparent});

      const GeneratedDataset ds = generate_dataset(synth_seed, reqs, sp, synth_out);
      std::cout << "wrote " << ds.volumes.size() << " volumes to " << synth_out << " ("
                << ds.manifest_path.string() << ")\n";
      return 0;
    }

    if (train_cmd->parsed()) {
      train_pre.target_height = ae.input_height;
      train_pre.target_width = ae.input_width;
      validate(train_pre);
      validate(ae);
      const Dataset ds = load_manifest(train_data);
      TrainOptions opts;
      opts.threads = train_threads > 0 ? train_threads
                                       : int(std::max(1u, std::thread::hardware_concurrency()));
      std::cout << "epoch,loss\n";
      opts.on_epoch = [](int epoch, double loss) {
        std::cout << epoch << "," << fmt(loss) << "\n" << std::flush;
      };
      const AutoencoderModel model = train_from_dataset(ds, ae, train_pre, opts);
      save_model(model, train_model_out);
      std::cerr << "checkpoint written to " << train_model_out << "\n";
      return 0;
    }

    if (cal_cmd->parsed()) {
      if (!fs::exists(cal_model)) {
        std::cerr << "error: checkpoint '" << cal_model << "' not found\n";
        return 7;
      }
      const AutoencoderModel model = load_model(cal_model);
      cal_pre.target_height = model.config.input_height;
      cal_pre.target_width = model.config.input_width;
      validate(cal_pre);
      const Dataset ds = load_manifest(cal_data);
      ScoreCalibration cal = calibrate_from_dataset(ds, model, cal_pre);
      cal.model_hash = fnv1a64_file(cal_model);
      save_calibration(cal, cal_out);
      std::cout << "calibration: m_bar=" << fmt(cal.m_bar) << " m_max=" << fmt(cal.m_max)
                << " s_bar=" << fmt(cal.s_bar) << " s_max=" << fmt(cal.s_max)
                << " pooled=(" << fmt(cal.pooled.m) << "," << fmt(cal.pooled.s) << ")\n";
      return 0;
    }

    if (score_cmd->parsed()) {
      if (!fs::exists(score_model)) {
        std::cerr << "error: checkpoint '" << score_model << "' not found\n";
        return 7;
      }
      if (!fs::exists(score_calib)) {
        std::cerr << "error: calibration '" << score_calib << "' not found\n";
        return 7;
      }
      const AutoencoderModel model = load_model(score_model);
      const ScoreCalibration cal = load_calibration(score_calib);
      if (cal.model_hash != 0 && cal.model_hash != fnv1a64_file(score_model))
        std::cerr << "warning: calibration was built with a different checkpoint\n";
      score_pre.target_height = model.config.input_height;
      score_pre.target_width = model.config.input_width;
      validate(score_pre);
      const Dataset ds = load_manifest(score_data);
      const std::vector<ScoreRow> rows = score_dataset(ds, model, score_pre, cal, thresholds);
      write_score_csv(score_out, rows);
      std::cout << "scored " << rows.size() << " volumes -> " << score_out << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      if (!fs::exists(eval_scores)) {
        std::cerr << "error: score CSV '" << eval_scores << "' not found\n";
        return 3;
      }
      const std::vector<ScoreRow> rows = read_score_csv(eval_scores);
      int n_bona = 0, n_pa = 0;
      for (const ScoreRow& row : rows) {
        if (row.truth == Label::Bonafide) ++n_bona;
        if (row.truth == Label::PA) ++n_pa;
      }
      if (n_bona == 0 || n_pa == 0) {
        std::cerr << "error: evaluation needs both classes (" << n_bona << " bonafide, "
                  << n_pa << " pa)\n";
        return 8;
      }
      std::optional<std::string> only;
      if (!eval_only.empty()) only = eval_only;
      const std::map<std::string, EvalReport> reports = evaluate_rows(rows, only);

      fs::create_directories(eval_report_dir);
      write_scatter_csv(fs::path(eval_report_dir) / "scatter.csv", rows);

      std::printf("%-10s %8s %10s %10s %12s\n", "score", "err", "tpr@0.10", "tpr@0.05",
                  "threshold");
      for (const auto& [name, rep] : reports) {
        export_report(rep, fs::path(eval_report_dir) / ("report_" + name + ".csv"));
        std::printf("%-10s %8.4f %10.4f %10.4f %12.6g\n", name.c_str(), rep.err,
                    rep.tpr_at_fpr10, rep.tpr_at_fpr5, rep.best_threshold);
      }
      return 0;
    }
  } catch (const ZeroPaViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const CalibrationDegenerateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 6;
  } catch (const DegenerateDensityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 6;
  } catch (const IncompatibleCheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 7;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const CorruptionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ManifestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
