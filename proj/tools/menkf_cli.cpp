// menkf: simulate, train, evaluate and replicate-study front end.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "menkf/commands.hpp"
#include "menkf/config.hpp"
#include "menkf/error.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::string key_footer() {
  std::string out = "\nConfig keys (JSON, see `config print-defaults`):\n";
  for (const std::string& k : menkf::config_keys()) out += "  " + k + "\n";
  out += "\nEnvironment: MENKF_SEED overrides the config seed.\n";
  out += "Exit codes: 0 success, 1 usage or config error, 2 runtime error.\n";
  return out;
}

menkf::RunConfig load(const std::string& path) {
  menkf::RunConfig cfg = path.empty() ? menkf::RunConfig{} : menkf::load_run_config(path);
  menkf::apply_env_overrides(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix ensemble Kalman filter trainer for two-arm networks"};
  app.footer(key_footer());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;

  auto* simulate = app.add_subcommand("simulate", "Generate replicate datasets and a manifest");
  simulate->add_option("-c,--config", config_path, "Run config JSON");
  simulate->add_option("-o,--out", out_dir, "Output directory (default: output.dir)");

  std::string dataset;
  std::string manifest;
  bool do_split = false;
  std::uint64_t replicate = 0;
  auto* train = app.add_subcommand("train", "Fit an ensemble to a dataset CSV");
  train->add_option("-c,--config", config_path, "Run config JSON");
  train->add_option("-d,--data", dataset, "Dataset CSV")->required();
  train->add_option("-o,--out", out_dir, "Output directory (default: output.dir)");
  train->add_option("--manifest", manifest, "Verify the dataset checksum against this manifest");
  train->add_flag("--split", do_split, "Subsample split.train/split.test rows first");
  train->add_option("--replicate", replicate, "Replicate index keying the random streams");

  std::string checkpoint;
  bool timing = false;
  auto* evaluate = app.add_subcommand("evaluate", "Prediction intervals and adequacy report");
  evaluate->add_option("-c,--config", config_path, "Run config JSON");
  evaluate->add_option("-k,--checkpoint", checkpoint, "Checkpoint file")->required();
  evaluate->add_option("-d,--data", dataset, "Test dataset CSV")->required();
  evaluate->add_option("-o,--out", out_dir, "Output directory (default: output.dir)");
  evaluate->add_flag("--timing", timing, "Include wall-clock seconds in report.json");

  auto* study = app.add_subcommand("replicate-study", "Run simulate/split/train/evaluate per replicate");
  study->add_option("-c,--config", config_path, "Run config JSON");
  study->add_option("-o,--out", out_dir, "Output directory (default: output.dir)");

  auto* config = app.add_subcommand("config", "Config utilities");
  config->require_subcommand(1);
  auto* defaults = config->add_subcommand("print-defaults", "Print the default config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  menkf::RunConfig cfg;
  try {
    cfg = load(config_path);
  } catch (const menkf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == menkf::ErrorCode::kIo ? kExitRuntime : kExitUsage;
  }
  const std::filesystem::path out = out_dir.empty() ? cfg.output_dir : out_dir;

  try {
    if (*defaults) {
      std::cout << menkf::to_json(menkf::RunConfig{}).dump(2) << "\n";
    } else if (*simulate) {
      const auto r = menkf::cmd_simulate(cfg, out);
      std::cout << "wrote " << r.files.size() << " datasets and " << r.manifest.string() << "\n";
    } else if (*train) {
      menkf::TrainOptions opts;
      opts.split = do_split;
      opts.replicate = replicate;
      if (!manifest.empty()) opts.manifest = manifest;
      const auto r = menkf::cmd_train(cfg, dataset, out, opts);
      std::cout << "wrote " << r.checkpoint_path.string() << " and " << r.trace_path.string()
                << "\n";
    } else if (*evaluate) {
      const auto r = menkf::cmd_evaluate(cfg, checkpoint, dataset, out, timing);
      std::cout << menkf::report_json(r.report).dump(2) << "\n";
      std::cerr << "evaluated in " << r.seconds << " s\n";
    } else if (*study) {
      const auto r = menkf::cmd_replicate_study(cfg, out);
      std::cout << menkf::study_json(cfg, r).at("summary").dump(2) << "\n";
      for (const auto& o : r.outcomes) {
        if (!o.ok) std::cerr << "replicate " << o.index << " failed: " << o.error << "\n";
      }
      if (r.summary.failed > 0) return kExitRuntime;
    }
  } catch (const menkf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
