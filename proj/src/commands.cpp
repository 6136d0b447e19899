#include "menkf/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "menkf/error.hpp"
#include "menkf/parallel.hpp"

namespace menkf {

using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_json(const fs::path& path, const json& doc) { io::write_file(path, doc.dump(2) + "\n"); }

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

std::vector<Dataset> simulate_replicates(const RunConfig& cfg) {
  const RngStream root(cfg.seed);
  const BaseData base = gen_base_probs(cfg.sim, root.child(kBaseStream));
  return gen_replicates(cfg.sim, base, root.child(kReplicateStream), cfg.study.parallel,
                        cfg.study.threads);
}

std::pair<Dataset, Dataset> split_replicate(const RunConfig& cfg, const Dataset& data,
                                            std::uint64_t replicate) {
  RngStream rng = RngStream(cfg.seed).child(kSplitStream).child(replicate);
  return split(data, cfg.split.train, cfg.split.test, rng);
}

void check_dims(const io::Checkpoint& ckpt, const Dataset& data) {
  if (static_cast<std::size_t>(data.features_f.cols()) != ckpt.arm_f.input_dim ||
      static_cast<std::size_t>(data.features_g.cols()) != ckpt.arm_g.input_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dataset has p=" + std::to_string(data.features_f.cols()) +
                    ", q=" + std::to_string(data.features_g.cols()) +
                    " but checkpoint expects p=" + std::to_string(ckpt.arm_f.input_dim) +
                    ", q=" + std::to_string(ckpt.arm_g.input_dim));
  }
}

}  // namespace

std::string replicate_file_name(std::size_t j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "replicate_%03zu.csv", j);
  return buf;
}

SimulateResult cmd_simulate(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  const std::vector<Dataset> reps = simulate_replicates(cfg);
  SimulateResult result;
  json files = json::array();
  for (std::size_t j = 0; j < reps.size(); ++j) {
    const std::string name = replicate_file_name(j);
    const std::string text = io::dataset_csv(reps[j]);
    const fs::path path = out_dir / name;
    io::write_file(path, text);
    files.push_back({{"file", name}, {"sha256", io::sha256_hex(text)}});
    result.files.push_back(path);
  }
  const json manifest = {
      {"seed", cfg.seed},
      {"scenario", to_string(cfg.sim.scenario)},
      {"replicates", reps.size()},
      {"points", cfg.sim.points},
      {"files", files},
      {"config", results_json(cfg)},
  };
  result.manifest = out_dir / "manifest.json";
  write_json(result.manifest, manifest);
  return result;
}

void verify_manifest(const fs::path& manifest, const fs::path& dataset) {
  json doc;
  try {
    doc = json::parse(io::read_file(manifest));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, manifest.string() + ": " + e.what());
  }
  const std::string name = dataset.filename().string();
  if (!doc.contains("files") || !doc.at("files").is_array()) {
    throw Error(ErrorCode::kParse, manifest.string() + ": missing 'files' array");
  }
  for (const json& entry : doc.at("files")) {
    if (entry.value("file", "") != name) continue;
    const std::string actual = io::sha256_file(dataset);
    if (actual != entry.value("sha256", "")) {
      throw Error(ErrorCode::kIo, dataset.string() + ": checksum mismatch against " +
                                      manifest.string());
    }
    return;
  }
  throw Error(ErrorCode::kIo, name + " is not listed in " + manifest.string());
}

io::Checkpoint train_dataset(const RunConfig& cfg, const Dataset& train, std::uint64_t replicate,
                             TrainingTrace* trace) {
  MenkfConfig mc = cfg.menkf;
  mc.seed = cfg.seed;
  mc.arm_f.input_dim = static_cast<std::size_t>(train.features_f.cols());
  mc.arm_g.input_dim = static_cast<std::size_t>(train.features_g.cols());
  const std::vector<Batch> batches =
      make_batches(train.features_f, train.features_g, train.target_logit, mc.batch_size);
  FitResult fitted = fit(batches, mc, RngStream(cfg.seed).child(kTrainStream).child(replicate));
  if (trace != nullptr) *trace = std::move(fitted.trace);
  return io::Checkpoint{mc.arm_f, mc.arm_g, config_hash(cfg), std::move(fitted.ensemble)};
}

TrainResult cmd_train(const RunConfig& cfg, const fs::path& dataset, const fs::path& out_dir,
                      const TrainOptions& opts) {
  cfg.validate();
  if (opts.manifest) verify_manifest(*opts.manifest, dataset);
  Dataset data = io::read_dataset_csv(dataset);
  if (opts.split) {
    auto [train, test] = split_replicate(cfg, data, opts.replicate);
    io::write_dataset_csv(out_dir / "train.csv", train);
    io::write_dataset_csv(out_dir / "test.csv", test);
    data = std::move(train);
  }
  TrainResult result{{}, {}, out_dir / "checkpoint.bin", out_dir / "trace.csv"};
  result.checkpoint = train_dataset(cfg, data, opts.replicate, &result.trace);
  io::save_checkpoint(result.checkpoint_path, result.checkpoint);
  io::write_trace_csv(result.trace_path, result.trace);
  return result;
}

std::vector<double> evaluation_truth(const Dataset& data) {
  std::vector<double> truth(static_cast<std::size_t>(data.size()));
  const bool have_prob = data.true_prob.size() == data.size();
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    truth[static_cast<std::size_t>(i)] =
        have_prob ? data.true_prob(i) : inverse_logit(data.target_logit(i));
  }
  return truth;
}

EvaluateResult evaluate_dataset(const RunConfig& cfg, const io::Checkpoint& ckpt,
                                const Dataset& test) {
  check_dims(ckpt, test);
  const auto start = std::chrono::steady_clock::now();
  EvaluateResult out;
  const StateLayout layout = ckpt.layout();
  out.summaries = predict(ckpt.ensemble, test.features_f, test.features_g, layout, ckpt.arm_f,
                          ckpt.arm_g, cfg.interval_level, cfg.point_estimator);
  out.truth = evaluation_truth(test);
  out.report = adequacy(out.summaries, out.truth, ckpt.ensemble, layout);
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

json report_json(const AdequacyReport& r) {
  return {
      {"coverage", r.coverage},
      {"avg_width", r.avg_width},
      {"mae", r.mae},
      {"mean_arm_weight", r.mean_arm_weight},
      {"mean_arm_weight_f", 1.0 - r.mean_arm_weight},
      {"n_test", r.n_test},
  };
}

EvaluateResult cmd_evaluate(const RunConfig& cfg, const fs::path& checkpoint,
                            const fs::path& dataset, const fs::path& out_dir,
                            bool include_timing) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const io::Checkpoint ckpt = io::load_checkpoint(checkpoint);
  const Dataset test = io::read_dataset_csv(dataset);
  EvaluateResult out = evaluate_dataset(cfg, ckpt, test);
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json report = report_json(out.report);
  report["config_hash"] = hex64(ckpt.config_hash);
  if (include_timing) report["wall_clock_seconds"] = out.seconds;
  write_json(out_dir / "report.json", report);
  io::write_intervals_csv(out_dir / "intervals.csv", out.summaries, out.truth);
  return out;
}

StudySummary summarize_study(const std::vector<ReplicateOutcome>& outcomes) {
  StudySummary s;
  s.replicates = outcomes.size();
  std::vector<double> cov, width, mae, wg;
  std::size_t hits = 0;
  std::size_t total = 0;
  for (const ReplicateOutcome& o : outcomes) {
    if (!o.ok) {
      ++s.failed;
      continue;
    }
    cov.push_back(o.report.coverage);
    width.push_back(o.report.avg_width);
    mae.push_back(o.report.mae);
    wg.push_back(o.report.mean_arm_weight);
    for (std::size_t i = 0; i < o.summaries.size(); ++i) {
      const PointSummary& p = o.summaries[i];
      if (p.lo <= o.truth[i] && o.truth[i] <= p.hi) ++hits;
      ++total;
    }
  }
  s.coverage_pooled = total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
  s.coverage_mean = mean_of(cov);
  s.width_mean = mean_of(width);
  if (width.size() > 1) {
    double ss = 0.0;
    for (double w : width) ss += (w - s.width_mean) * (w - s.width_mean);
    s.width_sd = std::sqrt(ss / static_cast<double>(width.size() - 1));
  }
  s.mae_mean = mean_of(mae);
  s.weight_g_mean = mean_of(wg);
  s.weight_f_mean = wg.empty() ? 0.0 : 1.0 - s.weight_g_mean;
  return s;
}

StudyResult run_study(const RunConfig& cfg) {
  cfg.validate();
  const std::vector<Dataset> reps = simulate_replicates(cfg);
  StudyResult result;
  result.outcomes.resize(reps.size());
  parallel_for(reps.size(), cfg.study.parallel, cfg.study.threads, [&](std::size_t j) {
    ReplicateOutcome& o = result.outcomes[j];
    o.index = j;
    try {
      auto [train, test] = split_replicate(cfg, reps[j], j);
      io::Checkpoint ckpt = train_dataset(cfg, train, j);
      EvaluateResult ev = evaluate_dataset(cfg, ckpt, test);
      if (cfg.study.save_checkpoints) o.checkpoint = std::move(ckpt);
      o.report = ev.report;
      o.summaries = std::move(ev.summaries);
      o.truth = std::move(ev.truth);
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  });
  result.summary = summarize_study(result.outcomes);
  return result;
}

json study_json(const RunConfig& cfg, const StudyResult& result) {
  const StudySummary& s = result.summary;
  json reps = json::array();
  for (const ReplicateOutcome& o : result.outcomes) {
    json r = {{"replicate", o.index}, {"ok", o.ok}};
    if (o.ok) {
      r["report"] = report_json(o.report);
    } else {
      r["error"] = o.error;
    }
    reps.push_back(r);
  }
  return {
      {"scenario", to_string(cfg.sim.scenario)},
      {"seed", cfg.seed},
      {"config_hash", hex64(config_hash(cfg))},
      {"summary",
       {{"replicates", s.replicates},
        {"failed", s.failed},
        {"coverage_pooled", s.coverage_pooled},
        {"coverage_mean", s.coverage_mean},
        {"width_mean", s.width_mean},
        {"width_sd", s.width_sd},
        {"mae_mean", s.mae_mean},
        {"mean_arm_weight", s.weight_g_mean},
        {"mean_arm_weight_f", s.weight_f_mean}}},
      {"replicate_reports", reps},
      {"config", results_json(cfg)},
  };
}

StudyResult cmd_replicate_study(const RunConfig& cfg, const fs::path& out_dir) {
  StudyResult result = run_study(cfg);
  std::ostringstream csv;
  csv << "replicate,ok,coverage,avg_width,mae,mean_arm_weight,mean_arm_weight_f,n_test\n";
  for (const ReplicateOutcome& o : result.outcomes) {
    csv << o.index << ',' << (o.ok ? 1 : 0);
    if (o.ok) {
      const AdequacyReport& r = o.report;
      csv << ',' << io::format_double(r.coverage) << ',' << io::format_double(r.avg_width)
          << ',' << io::format_double(r.mae) << ',' << io::format_double(r.mean_arm_weight)
          << ',' << io::format_double(1.0 - r.mean_arm_weight) << ',' << r.n_test;
      char dir[32];
      std::snprintf(dir, sizeof dir, "replicate_%03zu", o.index);
      write_json(out_dir / dir / "report.json", report_json(r));
      io::write_intervals_csv(out_dir / dir / "intervals.csv", o.summaries, o.truth);
      if (o.checkpoint) io::save_checkpoint(out_dir / dir / "checkpoint.bin", *o.checkpoint);
    } else {
      csv << ",,,,,,,";
    }
    csv << '\n';
  }
  io::write_file(out_dir / "study.csv", csv.str());
  write_json(out_dir / "study.json", study_json(cfg, result));
  return result;
}

}  // namespace menkf
