#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "menkf/config.hpp"
#include "menkf/io.hpp"
#include "menkf/uq.hpp"

namespace menkf {

namespace fs = std::filesystem;

/// Stream ids under RngStream(cfg.seed). simulate, train and the study all
/// derive their draws from these so a study replicate equals the
/// simulate -> train -> evaluate pipeline run on the same file.
inline constexpr std::uint64_t kBaseStream = 0;
inline constexpr std::uint64_t kReplicateStream = 1;
inline constexpr std::uint64_t kSplitStream = 2;
inline constexpr std::uint64_t kTrainStream = 3;

std::string replicate_file_name(std::size_t j);

struct SimulateResult {
  std::vector<fs::path> files;
  fs::path manifest;
};

/// Writes replicate_XXX.csv for every replicate plus manifest.json.
SimulateResult cmd_simulate(const RunConfig& cfg, const fs::path& out_dir);

/// Throws Error{kIo} when a listed file is missing or its digest differs.
void verify_manifest(const fs::path& manifest, const fs::path& dataset);

struct TrainOptions {
  // Subsample cfg.split.train / cfg.split.test rows first and write them as
  // train.csv / test.csv next to the checkpoint.
  bool split = false;
  // Replicate index keying the split and training streams.
  std::uint64_t replicate = 0;
  std::optional<fs::path> manifest;
};

struct TrainResult {
  io::Checkpoint checkpoint;
  TrainingTrace trace;
  fs::path checkpoint_path;
  fs::path trace_path;
};

TrainResult cmd_train(const RunConfig& cfg, const fs::path& dataset, const fs::path& out_dir,
                      const TrainOptions& opts = {});

/// Trains on an in-memory dataset without touching disk.
io::Checkpoint train_dataset(const RunConfig& cfg, const Dataset& train, std::uint64_t replicate,
                             TrainingTrace* trace = nullptr);

struct EvaluateResult {
  AdequacyReport report;
  std::vector<PointSummary> summaries;
  std::vector<double> truth;
  double seconds = 0.0;
};

/// Truth is the true_prob column when present, else inverse_logit(target_logit).
std::vector<double> evaluation_truth(const Dataset& data);

EvaluateResult evaluate_dataset(const RunConfig& cfg, const io::Checkpoint& ckpt,
                                const Dataset& test);

nlohmann::json report_json(const AdequacyReport& report);

/// Writes report.json and intervals.csv. The wall-clock field is only written
/// when include_timing is set, so default outputs are reproducible bit for bit.
EvaluateResult cmd_evaluate(const RunConfig& cfg, const fs::path& checkpoint,
                            const fs::path& dataset, const fs::path& out_dir,
                            bool include_timing = false);

struct ReplicateOutcome {
  std::size_t index = 0;
  bool ok = false;
  std::string error;
  AdequacyReport report;
  std::vector<PointSummary> summaries;
  std::vector<double> truth;
  std::optional<io::Checkpoint> checkpoint;  // kept when study.save_checkpoints
};

struct StudySummary {
  std::size_t replicates = 0;
  std::size_t failed = 0;
  double coverage_pooled = 0.0;
  double coverage_mean = 0.0;
  double width_mean = 0.0;
  double width_sd = 0.0;
  double mae_mean = 0.0;
  double weight_g_mean = 0.0;  // mean sigmoid(a)
  double weight_f_mean = 0.0;  // mean 1 - sigmoid(a)
};

struct StudyResult {
  std::vector<ReplicateOutcome> outcomes;
  StudySummary summary;
};

/// simulate -> split -> train -> evaluate for every replicate, in memory.
StudyResult run_study(const RunConfig& cfg);

StudySummary summarize_study(const std::vector<ReplicateOutcome>& outcomes);

nlohmann::json study_json(const RunConfig& cfg, const StudyResult& result);

/// run_study plus study.json, study.csv and one subdirectory per replicate.
StudyResult cmd_replicate_study(const RunConfig& cfg, const fs::path& out_dir);

}  // namespace menkf
