#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "menkf/simgen.hpp"
#include "menkf/trainer.hpp"
#include "menkf/uq.hpp"

namespace menkf {

struct SplitConfig {
  std::size_t train = 66;
  std::size_t test = 8;
};

struct StudyConfig {
  bool parallel = false;
  unsigned threads = 0;
  bool save_checkpoints = false;
};

/// Everything a command needs. The top-level seed feeds every stochastic
/// step; MENKF_SEED overrides it.
struct RunConfig {
  std::uint64_t seed = 20240521;
  MenkfConfig menkf;
  SimConfig sim;
  SplitConfig split;
  StudyConfig study;
  double interval_level = 0.95;
  PointEstimator point_estimator = PointEstimator::kMean;
  std::string output_dir = "menkf_out";

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);

/// to_json without the scheduling keys (parallel, threads), which never change
/// results. Embedded in output files so they do not depend on scheduling.
nlohmann::json results_json(const RunConfig& cfg);

/// Missing keys keep their defaults; unknown keys and wrong types throw
/// Error{kParse}.
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// Replaces cfg.seed with $MENKF_SEED when it is set.
void apply_env_overrides(RunConfig& cfg);

/// Dotted names of every config key, e.g. "menkf.ensemble_size".
std::vector<std::string> config_keys();

/// Fingerprint of the trainer section plus seed, scheduling keys excluded.
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace menkf
