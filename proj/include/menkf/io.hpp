#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "menkf/arms.hpp"
#include "menkf/enkf.hpp"
#include "menkf/simgen.hpp"
#include "menkf/trainer.hpp"
#include "menkf/uq.hpp"

namespace menkf::io {

namespace fs = std::filesystem;

/// Dataset CSV: header emb_f_0..emb_f_{p-1}, emb_g_0..emb_g_{q-1},
/// target_logit, then optional true_prob and label columns.
void write_dataset_csv(const fs::path& path, const Dataset& data);
std::string dataset_csv(const Dataset& data);

/// Parse failures name the offending row (1-based, header is row 1) and column.
Dataset read_dataset_csv(const fs::path& path);
Dataset parse_dataset_csv(std::string_view text, const std::string& source = "<memory>");

/// Trained ensemble plus what is needed to evaluate it.
struct Checkpoint {
  ArmSpec arm_f;
  ArmSpec arm_g;
  std::uint64_t config_hash = 0;
  Ensemble ensemble;

  StateLayout layout() const { return StateLayout(arm_f, arm_g); }
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Little-endian binary layout:
///   "MENKFCKP" | u32 version | arm f | arm g | u64 config_hash | u64 N | u64 d
///   | N*d f64 entries, member by member
/// where an arm is u64 input_dim | u32 activation | u64 depth | depth * u64.
void save_checkpoint(const fs::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const fs::path& path);

void write_trace_csv(const fs::path& path, const TrainingTrace& trace);

/// One row per test point: index, truth, point, median, lo, hi, width, covered.
void write_intervals_csv(const fs::path& path, std::span<const PointSummary> summaries,
                         std::span<const double> truth);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view contents);

/// Hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

/// 64-bit FNV-1a, used for config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);

/// Shortest round-trip decimal representation.
std::string format_double(double x);

}  // namespace menkf::io
