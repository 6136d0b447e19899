#pragma once

#include <cstdint>
#include <random>

namespace menkf {

/// Seeded random stream. Equal (master_seed, stream_id) pairs give identical
/// sequences; child() derives a new stream deterministically, so parallel
/// work can be keyed by an index instead of sharing one engine.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id = 0);

  RngStream child(std::uint64_t id) const;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  double normal();
  double normal(double mean, double sd);
  double uniform();
  double gamma(double shape, double scale);
  std::uint64_t next_u64();

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace menkf
