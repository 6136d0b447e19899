#include "menkf/rng.hpp"

namespace menkf {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed),
      stream_id_(stream_id),
      engine_(splitmix64(splitmix64(master_seed) ^ stream_id)) {}

RngStream RngStream::child(std::uint64_t id) const {
  return RngStream(master_seed_, splitmix64(stream_id_ ^ splitmix64(id + 1)));
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::normal(double mean, double sd) { return mean + sd * normal(); }

double RngStream::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double RngStream::gamma(double shape, double scale) {
  return std::gamma_distribution<double>(shape, scale)(engine_);
}

std::uint64_t RngStream::next_u64() { return engine_(); }

}  // namespace menkf
