#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace unlearn {

// Deterministic random stream with derived substreams.
//
// Everything is built on mt19937_64 plus explicitly coded transforms
// (no std::*_distribution, whose algorithms are implementation-defined),
// so a root seed reproduces the same draws under any standard library.
// Substreams are derived from the creation seed rather than the consumption
// state: the derivation tree is stable no matter how much of a parent
// stream has already been used.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  // Independent stream addressed by (tag_a, tag_b) under this stream's seed.
  RngStream substream(std::uint64_t tag_a, std::uint64_t tag_b = 0) const;

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  // Unbiased integer in [0, bound), bound >= 1.
  std::uint64_t uniform_index(std::uint64_t bound);
  // [0, 1) with 53 random bits.
  double uniform();
  double normal();
  // Gamma(shape, scale=1), shape > 0.
  double gamma(double shape);
  Eigen::VectorXd gaussian_vector(Eigen::Index p);
  // k distinct indices uniformly from {0,...,n-1}, returned sorted.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace unlearn
