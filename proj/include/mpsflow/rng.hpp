#pragma once

#include <complex>
#include <cstdint>
#include <Eigen/Dense>

namespace mpsflow {

// xoshiro256++ with splitmix64 seeding. Implemented here rather than via
// <random> so that streams are bit-identical across standard libraries,
// which the reproducibility contract requires.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
    have_cached_normal_ = false;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0,1) with 53 significant bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal();
  std::complex<double> complex_normal();

  // Haar-distributed unitary of size m (QR of a complex Ginibre matrix with
  // the R-diagonal phase fix).
  Eigen::MatrixXcd haar_unitary(int m);

  // Deterministic child seed for stream `index` of the generator seeded with
  // `root`. Used to parallelize batches without sharing a stream.
  static std::uint64_t child_seed(std::uint64_t root, std::uint64_t index) {
    std::uint64_t x = root ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return splitmix64(x);
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t state_[4] = {};
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// Compensated (Neumaier) accumulator; keeps Monte-Carlo merges independent of
// summation grouping at the 1 ulp level.
class KahanSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      comp_ += (sum_ - t) + value;
    } else {
      comp_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace mpsflow
