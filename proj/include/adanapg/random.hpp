#ifndef ADANAPG_RANDOM_HPP
#define ADANAPG_RANDOM_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace adanapg {

/// One Philox4x32 block with 10 rounds.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is identified by (base seed, replication index, draw counter).
/// Word `c` of stream (s, r) is half of the Philox block computed with
/// key = s and counter = (c / 2, r), so every replication owns a disjoint
/// slice of the counter space under the same key. Nothing is shared between
/// streams, which makes results independent of how replications are
/// scheduled across threads. The counter alone determines the position, so
/// (seed, replication, counter) is a complete serialized state.
class RandomStream {
 public:
  /// Replication index reserved for data generation (synthetic datasets,
  /// random covariance matrices), kept apart from solver replications.
  static constexpr std::uint64_t kDataReplication = ~std::uint64_t{0};

  RandomStream() = default;

  static RandomStream derive(std::uint64_t base_seed, std::uint64_t replication) {
    return RandomStream(base_seed, replication, 0);
  }
  static RandomStream restore(std::uint64_t base_seed, std::uint64_t replication,
                              std::uint64_t counter) {
    return RandomStream(base_seed, replication, counter);
  }

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1), 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller; one block per call.
  double normal();

  /// Fills `out` with standard normals, using both Box-Muller outputs.
  void fill_normal(std::span<double> out);

  /// Uniform integer in [0, n), Lemire's multiply-shift.
  std::uint64_t uniform_index(std::uint64_t n);

  std::uint64_t base_seed() const { return seed_; }
  std::uint64_t replication() const { return replication_; }
  std::uint64_t counter() const { return counter_; }

  /// "seed:replication:counter" in decimal.
  std::string serialize() const;
  static RandomStream deserialize(const std::string& text);

  friend bool operator==(const RandomStream& a, const RandomStream& b) {
    return a.seed_ == b.seed_ && a.replication_ == b.replication_ && a.counter_ == b.counter_;
  }

 private:
  RandomStream(std::uint64_t seed, std::uint64_t replication, std::uint64_t counter)
      : seed_(seed), replication_(replication), counter_(counter) {}

  std::array<std::uint64_t, 2> block(std::uint64_t index) const;

  std::uint64_t seed_ = 0;
  std::uint64_t replication_ = 0;
  std::uint64_t counter_ = 0;

  // cache of the most recently computed block; not part of the identity
  std::uint64_t cached_index_ = ~std::uint64_t{0};
  std::array<std::uint64_t, 2> cached_{};
};

}  // namespace adanapg

#endif
