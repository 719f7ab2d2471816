#include "adanapg/random.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace adanapg {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint64_t bits) {
  // (k + 0.5) / 2^53 for k in [0, 2^53): never 0, never 1
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::array<std::uint64_t, 2> RandomStream::block(std::uint64_t index) const {
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
      static_cast<std::uint32_t>(replication_), static_cast<std::uint32_t>(replication_ >> 32)};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                         static_cast<std::uint32_t>(seed_ >> 32)};
  const auto out = philox4x32_10(ctr, key);
  return {(static_cast<std::uint64_t>(out[1]) << 32) | out[0],
          (static_cast<std::uint64_t>(out[3]) << 32) | out[2]};
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t index = counter_ >> 1;
  if (index != cached_index_) {
    cached_ = block(index);
    cached_index_ = index;
  }
  return cached_[counter_++ & 1u];
}

double RandomStream::uniform() { return to_open_unit(next_u64()); }

double RandomStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void RandomStream::fill_normal(std::span<double> out) {
  std::size_t i = 0;
  for (; i + 1 < out.size(); i += 2) {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    out[i] = r * std::cos(angle);
    out[i + 1] = r * std::sin(angle);
  }
  if (i < out.size()) out[i] = normal();
}

std::uint64_t RandomStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  const unsigned __int128 product = static_cast<unsigned __int128>(next_u64()) * n;
  return static_cast<std::uint64_t>(product >> 64);
}

std::string RandomStream::serialize() const {
  std::ostringstream os;
  os << seed_ << ':' << replication_ << ':' << counter_;
  return os.str();
}

RandomStream RandomStream::deserialize(const std::string& text) {
  std::istringstream is(text);
  std::uint64_t seed = 0, replication = 0, counter = 0;
  char c1 = 0, c2 = 0;
  if (!(is >> seed >> c1 >> replication >> c2 >> counter) || c1 != ':' || c2 != ':' ||
      is.peek() != std::char_traits<char>::eof()) {
    throw std::invalid_argument("malformed random stream state: '" + text + "'");
  }
  return restore(seed, replication, counter);
}

}  // namespace adanapg
