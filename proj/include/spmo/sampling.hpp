#pragma once

#include <Eigen/Core>

#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "spmo/detail/sobol_table.hpp"
#include "spmo/errors.hpp"
#include "spmo/rng.hpp"

namespace spmo {

using Point = Eigen::VectorXd;

enum class SobolMode { scrambled, unscrambled };

/// Sobol sequence generator with optional linear-matrix scrambling plus a
/// random digital shift, both keyed by the seed.
///
/// The all-zero first point of the underlying sequence is always skipped,
/// so the first emitted point of an unscrambled 1-D stream is 0.5.
/// Coordinates carry 32 bits and always lie in [0, 1).
class SobolStream {
 public:
  static constexpr int kBits = 32;

  SobolStream(std::size_t dimension, std::uint64_t scramble_seed,
              SobolMode mode = SobolMode::scrambled)
      : dimension_(dimension), seed_(scramble_seed), mode_(mode) {
    if (dimension == 0) throw InvalidArgument("sobol: dimension must be >= 1");
    if (dimension > detail::kSobolMaxDim) {
      throw UnsupportedDimension("sobol: dimension " + std::to_string(dimension) +
                                 " exceeds direction-number table (" +
                                 std::to_string(detail::kSobolMaxDim) + ")");
    }
    directions_.resize(dimension_);
    shift_.assign(dimension_, 0U);
    for (std::size_t j = 0; j < dimension_; ++j) directions_[j] = base_directions(j);
    if (mode_ == SobolMode::scrambled) scramble();
    state_ = shift_;
  }

  std::size_t dimension() const { return dimension_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t cursor() const { return cursor_; }

  /// Emits the next point and advances the cursor.
  Point next() {
    // Gray-code update from index cursor_ to cursor_ + 1 (index 0 is skipped).
    const int c = std::countr_one(cursor_);
    if (c >= kBits) throw InvalidState("sobol: sequence exhausted");
    Point p(static_cast<Eigen::Index>(dimension_));
    for (std::size_t j = 0; j < dimension_; ++j) {
      state_[j] ^= directions_[j][static_cast<std::size_t>(c)];
      p[static_cast<Eigen::Index>(j)] = static_cast<double>(state_[j]) * 0x1.0p-32;
    }
    ++cursor_;
    return p;
  }

  /// Emits `count` points as the rows of a count x dimension matrix.
  Eigen::MatrixXd take(std::size_t count) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dimension_));
    for (std::size_t i = 0; i < count; ++i) out.row(static_cast<Eigen::Index>(i)) = next().transpose();
    return out;
  }

 private:
  using Directions = std::array<std::uint32_t, kBits>;

  static Directions base_directions(std::size_t dim) {
    Directions v{};
    const auto& entry = detail::kSobolTable[dim];
    if (entry.degree == 0) {
      for (int k = 0; k < kBits; ++k) v[k] = 1U << (kBits - 1 - k);
      return v;
    }
    const int s = static_cast<int>(entry.degree);
    for (int k = 0; k < s && k < kBits; ++k) v[k] = entry.m[k] << (kBits - 1 - k);
    for (int k = s; k < kBits; ++k) {
      std::uint32_t value = v[k - s] ^ (v[k - s] >> s);
      for (int l = 1; l < s; ++l) {
        if ((entry.coeffs >> (s - 1 - l)) & 1U) value ^= v[k - l];
      }
      v[k] = value;
    }
    return v;
  }

  void scramble() {
    Rng rng(derive_seed(seed_, 0x50b01ULL));
    for (std::size_t j = 0; j < dimension_; ++j) {
      // Lower-triangular binary matrix with unit diagonal, acting on digits
      // ordered most-significant first.
      std::array<std::uint32_t, kBits> rows{};
      for (int k = 0; k < kBits; ++k) {
        const std::uint32_t bits = static_cast<std::uint32_t>(rng.next_u64() >> 32);
        const std::uint32_t upper = (k == 0) ? 0U : ~((1U << (kBits - k)) - 1U);
        rows[k] = (bits & upper) | (1U << (kBits - 1 - k));
      }
      for (auto& v : directions_[j]) {
        std::uint32_t scrambled = 0;
        for (int k = 0; k < kBits; ++k) {
          if (std::popcount(rows[k] & v) & 1) scrambled |= 1U << (kBits - 1 - k);
        }
        v = scrambled;
      }
      shift_[j] = static_cast<std::uint32_t>(rng.next_u64() >> 32);
    }
  }

  std::size_t dimension_;
  std::uint64_t seed_;
  SobolMode mode_;
  std::uint64_t cursor_ = 0;
  std::vector<Directions> directions_;
  std::vector<std::uint32_t> shift_;
  std::vector<std::uint32_t> state_;
};

/// `count` Sobol points in [0,1)^dim as rows.
inline Eigen::MatrixXd sobol_points(std::size_t dim, std::size_t count, std::uint64_t seed,
                                    SobolMode mode = SobolMode::scrambled) {
  SobolStream stream(dim, seed, mode);
  return stream.take(count);
}

/// Fixed matrix of standard-normal draws used as SAA base samples.
class BaseSampleMatrix {
 public:
  BaseSampleMatrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
      : values_(rows, cols), seed_(seed) {
    if (rows < 1 || cols < 1) throw InvalidArgument("base samples: rows and cols must be >= 1");
    Rng rng(seed);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) values_(r, c) = rng.normal();
    }
  }

  /// Wraps explicit draws (tests, replay).
  BaseSampleMatrix(Eigen::MatrixXd values, std::uint64_t seed) : values_(std::move(values)), seed_(seed) {}

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  std::uint64_t seed() const { return seed_; }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(Eigen::Index r, Eigen::Index c) const { return values_(r, c); }

 private:
  Eigen::MatrixXd values_;
  std::uint64_t seed_;
};

inline BaseSampleMatrix standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  return BaseSampleMatrix(rows, cols, seed);
}

}  // namespace spmo
