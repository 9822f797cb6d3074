#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "olt/errors.hpp"
#include "olt/model.hpp"

namespace olt {

/// The three ways of extracting a binary variable from an ordinal response:
/// a marginal group split P(Y >= r), the conditional split P(Y >= r | Y >= r-1),
/// and the adjacent split P(Y = r | Y in {r-1, r}).
enum class DichotomizationKind { CumulativeSplit, SequentialConditional, AdjacentConditional };

/// true iff bits form (1,...,1,0,...,0). Entries must be 0/1; the empty
/// vector is vacuously Guttman.
inline bool is_guttman(std::span<const int> bits) {
  for (int b : bits) {
    if (b != 0 && b != 1) throw InvalidInputError("guttman test: entries must be 0 or 1");
  }
  for (std::size_t i = 0; i + 1 < bits.size(); ++i) {
    if (bits[i] < bits[i + 1]) return false;
  }
  return true;
}

/// Binary vector with nonincreasing entries; bijective with scores 0..k.
class GuttmanVector {
 public:
  static GuttmanVector from_bits(std::vector<int> bits) {
    if (!is_guttman(bits)) {
      throw InvariantViolationError("bits do not form a Guttman vector (1,...,1,0,...,0)");
    }
    return GuttmanVector(std::move(bits));
  }

  static GuttmanVector from_score(int score, int k) {
    if (k < 0) throw InvalidInputError("guttman vector: negative length");
    if (score < 0 || score > k) throw IndexError("score outside 0..k");
    std::vector<int> bits(static_cast<std::size_t>(k), 0);
    std::fill_n(bits.begin(), score, 1);
    return GuttmanVector(std::move(bits));
  }

  const std::vector<int>& bits() const noexcept { return bits_; }
  int k() const noexcept { return static_cast<int>(bits_.size()); }
  int score() const noexcept { return std::accumulate(bits_.begin(), bits_.end(), 0); }

 private:
  explicit GuttmanVector(std::vector<int> bits) : bits_(std::move(bits)) {}
  std::vector<int> bits_;
};

inline GuttmanVector score_to_guttman(int score, int k) { return GuttmanVector::from_score(score, k); }

inline int guttman_to_score(const GuttmanVector& v) noexcept { return v.score(); }

/// Validating overload for raw bit vectors.
inline int guttman_to_score(std::span<const int> bits) {
  return GuttmanVector::from_bits(std::vector<int>(bits.begin(), bits.end())).score();
}

// Any conditioning event below this mass makes double-precision ratios
// meaningless.
inline constexpr double kDegenerateMass = 1e-300;

/// Binary success probability implied by splitting `dist` at category r,
/// 1 <= r <= k.
inline double dichotomize(const OrdinalDistribution& dist, DichotomizationKind kind, int r) {
  const int k = dist.k();
  if (r < 1 || r > k) throw IndexError("split index outside 1..k");
  const auto& p = dist.probs();
  const auto tail = [&](int from) {
    double s = 0.0;
    for (int c = k; c >= from; --c) s += p[static_cast<std::size_t>(c)];
    return s;
  };
  switch (kind) {
    case DichotomizationKind::CumulativeSplit:
      return std::min(tail(r), 1.0);
    case DichotomizationKind::SequentialConditional: {
      const double denom = tail(r - 1);
      if (denom < kDegenerateMass) {
        throw DegenerateConditionError("dichotomize: P(Y >= r-1) vanishes, conditional split undefined");
      }
      return std::min(tail(r) / denom, 1.0);
    }
    case DichotomizationKind::AdjacentConditional: {
      const double denom = p[static_cast<std::size_t>(r) - 1] + p[static_cast<std::size_t>(r)];
      if (denom < kDegenerateMass) {
        throw DegenerateConditionError("dichotomize: P(Y in {r-1, r}) vanishes, conditional split undefined");
      }
      return p[static_cast<std::size_t>(r)] / denom;
    }
  }
  throw InvalidInputError("dichotomize: unknown kind");
}

/// Dichotomization kind whose split reproduces a family's building blocks.
inline DichotomizationKind matching_kind(Family family) noexcept {
  switch (family) {
    case Family::Cumulative: return DichotomizationKind::CumulativeSplit;
    case Family::Sequential: return DichotomizationKind::SequentialConditional;
    case Family::AdjacentPcm: return DichotomizationKind::AdjacentConditional;
  }
  return DichotomizationKind::CumulativeSplit;
}

}  // namespace olt
