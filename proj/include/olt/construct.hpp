#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "olt/errors.hpp"
#include "olt/model.hpp"
#include "olt/numeric.hpp"

namespace olt {

/// Role of a vector of binary success probabilities when assembling an
/// ordinal distribution: marginal splits (cumulative), conditional
/// transitions (sequential), or local adjacent conditionals (PCM).
enum class BlockKind { MarginalRasch, ConditionalTransition, LocalAdjacent };

/// Validated building blocks. MarginalRasch blocks must be nonincreasing;
/// that is the condition under which the marginal splits form a valid
/// contingency table. The conditional kinds are unconstrained, which is
/// precisely why the sequential and adjacent-categories families tolerate
/// reversed thresholds.
class BinaryBlockSpec {
 public:
  BinaryBlockSpec(BlockKind kind, std::vector<double> probs)
      : kind_(kind), probs_(std::move(probs)) {
    if (probs_.empty()) throw InvalidInputError("block spec: k must be >= 1");
    log_odds_.reserve(probs_.size());
    for (double p : probs_) {
      if (!(p > 0.0 && p < 1.0)) throw ValidationError("block spec: probabilities must lie strictly inside (0, 1)");
      log_odds_.push_back(logit(p));
    }
    if (kind_ == BlockKind::MarginalRasch) {
      for (std::size_t i = 0; i + 1 < probs_.size(); ++i) {
        if (probs_[i] < probs_[i + 1]) {
          throw OrderingViolationError(
              "marginal blocks must be nonincreasing, violated at (" + std::to_string(i + 1) +
                  ", " + std::to_string(i + 2) + ")",
              i + 1, i + 2);
        }
      }
    }
  }

  /// Local adjacent blocks m_r = F(x_r) given by their logits x_r directly.
  /// The stored log odds keep tail precision that the probabilities alone
  /// would lose for |x_r| beyond roughly 16.
  static BinaryBlockSpec local_adjacent_from_logits(std::span<const double> logits) {
    BinaryBlockSpec spec;
    spec.kind_ = BlockKind::LocalAdjacent;
    spec.probs_.reserve(logits.size());
    for (double x : logits) {
      if (!std::isfinite(x)) throw InvalidInputError("block spec: non-finite logit");
      spec.probs_.push_back(logistic_cdf(x));
    }
    if (spec.probs_.empty()) throw InvalidInputError("block spec: k must be >= 1");
    spec.log_odds_.assign(logits.begin(), logits.end());
    return spec;
  }

  BlockKind kind() const noexcept { return kind_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  const std::vector<double>& log_odds() const noexcept { return log_odds_; }
  int k() const noexcept { return static_cast<int>(probs_.size()); }

 private:
  BinaryBlockSpec() : kind_(BlockKind::LocalAdjacent) {}
  BlockKind kind_;
  std::vector<double> probs_;
  std::vector<double> log_odds_;  // logit(p_r)
};

/// P(Y = r) = pi_r - pi_{r+1} with pi_0 = 1 and pi_{k+1} = 0. The exceedance
/// probabilities of the result reproduce the blocks exactly.
inline OrdinalDistribution build_cumulative(const BinaryBlockSpec& spec) {
  if (spec.kind() != BlockKind::MarginalRasch) {
    throw InvalidInputError("cumulative builder expects marginal blocks");
  }
  const auto& pi = spec.probs();
  const std::size_t k = pi.size();
  std::vector<double> p(k + 1);
  p[0] = 1.0 - pi[0];
  for (std::size_t r = 1; r < k; ++r) p[r] = pi[r - 1] - pi[r];
  p[k] = pi[k - 1];
  return OrdinalDistribution(std::move(p));
}

/// P(Y = r) = (1 - c_{r+1}) prod_{j<=r} c_j; the stopping-chain law. The
/// convention c_{k+1} = 0 is absorbed by the final product.
inline OrdinalDistribution build_sequential(const BinaryBlockSpec& spec) {
  if (spec.kind() != BlockKind::ConditionalTransition) {
    throw InvalidInputError("sequential builder expects conditional transition blocks");
  }
  const auto& c = spec.probs();
  const std::size_t k = c.size();
  std::vector<double> p(k + 1);
  double prod = 1.0;
  for (std::size_t r = 0; r < k; ++r) {
    p[r] = prod * (1.0 - c[r]);
    prod *= c[r];
  }
  p[k] = prod;
  return OrdinalDistribution(std::move(p));
}

/// P(Y = r) proportional to prod_{j<=r} m_j / (1 - m_j), normalized in log
/// space. The adjacent conditionals of the result reproduce the m_r.
inline OrdinalDistribution build_pcm(const BinaryBlockSpec& spec) {
  if (spec.kind() != BlockKind::LocalAdjacent) {
    throw InvalidInputError("adjacent-categories builder expects local adjacent blocks");
  }
  const auto& lo = spec.log_odds();
  std::vector<double> u(lo.size() + 1, 0.0);
  double acc = 0.0;
  for (std::size_t r = 0; r < lo.size(); ++r) {
    acc += lo[r];
    u[r + 1] = acc;
  }
  return OrdinalDistribution(softmax_from_log_weights(u));
}

/// Thresholds implied by the blocks on the logistic scale at ability theta:
/// delta_r = theta - logit(p_r). Diagnostic; reversed output is legitimate
/// for the conditional kinds.
inline std::vector<double> implied_thresholds(const BinaryBlockSpec& spec, double theta = 0.0) {
  std::vector<double> deltas;
  deltas.reserve(spec.probs().size());
  for (double p : spec.probs()) deltas.push_back(theta - logit(p));
  return deltas;
}

}  // namespace olt
