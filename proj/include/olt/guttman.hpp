#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "olt/binary.hpp"
#include "olt/errors.hpp"
#include "olt/model.hpp"
#include "olt/numeric.hpp"

namespace olt {

/// Success probabilities of k independent Bernoulli variables, each strictly
/// inside (0, 1). Alongside the probabilities the type keeps log(pi_r) and
/// log(1 - pi_r); when built from logistic logits these logs retain tail
/// information that the probability representation cannot hold, which is
/// what keeps the conditioning identities exact for extreme parameters.
class BinaryMarginals {
 public:
  explicit BinaryMarginals(std::vector<double> pis) : pis_(std::move(pis)) {
    if (pis_.empty()) throw InvalidInputError("marginals: k must be >= 1");
    log_success_.reserve(pis_.size());
    log_failure_.reserve(pis_.size());
    for (double p : pis_) {
      if (!(p > 0.0 && p < 1.0)) throw ValidationError("marginals: entries must lie strictly inside (0, 1)");
      log_success_.push_back(std::log(p));
      log_failure_.push_back(std::log1p(-p));
    }
  }

  /// Logistic marginals given by their logits x_r, i.e. pi_r = F(x_r).
  static BinaryMarginals from_logits(std::span<const double> logits) {
    BinaryMarginals m;
    m.pis_.reserve(logits.size());
    m.log_success_.reserve(logits.size());
    m.log_failure_.reserve(logits.size());
    for (double x : logits) {
      if (!std::isfinite(x)) throw InvalidInputError("marginals: non-finite logit");
      m.pis_.push_back(logistic_cdf(x));
      m.log_success_.push_back(log_logistic(x));
      m.log_failure_.push_back(log_logistic(-x));
    }
    if (m.pis_.empty()) throw InvalidInputError("marginals: k must be >= 1");
    return m;
  }

  /// pi_r = F(theta - delta_r). The saturated response function keeps
  /// entries inside (0, 1) for arbitrarily extreme parameters.
  static BinaryMarginals from_model(const ResponseFunction& F, double theta,
                                    std::span<const double> deltas) {
    if (!std::isfinite(theta)) throw InvalidInputError("marginals: theta must be finite");
    if (F.is_logistic()) {
      std::vector<double> logits;
      logits.reserve(deltas.size());
      for (double d : deltas) logits.push_back(theta - d);
      return from_logits(logits);
    }
    std::vector<double> pis;
    pis.reserve(deltas.size());
    for (double d : deltas) pis.push_back(F(theta - d));
    return BinaryMarginals(std::move(pis));
  }

  const std::vector<double>& pis() const noexcept { return pis_; }
  const std::vector<double>& log_success() const noexcept { return log_success_; }
  const std::vector<double>& log_failure() const noexcept { return log_failure_; }
  int k() const noexcept { return static_cast<int>(pis_.size()); }

 private:
  BinaryMarginals() = default;
  std::vector<double> pis_;
  std::vector<double> log_success_;  // log pi_r
  std::vector<double> log_failure_;  // log (1 - pi_r)
};

/// Joint law over the k+1 Guttman cells after conditioning, together with
/// the pre-normalization mass s_pi of those cells.
struct ConditionedJoint {
  std::vector<double> guttman_probs;  // indexed by score 0..k
  double s_pi = 0.0;
};

/// Condition k independent Bernoullis on the Guttman space. The cell with
/// score r has mass pi_1..pi_r (1-pi_{r+1})..(1-pi_k); the full 2^k joint is
/// never materialized. Accumulation runs in log space so marginals close to
/// 0 or 1 do not underflow the normalizer.
inline ConditionedJoint condition_on_guttman(const BinaryMarginals& m) {
  const auto n = static_cast<std::size_t>(m.k());
  std::vector<double> prefix(n + 1, 0.0);  // prefix sums of log(pi)
  std::vector<double> suffix(n + 2, 0.0);  // suffix sums of log(1 - pi)
  for (std::size_t r = 1; r <= n; ++r) prefix[r] = prefix[r - 1] + m.log_success()[r - 1];
  for (std::size_t r = n; r >= 1; --r) suffix[r] = suffix[r + 1] + m.log_failure()[r - 1];
  std::vector<double> log_cell(n + 1);
  for (std::size_t r = 0; r <= n; ++r) log_cell[r] = prefix[r] + suffix[r + 1];
  const double log_mass = log_sum_exp(log_cell);
  ConditionedJoint joint;
  joint.guttman_probs.resize(n + 1);
  for (std::size_t r = 0; r <= n; ++r) joint.guttman_probs[r] = std::exp(log_cell[r] - log_mass);
  joint.s_pi = std::exp(log_mass);
  return joint;
}

/// Score distribution of the Guttman-conditioned Bernoullis. With
/// pi_r = F(theta - delta_r) and logistic F this is the adjacent-categories
/// (partial credit) distribution.
inline OrdinalDistribution pcm_from_marginals(const BinaryMarginals& m) {
  return OrdinalDistribution(condition_on_guttman(m).guttman_probs);
}

/// P(Y^(r) = 1 | Y^(r-1) = 1, Y^(r+1) = 0) under the conditioned joint.
/// For r = 1 and r = k the undefined neighbour drops out and conditioning is
/// on the single remaining event. Equals pi_r.
inline double conditioned_local_rasch(const ConditionedJoint& joint, const BinaryMarginals& m, int r) {
  if (static_cast<int>(joint.guttman_probs.size()) != m.k() + 1) {
    throw InvalidInputError("conditioned joint and marginals disagree on k");
  }
  if (r < 1 || r > m.k()) throw IndexError("variable index outside 1..k");
  const double hi = joint.guttman_probs[static_cast<std::size_t>(r)];
  const double lo = joint.guttman_probs[static_cast<std::size_t>(r) - 1];
  if (hi + lo < kDegenerateMass) {
    throw DegenerateConditionError("conditioned local split: conditioning event mass vanishes");
  }
  return hi / (hi + lo);
}

/// Marginal odds P(Y^(r) = 1) / P(Y^(r) = 0) after conditioning, computed by
/// summing the k+1 Guttman cells. Unlike the local conditionals these odds
/// are inflated relative to pi_r / (1 - pi_r).
inline double conditioned_marginal_odds(const BinaryMarginals& m, int r) {
  const int k = m.k();
  if (r < 1 || r > k) throw IndexError("variable index outside 1..k");
  const auto joint = condition_on_guttman(m);
  double hi = 0.0;
  double lo = 0.0;
  for (int s = 0; s <= k; ++s) {
    (s >= r ? hi : lo) += joint.guttman_probs[static_cast<std::size_t>(s)];
  }
  return hi / lo;
}

/// The two Rasch-type conditionals of the k = 2 case:
/// (P(Y^(2) = 1 | Y^(1) = 1), P(Y^(1) = 1 | Y^(2) = 0)). They recover
/// (pi_2, pi_1) even though the conditioned marginals do not.
inline std::pair<double, double> prop_try_conditionals(const BinaryMarginals& m) {
  if (m.k() != 2) throw InvalidInputError("pairwise conditionals are defined for k = 2 only");
  const auto gp = condition_on_guttman(m).guttman_probs;
  return {gp[2] / (gp[2] + gp[1]), gp[1] / (gp[1] + gp[0])};
}

}  // namespace olt
