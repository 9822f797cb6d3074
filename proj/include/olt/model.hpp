#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "olt/errors.hpp"
#include "olt/numeric.hpp"

namespace olt {

/// The three families of ordered latent trait models.
enum class Family { Cumulative, Sequential, AdjacentPcm };

inline const char* to_string(Family f) noexcept {
  switch (f) {
    case Family::Cumulative: return "cumulative";
    case Family::Sequential: return "sequential";
    case Family::AdjacentPcm: return "pcm";
  }
  return "?";
}

/// Response function F: a strictly increasing continuous CDF with the
/// symmetry F(x) + F(-x) = 1. Logistic is the standard choice; any other
/// symmetric CDF can be plugged in.
class ResponseFunction {
 public:
  enum class Kind { Logistic, Custom };

  static ResponseFunction logistic() { return ResponseFunction(Kind::Logistic, nullptr); }

  static ResponseFunction custom(std::function<double(double)> cdf) {
    if (!cdf) throw InvalidInputError("response function: empty callable");
    return ResponseFunction(Kind::Custom, std::move(cdf));
  }

  Kind kind() const noexcept { return kind_; }
  bool is_logistic() const noexcept { return kind_ == Kind::Logistic; }

  double operator()(double x) const {
    return kind_ == Kind::Logistic ? logistic_cdf(x) : cdf_(x);
  }

 private:
  ResponseFunction(Kind kind, std::function<double(double)> cdf)
      : kind_(kind), cdf_(std::move(cdf)) {}

  Kind kind_;
  std::function<double(double)> cdf_;
};

/// Item threshold vector delta_1..delta_k on the latent scale. Entries are
/// unconstrained here; nondecreasing order is enforced only when the
/// thresholds are bound into a cumulative-family model.
class ItemThresholds {
 public:
  ItemThresholds(std::string item_id, std::vector<double> deltas)
      : item_id_(std::move(item_id)), deltas_(std::move(deltas)) {
    if (deltas_.empty()) throw InvalidInputError("item thresholds: k must be >= 1");
    for (double d : deltas_) {
      if (!std::isfinite(d)) throw InvalidInputError("item thresholds: non-finite entry");
    }
  }

  const std::string& item_id() const noexcept { return item_id_; }
  const std::vector<double>& deltas() const noexcept { return deltas_; }
  int k() const noexcept { return static_cast<int>(deltas_.size()); }

  /// delta_r with the 1-based indexing of the model formulas.
  double delta(int r) const {
    if (r < 1 || r > k()) throw IndexError("threshold index outside 1..k");
    return deltas_[static_cast<std::size_t>(r) - 1];
  }

 private:
  std::string item_id_;
  std::vector<double> deltas_;
};

/// Person location theta on the latent scale.
struct PersonAbility {
  std::string person_id;
  double theta = 0.0;

  PersonAbility(double theta) : theta(theta) {}  // NOLINT: implicit by design
  PersonAbility(std::string person_id, double theta)
      : person_id(std::move(person_id)), theta(theta) {}
};

/// One item of one family together with its response function. Cumulative
/// models validate threshold order at construction.
class OrdinalModel {
 public:
  OrdinalModel(Family family, ResponseFunction response_function, ItemThresholds thresholds)
      : family_(family),
        response_function_(std::move(response_function)),
        thresholds_(std::move(thresholds)) {
    if (family_ == Family::Cumulative) {
      const auto& d = thresholds_.deltas();
      for (std::size_t i = 0; i + 1 < d.size(); ++i) {
        if (d[i] > d[i + 1]) {
          throw OrderingViolationError(
              "cumulative model: thresholds must be nondecreasing, violated at (" +
                  std::to_string(i + 1) + ", " + std::to_string(i + 2) + ")",
              i + 1, i + 2);
        }
      }
    }
  }

  Family family() const noexcept { return family_; }
  const ResponseFunction& response_function() const noexcept { return response_function_; }
  const ItemThresholds& thresholds() const noexcept { return thresholds_; }
  int k() const noexcept { return thresholds_.k(); }

 private:
  Family family_;
  ResponseFunction response_function_;
  ItemThresholds thresholds_;
};

/// Probability vector over categories 0..k, validated on construction.
class OrdinalDistribution {
 public:
  explicit OrdinalDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2) throw InvalidInputError("distribution: needs k >= 1 (at least two categories)");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("distribution: entry outside [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("distribution: entries must sum to 1");
  }

  const std::vector<double>& probs() const noexcept { return probs_; }
  int k() const noexcept { return static_cast<int>(probs_.size()) - 1; }

  double prob(int r) const {
    if (r < 0 || r > k()) throw IndexError("category index outside 0..k");
    return probs_[static_cast<std::size_t>(r)];
  }

 private:
  std::vector<double> probs_;
};

namespace detail {

inline void check_theta(double theta) {
  if (!std::isfinite(theta)) throw InvalidInputError("theta must be finite");
}

// Cumulative log odds u_0..u_k of the adjacent-categories model. Logistic F
// sums theta - delta_r directly; a general symmetric F goes through the
// local conditionals m_r = F(theta - delta_r) and their log odds.
inline std::vector<double> pcm_log_weights(const OrdinalModel& model, double theta) {
  const auto& d = model.thresholds().deltas();
  const auto& F = model.response_function();
  std::vector<double> u(d.size() + 1, 0.0);
  double acc = 0.0;
  for (std::size_t r = 0; r < d.size(); ++r) {
    if (F.is_logistic()) {
      acc += theta - d[r];
    } else {
      const double m = F(theta - d[r]);
      acc += std::log(m) - std::log1p(-m);
    }
    u[r + 1] = acc;
  }
  return u;
}

}  // namespace detail

/// P(Y = r) for r = 0..k.
inline OrdinalDistribution category_probs(const OrdinalModel& model, const PersonAbility& person) {
  detail::check_theta(person.theta);
  const auto& F = model.response_function();
  const auto& d = model.thresholds().deltas();
  const int k = model.k();
  std::vector<double> p(static_cast<std::size_t>(k) + 1);
  switch (model.family()) {
    case Family::Cumulative: {
      // P(Y = r) = F(theta - delta_r) - F(theta - delta_{r+1}),
      // with delta_0 = -inf and delta_{k+1} = +inf.
      double upper = 1.0;
      for (int r = 1; r <= k; ++r) {
        const double ex = F(person.theta - d[static_cast<std::size_t>(r) - 1]);
        p[static_cast<std::size_t>(r) - 1] = std::max(upper - ex, 0.0);
        upper = ex;
      }
      p[static_cast<std::size_t>(k)] = upper;
      break;
    }
    case Family::Sequential: {
      // r successful steps followed by one failure; the failure probability
      // 1 - F(theta - delta) is evaluated as F(delta - theta).
      double prod = 1.0;
      for (int r = 0; r < k; ++r) {
        const double delta = d[static_cast<std::size_t>(r)];
        p[static_cast<std::size_t>(r)] = prod * F(delta - person.theta);
        prod *= F(person.theta - delta);
      }
      p[static_cast<std::size_t>(k)] = prod;
      break;
    }
    case Family::AdjacentPcm: {
      p = softmax_from_log_weights(detail::pcm_log_weights(model, person.theta));
      break;
    }
  }
  return OrdinalDistribution(std::move(p));
}

/// P(Y >= r). Exactly F(theta - delta_r) for the cumulative family (r >= 1);
/// a tail sum of category probabilities otherwise. r = 0 returns 1.
inline double exceedance_prob(const OrdinalModel& model, const PersonAbility& person, int r) {
  detail::check_theta(person.theta);
  const int k = model.k();
  if (r < 0 || r > k) throw IndexError("category index outside 0..k");
  if (r == 0) return 1.0;
  if (model.family() == Family::Cumulative) {
    return model.response_function()(person.theta - model.thresholds().delta(r));
  }
  const auto dist = category_probs(model, person);
  double tail = 0.0;
  for (int s = k; s >= r; --s) tail += dist.probs()[static_cast<std::size_t>(s)];
  return std::min(tail, 1.0);
}

/// log(P(Y = r) / P(Y = r - 1)) = theta - delta_r. Defined for the
/// adjacent-categories family with logistic F only.
inline double adjacent_log_odds(const OrdinalModel& model, const PersonAbility& person, int r) {
  detail::check_theta(person.theta);
  if (model.family() != Family::AdjacentPcm) {
    throw UnsupportedOperationError("adjacent log odds: defined for the adjacent-categories family only");
  }
  if (!model.response_function().is_logistic()) {
    throw UnsupportedOperationError("adjacent log odds: closed form requires the logistic response function");
  }
  return person.theta - model.thresholds().delta(r);
}

/// The local binary success probability F(theta - delta_r):
/// P(Y = r | Y in {r-1, r}) for the adjacent-categories family and
/// P(Y >= r | Y >= r-1) for the sequential family. The cumulative family has
/// marginal rather than conditional binary structure, so it is rejected.
inline double local_conditional_prob(const OrdinalModel& model, const PersonAbility& person, int r) {
  detail::check_theta(person.theta);
  if (model.family() == Family::Cumulative) {
    throw UnsupportedOperationError(
        "local conditional probability: the cumulative family dichotomizes marginally, not conditionally");
  }
  return model.response_function()(person.theta - model.thresholds().delta(r));
}

/// Reverse-permutation image of an adjacent-categories model:
/// theta' = -theta, delta'_r = -delta_{k+1-r}. The category distribution of
/// the image is the reversal of the original.
inline std::pair<OrdinalModel, PersonAbility> reverse_pcm(const OrdinalModel& model,
                                                          const PersonAbility& person) {
  detail::check_theta(person.theta);
  if (model.family() != Family::AdjacentPcm) {
    throw UnsupportedOperationError("reverse transform: defined for the adjacent-categories family only");
  }
  const auto& d = model.thresholds().deltas();
  std::vector<double> rd(d.rbegin(), d.rend());
  for (double& v : rd) v = -v;
  return {OrdinalModel(Family::AdjacentPcm, model.response_function(),
                       ItemThresholds(model.thresholds().item_id(), std::move(rd))),
          PersonAbility(person.person_id, -person.theta)};
}

/// P(Y = r) sampled along a theta grid; grid must be finite and strictly
/// increasing.
inline std::vector<std::pair<double, double>> icc_curve(const OrdinalModel& model, int r,
                                                        std::span<const double> theta_grid) {
  if (theta_grid.empty()) throw InvalidInputError("icc curve: empty theta grid");
  if (r < 0 || r > model.k()) throw IndexError("category index outside 0..k");
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    if (!std::isfinite(theta_grid[i])) throw InvalidInputError("icc curve: non-finite grid value");
    if (i > 0 && !(theta_grid[i - 1] < theta_grid[i])) {
      throw InvalidInputError("icc curve: grid must be strictly increasing");
    }
  }
  std::vector<std::pair<double, double>> curve;
  curve.reserve(theta_grid.size());
  for (double t : theta_grid) {
    curve.emplace_back(t, category_probs(model, PersonAbility(t)).probs()[static_cast<std::size_t>(r)]);
  }
  return curve;
}

}  // namespace olt
