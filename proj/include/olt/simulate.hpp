#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "olt/binary.hpp"
#include "olt/errors.hpp"
#include "olt/model.hpp"
#include "olt/numeric.hpp"
#include "olt/rng.hpp"

namespace olt {

/// Sampling routes, one per generating story: thresholding a latent variable
/// (cumulative), the stopping step chain (sequential), rejection onto the
/// Guttman space (adjacent categories), and a direct categorical draw from
/// the closed-form law (any family).
enum class SampleMethod { LatentVariable, MarkovSteps, DirectCategorical, GuttmanRejection };

inline const char* to_string(SampleMethod m) noexcept {
  switch (m) {
    case SampleMethod::LatentVariable: return "latent";
    case SampleMethod::MarkovSteps: return "markov";
    case SampleMethod::DirectCategorical: return "direct";
    case SampleMethod::GuttmanRejection: return "rejection";
  }
  return "?";
}

inline SampleMethod sample_method_from_string(std::string_view name) {
  if (name == "latent") return SampleMethod::LatentVariable;
  if (name == "markov") return SampleMethod::MarkovSteps;
  if (name == "direct") return SampleMethod::DirectCategorical;
  if (name == "rejection") return SampleMethod::GuttmanRejection;
  throw InvalidInputError("unknown sampling method: " + std::string(name));
}

inline bool method_compatible(SampleMethod method, Family family) noexcept {
  switch (method) {
    case SampleMethod::LatentVariable: return family == Family::Cumulative;
    case SampleMethod::MarkovSteps: return family == Family::Sequential;
    case SampleMethod::GuttmanRejection: return family == Family::AdjacentPcm;
    case SampleMethod::DirectCategorical: return true;
  }
  return false;
}

struct SimulationConfig {
  OrdinalModel model;
  PersonAbility person;
  long n_samples = 1;
  std::uint64_t seed = 0;
  SampleMethod method = SampleMethod::DirectCategorical;
};

struct SampleResult {
  std::vector<int> scores;
  long proposals = 0;           // raw draws consumed; equals n outside rejection
  double acceptance_rate = 1.0; // n / proposals
};

namespace detail {

/// Quantile of the response function: logit for logistic, bisection for a
/// custom symmetric CDF.
inline double response_quantile(const ResponseFunction& F, double u) {
  if (F.is_logistic()) return logit(u);
  double lo = -1.0, hi = 1.0;
  while (F(lo) > u && lo > -1e12) lo *= 2.0;
  while (F(hi) < u && hi < 1e12) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// One draw via the latent-variable story: Y = r iff delta_r <= theta + eps
/// < delta_{r+1}, with eps distributed according to F.
inline int draw_latent(Rng& rng, const OrdinalModel& model, double theta) {
  const double eps = detail::response_quantile(model.response_function(), rng.uniform());
  const double latent = theta + eps;
  const auto& d = model.thresholds().deltas();
  int r = 0;
  while (r < model.k() && latent >= d[static_cast<std::size_t>(r)]) ++r;
  return r;
}

/// Full trajectory of the stopping step chain. The first failure absorbs:
/// all later entries remain 0, so trajectories are Guttman vectors.
inline std::vector<int> markov_trajectory(Rng& rng, const OrdinalModel& model, double theta) {
  const auto& d = model.thresholds().deltas();
  const auto& F = model.response_function();
  std::vector<int> bits(d.size(), 0);
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (!rng.bernoulli(F(theta - d[j]))) break;
    bits[j] = 1;
  }
  return bits;
}

inline int draw_markov(Rng& rng, const OrdinalModel& model, double theta) {
  const auto bits = markov_trajectory(rng, model, theta);
  int r = 0;
  while (r < static_cast<int>(bits.size()) && bits[static_cast<std::size_t>(r)] == 1) ++r;
  return r;
}

/// Inverse-CDF draw from an explicit categorical law.
inline int draw_direct(Rng& rng, const OrdinalDistribution& dist) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int r = 0; r <= dist.k(); ++r) {
    acc += dist.probs()[static_cast<std::size_t>(r)];
    if (u < acc) return r;
  }
  return dist.k();
}

/// One accepted draw of the rejection experiment: k independent Bernoullis
/// with pi_r = F(theta - delta_r), discarded until the outcome lies in the
/// Guttman space. `proposals` accumulates the raw draws consumed.
inline int draw_guttman_rejection(Rng& rng, std::span<const double> pis, long& proposals,
                                  long max_proposals) {
  while (true) {
    if (proposals >= max_proposals) {
      throw DegenerateConditionError(
          "rejection sampling: proposal cap reached; the Guttman space carries too little mass "
          "for these parameters");
    }
    ++proposals;
    int score = 0;
    bool valid = true;
    int prev = 1;
    for (double pi : pis) {
      const int bit = rng.bernoulli(pi) ? 1 : 0;
      if (bit > prev) valid = false;
      prev = bit;
      score += bit;
    }
    if (valid) return score;
  }
}

/// Draw scores according to the configured method. Identical configurations
/// (including seed) produce identical streams.
inline SampleResult sample(const SimulationConfig& cfg) {
  detail::check_theta(cfg.person.theta);
  if (cfg.n_samples < 1) throw InvalidInputError("sample: n_samples must be >= 1");
  if (!method_compatible(cfg.method, cfg.model.family())) {
    throw InvalidInputError(std::string("sample: method '") + to_string(cfg.method) +
                            "' is incompatible with the " + to_string(cfg.model.family()) +
                            " family");
  }
  constexpr long kMaxProposals = 100000000;  // 1e8 raw draws, then fail loudly
  Rng rng(cfg.seed);
  SampleResult out;
  out.scores.reserve(static_cast<std::size_t>(cfg.n_samples));
  switch (cfg.method) {
    case SampleMethod::DirectCategorical: {
      const auto dist = category_probs(cfg.model, cfg.person);
      for (long i = 0; i < cfg.n_samples; ++i) out.scores.push_back(draw_direct(rng, dist));
      out.proposals = cfg.n_samples;
      break;
    }
    case SampleMethod::LatentVariable: {
      for (long i = 0; i < cfg.n_samples; ++i) {
        out.scores.push_back(draw_latent(rng, cfg.model, cfg.person.theta));
      }
      out.proposals = cfg.n_samples;
      break;
    }
    case SampleMethod::MarkovSteps: {
      for (long i = 0; i < cfg.n_samples; ++i) {
        out.scores.push_back(draw_markov(rng, cfg.model, cfg.person.theta));
      }
      out.proposals = cfg.n_samples;
      break;
    }
    case SampleMethod::GuttmanRejection: {
      const auto& d = cfg.model.thresholds().deltas();
      const auto& F = cfg.model.response_function();
      std::vector<double> pis;
      pis.reserve(d.size());
      for (double delta : d) pis.push_back(F(cfg.person.theta - delta));
      long proposals = 0;
      for (long i = 0; i < cfg.n_samples; ++i) {
        out.scores.push_back(draw_guttman_rejection(rng, pis, proposals, kMaxProposals));
      }
      out.proposals = proposals;
      break;
    }
  }
  out.acceptance_rate = static_cast<double>(cfg.n_samples) / static_cast<double>(out.proposals);
  return out;
}

/// Total variation distance between the empirical law of `samples` and an
/// exact distribution: 0.5 * sum |freq_r - exact_r|.
inline double empirical_tv(std::span<const int> samples, const OrdinalDistribution& exact) {
  if (samples.empty()) throw InvalidInputError("empirical TV: no samples");
  std::vector<long> counts(static_cast<std::size_t>(exact.k()) + 1, 0);
  for (int s : samples) {
    if (s < 0 || s > exact.k()) throw InvalidInputError("empirical TV: score outside 0..k");
    ++counts[static_cast<std::size_t>(s)];
  }
  const double n = static_cast<double>(samples.size());
  double tv = 0.0;
  for (int r = 0; r <= exact.k(); ++r) {
    tv += std::abs(static_cast<double>(counts[static_cast<std::size_t>(r)]) / n -
                   exact.probs()[static_cast<std::size_t>(r)]);
  }
  return 0.5 * tv;
}

}  // namespace olt
