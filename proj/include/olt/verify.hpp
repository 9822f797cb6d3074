#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "olt/binary.hpp"
#include "olt/construct.hpp"
#include "olt/errors.hpp"
#include "olt/guttman.hpp"
#include "olt/model.hpp"
#include "olt/numeric.hpp"
#include "olt/rng.hpp"

namespace olt {

/// Numerical checks, one per structural result: the two construction
/// theorems, the Guttman-space propositions for the adjacent-categories
/// family, the reversal properties, mode ordering, and the dichotomize/
/// rebuild round trip. SequentialNonReversal is a counterexample search; it
/// passes when a large deviation is found.
enum class PropositionId {
  CumulativeConstruction,
  SequentialConstruction,
  BerGut,
  TryConditionals,
  GenConditionals,
  GenObsGut,
  Gen3,
  AndrichProduct,
  PcmReversal,
  SequentialNonReversal,
  ModeOrdering,
  DichotomizeRoundtrip,
};

inline constexpr std::array<PropositionId, 12> kAllPropositions = {
    PropositionId::CumulativeConstruction, PropositionId::SequentialConstruction,
    PropositionId::BerGut,                 PropositionId::TryConditionals,
    PropositionId::GenConditionals,        PropositionId::GenObsGut,
    PropositionId::Gen3,                   PropositionId::AndrichProduct,
    PropositionId::PcmReversal,            PropositionId::SequentialNonReversal,
    PropositionId::ModeOrdering,           PropositionId::DichotomizeRoundtrip,
};

inline const char* to_string(PropositionId id) noexcept {
  switch (id) {
    case PropositionId::CumulativeConstruction: return "cumulative-construction";
    case PropositionId::SequentialConstruction: return "sequential-construction";
    case PropositionId::BerGut: return "bergut";
    case PropositionId::TryConditionals: return "try-conditionals";
    case PropositionId::GenConditionals: return "gen-conditionals";
    case PropositionId::GenObsGut: return "gen-obs-gut";
    case PropositionId::Gen3: return "gen3";
    case PropositionId::AndrichProduct: return "andrich-product";
    case PropositionId::PcmReversal: return "pcm-reversal";
    case PropositionId::SequentialNonReversal: return "sequential-non-reversal";
    case PropositionId::ModeOrdering: return "mode-ordering";
    case PropositionId::DichotomizeRoundtrip: return "dichotomize-roundtrip";
  }
  return "?";
}

inline PropositionId proposition_from_string(std::string_view name) {
  for (PropositionId id : kAllPropositions) {
    if (name == to_string(id)) return id;
  }
  throw InvalidInputError("unknown proposition tag: " + std::string(name));
}

struct KRange {
  int min = 2;
  int max = 8;
};

struct ParamRange {
  double lo = -3.0;
  double hi = 3.0;
};

struct VerificationReport {
  PropositionId proposition = PropositionId::BerGut;
  int trials = 0;
  std::uint64_t seed = 0;
  KRange k_range;
  double tolerance = 0.0;
  bool counterexample_search = false;
  double max_abs_deviation = 0.0;
  std::string worst_instance;
  bool passed = false;
};

namespace oracle {

/// Joint law of the Guttman-space experiment obtained by materializing all
/// 2^k cells of the independent Bernoulli joint, dropping non-Guttman cells
/// and renormalizing. Exponential in k; verification/test route only.
struct EnumeratedJoint {
  std::vector<double> guttman_probs;
  double s_pi = 0.0;
};

inline EnumeratedJoint conditioned_joint_by_enumeration(std::span<const double> pis) {
  const int k = static_cast<int>(pis.size());
  if (k < 1) throw InvalidInputError("enumeration: k must be >= 1");
  if (k > 16) throw InvalidInputError("enumeration: capped at k <= 16");
  EnumeratedJoint out;
  out.guttman_probs.assign(static_cast<std::size_t>(k) + 1, 0.0);
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    // bit r set <=> variable r+1 takes value 1
    double cell = 1.0;
    bool guttman = true;
    int prev = 1;
    for (int r = 0; r < k; ++r) {
      const int bit = static_cast<int>((mask >> r) & 1u);
      cell *= bit ? pis[static_cast<std::size_t>(r)] : 1.0 - pis[static_cast<std::size_t>(r)];
      if (bit > prev) guttman = false;
      prev = bit;
    }
    if (guttman) {
      out.guttman_probs[static_cast<std::size_t>(std::popcount(mask))] += cell;
      out.s_pi += cell;
    }
  }
  for (double& p : out.guttman_probs) p /= out.s_pi;
  return out;
}

/// Sequential law by explicit path enumeration: score r is the single
/// trajectory of r successes followed by a failure (success through step k
/// for r = k).
inline std::vector<double> sequential_by_path_enumeration(std::span<const double> c) {
  const std::size_t k = c.size();
  std::vector<double> p(k + 1);
  for (std::size_t r = 0; r <= k; ++r) {
    double mass = 1.0;
    for (std::size_t j = 0; j < r; ++j) mass *= c[j];
    if (r < k) mass *= 1.0 - c[r];
    p[r] = mass;
  }
  return p;
}

}  // namespace oracle

namespace detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string describe_instance(int k, double theta, std::span<const double> deltas) {
  std::string s = "k=" + std::to_string(k) + " theta=" + fmt17(theta) + " delta=[";
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (i > 0) s += ", ";
    s += fmt17(deltas[i]);
  }
  s += "]";
  return s;
}

struct Trial {
  double deviation = 0.0;
  std::string instance;
};

inline std::vector<double> draw_deltas(Rng& rng, int k, const ParamRange& pr) {
  std::vector<double> d(static_cast<std::size_t>(k));
  for (double& v : d) v = rng.uniform(pr.lo, pr.hi);
  return d;
}

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline Trial run_trial(PropositionId prop, Rng& rng, const KRange& kr, const ParamRange& pr) {
  const auto F = ResponseFunction::logistic();
  Trial t;
  int k = rng.uniform_int(kr.min, kr.max);
  switch (prop) {
    case PropositionId::CumulativeConstruction: {
      const double theta = rng.uniform(pr.lo, pr.hi);
      auto deltas = draw_deltas(rng, k, pr);
      std::sort(deltas.begin(), deltas.end());
      const OrdinalModel model(Family::Cumulative, F, ItemThresholds("i", deltas));
      std::vector<double> pis;
      for (double d : deltas) pis.push_back(logistic_cdf(theta - d));
      const auto built = build_cumulative(BinaryBlockSpec(BlockKind::MarginalRasch, pis));
      const auto direct = category_probs(model, theta);
      double dev = sup_distance(built.probs(), direct.probs());
      for (int r = 1; r <= k; ++r) {
        dev = std::max(dev, std::abs(exceedance_prob(model, theta, r) - pis[static_cast<std::size_t>(r) - 1]));
      }
      t = {dev, describe_instance(k, theta, deltas)};
      break;
    }
    case PropositionId::SequentialConstruction: {
      const double theta = rng.uniform(pr.lo, pr.hi);
      const auto deltas = draw_deltas(rng, k, pr);
      const OrdinalModel model(Family::Sequential, F, ItemThresholds("i", deltas));
      std::vector<double> cs;
      for (double d : deltas) cs.push_back(logistic_cdf(theta - d));
      const auto built = build_sequential(BinaryBlockSpec(BlockKind::ConditionalTransition, cs));
      const auto direct = category_probs(model, theta);
      const auto paths = oracle::sequential_by_path_enumeration(cs);
      const double dev = std::max(sup_distance(built.probs(), direct.probs()),
                                  sup_distance(built.probs(), paths));
      t = {dev, describe_instance(k, theta, deltas)};
      break;
    }
    case PropositionId::BerGut: {
      k = std::max(k, 2);
      const double theta = rng.uniform(pr.lo, pr.hi);
      const auto deltas = draw_deltas(rng, k, pr);
      const auto marg = BinaryMarginals::from_model(F, theta, deltas);
      const auto conditioned = pcm_from_marginals(marg);
      const OrdinalModel model(Family::AdjacentPcm, F, ItemThresholds("i", deltas));
      const auto closed = category_probs(model, theta);
      t = {sup_distance(conditioned.probs(), closed.probs()), describe_instance(k, theta, deltas)};
      break;
    }
    case PropositionId::TryConditionals: {
      k = 2;
      const double theta = rng.uniform(pr.lo, pr.hi);
      const auto deltas = draw_deltas(rng, k, pr);
      const auto marg = BinaryMarginals::from_model(F, theta, deltas);
      const auto [p_a, p_b] = prop_try_conditionals(marg);
      const double dev = std::max(std::abs(p_a - marg.pis()[1]), std::abs(p_b - marg.pis()[0]));
      t = {dev, describe_instance(k, theta, deltas)};
      break;
    }
    case PropositionId::GenConditionals: {
      const double theta = rng.uniform(pr.lo, pr.hi);
      const auto deltas = draw_deltas(rng, k, pr);
      const auto marg = BinaryMarginals::from_model(F, theta, deltas);
      const auto joint = condition_on_guttman(marg);
      const auto enumerated = oracle::conditioned_joint_by_enumeration(marg.pis());
      double dev = 0.0;
      for (int r = 1; r <= k; ++r) {
        const double pi_r = marg.pis()[static_cast<std::size_t>(r) - 1];
        dev = std::max(dev, std::abs(conditioned_local_rasch(joint, marg, r) - pi_r));
        // same conditional from the materialized joint (covers the boundary
        // single-event cases r = 1 and r = k)
        const double hi = enumerated.guttman_probs[static_cast<std::size_t>(r)];
        const double lo = enumerated.guttman_probs[static_cast<std::size_t>(r) - 1];
        dev = std::max(dev, std::abs(hi / (hi + lo) - pi_r));
      }
      t = {dev, describe_instance(k, theta, deltas)};
      break;
    }
    case PropositionId::GenObsGut: {
      const double theta = rng.uniform(pr.lo, pr.hi);
      const auto deltas = draw_deltas(rng, k, pr);
      const OrdinalModel model(Family::AdjacentPcm, F, ItemThresholds("i", deltas));
      const auto dist = category_probs(model, theta);
      double dev = 0.0;
      for (int r = 1; r <= k; ++r) {
        const double split = dichotomize(dist, DichotomizationKind::AdjacentConditional, r);
        dev = std::max(dev, std::abs(split - logistic_cdf(theta - deltas[static_cast<std::size_t>(r) - 1])));
      }
      t = {dev, describe_instance(k, theta, deltas)};
      break;
    }
    case PropositionId::Gen3: {
      const double theta = rng.uniform(pr.lo, pr.hi);
      const auto deltas = draw_deltas(rng, k, pr);
      std::vector<double> logits;
      for (double d : deltas) logits.push_back(theta - d);
      const auto spec = BinaryBlockSpec::local_adjacent_from_logits(logits);
      const auto built = build_pcm(spec);
      const OrdinalModel model(Family::AdjacentPcm, F, ItemThresholds("i", deltas));
      double dev = sup_distance(built.probs(), category_probs(model, theta).probs());
      for (int r = 1; r <= k; ++r) {
        dev = std::max(dev, std::abs(dichotomize(built, DichotomizationKind::AdjacentConditional, r) -
                                     spec.probs()[static_cast<std::size_t>(r) - 1]));
      }
      t = {dev, describe_instance(k, theta, deltas)};
      break;
    }
    case PropositionId::AndrichProduct: {
      const double theta = rng.uniform(pr.lo, pr.hi);
      const auto deltas = draw_deltas(rng, k, pr);
      const auto marg = BinaryMarginals::from_model(F, theta, deltas);
      // per-cell product route with plain normalization, independent of the
      // prefix/suffix log-sum-exp fast path
      std::vector<double> cells(static_cast<std::size_t>(k) + 1);
      double mass = 0.0;
      for (int r = 0; r <= k; ++r) {
        double log_cell = 0.0;
        for (int j = 1; j <= k; ++j) {
          log_cell += j <= r ? marg.log_success()[static_cast<std::size_t>(j) - 1]
                             : marg.log_failure()[static_cast<std::size_t>(j) - 1];
        }
        cells[static_cast<std::size_t>(r)] = std::exp(log_cell);
        mass += cells[static_cast<std::size_t>(r)];
      }
      for (double& c : cells) c /= mass;
      const OrdinalModel model(Family::AdjacentPcm, F, ItemThresholds("i", deltas));
      double dev = sup_distance(cells, category_probs(model, theta).probs());
      dev = std::max(dev, std::abs(mass - condition_on_guttman(marg).s_pi));
      t = {dev, describe_instance(k, theta, deltas)};
      break;
    }
    case PropositionId::PcmReversal: {
      const double theta = rng.uniform(pr.lo, pr.hi);
      const auto deltas = draw_deltas(rng, k, pr);
      const OrdinalModel model(Family::AdjacentPcm, F, ItemThresholds("i", deltas));
      const auto dist = category_probs(model, theta);
      const auto [rev_model, rev_theta] = reverse_pcm(model, theta);
      const auto rev_dist = category_probs(rev_model, rev_theta);
      double dev = 0.0;
      for (int r = 0; r <= k; ++r) {
        dev = std::max(dev, std::abs(rev_dist.probs()[static_cast<std::size_t>(r)] -
                                     dist.probs()[static_cast<std::size_t>(k - r)]));
      }
      t = {dev, describe_instance(k, theta, deltas)};
      break;
    }
    case PropositionId::SequentialNonReversal: {
      // apply the PCM reversal transform to a sequential model; a large
      // deviation shows the sequential family is not reversal-stable
      const double theta = rng.uniform(pr.lo, pr.hi);
      const auto deltas = draw_deltas(rng, k, pr);
      const OrdinalModel model(Family::Sequential, F, ItemThresholds("i", deltas));
      const auto dist = category_probs(model, theta);
      std::vector<double> rd(deltas.rbegin(), deltas.rend());
      for (double& v : rd) v = -v;
      const OrdinalModel transformed(Family::Sequential, F, ItemThresholds("i", rd));
      const auto tdist = category_probs(transformed, -theta);
      double dev = 0.0;
      for (int r = 0; r <= k; ++r) {
        dev = std::max(dev, std::abs(tdist.probs()[static_cast<std::size_t>(r)] -
                                     dist.probs()[static_cast<std::size_t>(k - r)]));
      }
      t = {dev, describe_instance(k, theta, deltas)};
      break;
    }
    case PropositionId::ModeOrdering: {
      const auto deltas = draw_deltas(rng, k, pr);
      const OrdinalModel model(Family::AdjacentPcm, F, ItemThresholds("i", deltas));
      constexpr double lo = -8.0, hi = 8.0, step = 0.01;
      const int n_points = static_cast<int>(std::lround((hi - lo) / step)) + 1;
      std::vector<double> best_theta(static_cast<std::size_t>(k) + 1, lo);
      std::vector<double> best_prob(static_cast<std::size_t>(k) + 1, -1.0);
      for (int i = 0; i < n_points; ++i) {
        const double point = lo + step * i;
        const auto probs = category_probs(model, point).probs();
        for (int r = 0; r <= k; ++r) {
          // strict > keeps the smallest grid argmax on ties
          if (probs[static_cast<std::size_t>(r)] > best_prob[static_cast<std::size_t>(r)]) {
            best_prob[static_cast<std::size_t>(r)] = probs[static_cast<std::size_t>(r)];
            best_theta[static_cast<std::size_t>(r)] = point;
          }
        }
      }
      double dev = 0.0;
      for (int r = 1; r <= k; ++r) {
        dev = std::max(dev, best_theta[static_cast<std::size_t>(r) - 1] -
                                best_theta[static_cast<std::size_t>(r)]);
      }
      std::string instance = "k=" + std::to_string(k) + " delta=[";
      for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (i > 0) instance += ", ";
        instance += fmt17(deltas[i]);
      }
      instance += "]";
      t = {std::max(dev, 0.0), std::move(instance)};
      break;
    }
    case PropositionId::DichotomizeRoundtrip: {
      const double theta = rng.uniform(pr.lo, pr.hi);
      double dev = 0.0;
      for (Family fam : {Family::Cumulative, Family::Sequential, Family::AdjacentPcm}) {
        auto deltas = draw_deltas(rng, k, pr);
        if (fam == Family::Cumulative) std::sort(deltas.begin(), deltas.end());
        const OrdinalModel model(fam, F, ItemThresholds("i", deltas));
        const auto dist = category_probs(model, theta);
        std::vector<double> blocks;
        for (int r = 1; r <= k; ++r) {
          const double b = dichotomize(dist, matching_kind(fam), r);
          dev = std::max(dev, std::abs(b - logistic_cdf(theta - deltas[static_cast<std::size_t>(r) - 1])));
          // extreme parameters can round a conditional split to exactly 0 or
          // 1; saturate to the representable open interval before rebuilding
          blocks.push_back(std::clamp(b, kProbFloor, kProbCeil));
        }
        OrdinalDistribution rebuilt = [&] {
          switch (fam) {
            case Family::Cumulative:
              return build_cumulative(BinaryBlockSpec(BlockKind::MarginalRasch, blocks));
            case Family::Sequential:
              return build_sequential(BinaryBlockSpec(BlockKind::ConditionalTransition, blocks));
            default: {
              // the adjacent split expressed on the log scale; keeps tail
              // precision that the probability blocks lose for extreme
              // parameters
              std::vector<double> log_odds;
              for (int r = 1; r <= k; ++r) {
                log_odds.push_back(std::log(dist.probs()[static_cast<std::size_t>(r)]) -
                                   std::log(dist.probs()[static_cast<std::size_t>(r) - 1]));
              }
              return build_pcm(BinaryBlockSpec::local_adjacent_from_logits(log_odds));
            }
          }
        }();
        dev = std::max(dev, sup_distance(rebuilt.probs(), dist.probs()));
      }
      t = {dev, "k=" + std::to_string(k) + " theta=" + fmt17(theta)};
      break;
    }
  }
  return t;
}

inline double tolerance_for(PropositionId prop) noexcept {
  switch (prop) {
    // rebuild routes pass through the inverse response function
    case PropositionId::Gen3:
    case PropositionId::DichotomizeRoundtrip:
      return 1e-10;
    case PropositionId::SequentialNonReversal:
      return 0.01;  // counterexample threshold: pass needs a deviation above this
    default:
      return 1e-12;
  }
}

}  // namespace detail

/// Run `trials` randomized instances of one proposition. Deterministic given
/// (prop, trials, seed, k_range): every trial derives its own stream from
/// the seed, so aggregation is order-free.
inline VerificationReport verify(PropositionId prop, int trials, std::uint64_t seed,
                                 KRange k_range = {}, ParamRange params = {}) {
  if (trials < 1) throw InvalidInputError("verify: trials must be >= 1");
  if (k_range.min < 1 || k_range.max > 12 || k_range.min > k_range.max) {
    throw InvalidInputError("verify: k range must satisfy 1 <= min <= max <= 12");
  }
  VerificationReport report;
  report.proposition = prop;
  report.trials = trials;
  report.seed = seed;
  report.k_range = k_range;
  report.tolerance = detail::tolerance_for(prop);
  report.counterexample_search = prop == PropositionId::SequentialNonReversal;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(trial));
    const auto outcome = detail::run_trial(prop, rng, k_range, params);
    if (outcome.deviation >= report.max_abs_deviation) {
      if (outcome.deviation > report.max_abs_deviation || report.worst_instance.empty()) {
        report.max_abs_deviation = outcome.deviation;
        report.worst_instance = outcome.instance;
      }
    }
  }
  report.passed = report.counterexample_search ? report.max_abs_deviation > report.tolerance
                                               : report.max_abs_deviation < report.tolerance;
  return report;
}

/// Run every proposition with the same trial budget and seed.
inline std::vector<VerificationReport> verify_all(int trials, std::uint64_t seed) {
  std::vector<VerificationReport> reports;
  reports.reserve(kAllPropositions.size());
  for (PropositionId id : kAllPropositions) reports.push_back(verify(id, trials, seed));
  return reports;
}

}  // namespace olt
