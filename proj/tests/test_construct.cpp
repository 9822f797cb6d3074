#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "olt/binary.hpp"
#include "olt/construct.hpp"
#include "olt/rng.hpp"
#include "oracles.hpp"

namespace {

const olt::ResponseFunction kLogistic = olt::ResponseFunction::logistic();

TEST(BuildCumulative, DifferencesOfMarginals) {
  const auto dist = olt::build_cumulative(olt::BinaryBlockSpec(olt::BlockKind::MarginalRasch, {0.7, 0.2}));
  EXPECT_NEAR(dist.prob(0), 0.3, 1e-15);
  EXPECT_NEAR(dist.prob(1), 0.5, 1e-15);
  EXPECT_NEAR(dist.prob(2), 0.2, 1e-15);
}

TEST(BuildCumulative, RejectsIncreasingMarginalsNamingThePair) {
  try {
    olt::BinaryBlockSpec(olt::BlockKind::MarginalRasch, {0.2, 0.7});
    FAIL() << "expected an ordering violation";
  } catch (const olt::OrderingViolationError& e) {
    EXPECT_EQ(e.first, 1u);
    EXPECT_EQ(e.second, 2u);
  }
  try {
    olt::BinaryBlockSpec(olt::BlockKind::MarginalRasch, {0.9, 0.5, 0.6});
    FAIL() << "expected an ordering violation";
  } catch (const olt::OrderingViolationError& e) {
    EXPECT_EQ(e.first, 2u);
    EXPECT_EQ(e.second, 3u);
  }
}

TEST(BuildCumulative, MatchesClosedFormModel) {
  olt::Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = rng.uniform_int(1, 8);
    const double theta = rng.uniform(-3.0, 3.0);
    std::vector<double> deltas;
    for (int j = 0; j < k; ++j) deltas.push_back(rng.uniform(-3.0, 3.0));
    std::sort(deltas.begin(), deltas.end());
    std::vector<double> pis;
    for (double d : deltas) pis.push_back(oracle_ref::logistic(theta - d));
    const auto built = olt::build_cumulative(olt::BinaryBlockSpec(olt::BlockKind::MarginalRasch, pis));
    EXPECT_LT(oracle_ref::sup_distance(built.probs(), oracle_ref::cumulative_probs(theta, deltas)), 1e-13);
    // exceedance of the result reproduces the inputs
    for (int r = 1; r <= k; ++r) {
      EXPECT_NEAR(olt::dichotomize(built, olt::DichotomizationKind::CumulativeSplit, r),
                  pis[static_cast<std::size_t>(r) - 1], 1e-13);
    }
  }
}

TEST(BuildSequential, StoppingChainProducts) {
  const auto dist =
      olt::build_sequential(olt::BinaryBlockSpec(olt::BlockKind::ConditionalTransition, {0.5, 0.5}));
  EXPECT_NEAR(dist.prob(0), 0.5, 1e-15);
  EXPECT_NEAR(dist.prob(1), 0.25, 1e-15);
  EXPECT_NEAR(dist.prob(2), 0.25, 1e-15);

  const auto rasch = olt::build_sequential(olt::BinaryBlockSpec(olt::BlockKind::ConditionalTransition, {0.7}));
  EXPECT_NEAR(rasch.prob(0), 0.3, 1e-15);
  EXPECT_NEAR(rasch.prob(1), 0.7, 1e-15);

  // explicit path enumeration: each score is one stopping trajectory
  const std::vector<double> c = {0.8, 0.3, 0.9};
  const auto built = olt::build_sequential(olt::BinaryBlockSpec(olt::BlockKind::ConditionalTransition, c));
  const std::vector<double> paths = {1.0 - 0.8, 0.8 * (1.0 - 0.3), 0.8 * 0.3 * (1.0 - 0.9),
                                     0.8 * 0.3 * 0.9};
  EXPECT_LT(oracle_ref::sup_distance(built.probs(), paths), 1e-15);
}

TEST(BuildSequential, NoOrderingRequired) {
  // reversed implied thresholds are legitimate for conditional transitions
  const olt::BinaryBlockSpec spec(olt::BlockKind::ConditionalTransition, {0.3, 0.8});
  const auto implied = olt::implied_thresholds(spec);
  EXPECT_GT(implied[0], implied[1]);
  EXPECT_NO_THROW(olt::build_sequential(spec));
}

TEST(BuildPcm, OddsProducts) {
  const auto flat = olt::build_pcm(olt::BinaryBlockSpec(olt::BlockKind::LocalAdjacent, {0.5, 0.5}));
  for (int r = 0; r <= 2; ++r) EXPECT_NEAR(flat.prob(r), 1.0 / 3.0, 1e-14);

  // odds products (1, 2, 2) normalize to (0.2, 0.4, 0.4)
  const auto dist = olt::build_pcm(olt::BinaryBlockSpec(olt::BlockKind::LocalAdjacent, {2.0 / 3.0, 0.5}));
  EXPECT_NEAR(dist.prob(0), 0.2, 1e-14);
  EXPECT_NEAR(dist.prob(1), 0.4, 1e-14);
  EXPECT_NEAR(dist.prob(2), 0.4, 1e-14);
  EXPECT_NEAR(olt::dichotomize(dist, olt::DichotomizationKind::AdjacentConditional, 1), 2.0 / 3.0, 1e-13);
  EXPECT_NEAR(olt::dichotomize(dist, olt::DichotomizationKind::AdjacentConditional, 2), 0.5, 1e-13);
}

TEST(BuildPcm, MatchesClosedFormModel) {
  olt::Rng rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = rng.uniform_int(1, 8);
    const double theta = rng.uniform(-3.0, 3.0);
    std::vector<double> deltas;
    for (int j = 0; j < k; ++j) deltas.push_back(rng.uniform(-3.0, 3.0));
    std::vector<double> ms;
    for (double d : deltas) ms.push_back(oracle_ref::logistic(theta - d));
    const auto built = olt::build_pcm(olt::BinaryBlockSpec(olt::BlockKind::LocalAdjacent, ms));
    EXPECT_LT(oracle_ref::sup_distance(built.probs(), oracle_ref::pcm_probs(theta, deltas)), 1e-10);
    for (int r = 1; r <= k; ++r) {
      EXPECT_NEAR(olt::dichotomize(built, olt::DichotomizationKind::AdjacentConditional, r),
                  ms[static_cast<std::size_t>(r) - 1], 1e-12);
    }
  }
}

TEST(BuildPcm, LogitConstructionAgrees) {
  olt::Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = rng.uniform_int(1, 6);
    std::vector<double> logits;
    for (int j = 0; j < k; ++j) logits.push_back(rng.uniform(-4.0, 4.0));
    const auto from_logits = olt::BinaryBlockSpec::local_adjacent_from_logits(logits);
    std::vector<double> probs;
    for (double x : logits) probs.push_back(oracle_ref::logistic(x));
    const auto from_probs = olt::BinaryBlockSpec(olt::BlockKind::LocalAdjacent, probs);
    EXPECT_LT(oracle_ref::sup_distance(olt::build_pcm(from_logits).probs(),
                                       olt::build_pcm(from_probs).probs()),
              1e-12);
  }
}

TEST(Builders, RoundTripThroughDichotomization) {
  olt::Rng rng(3001);
  for (int trial = 0; trial < 400; ++trial) {
    const int k = rng.uniform_int(1, 8);
    const double theta = rng.uniform(-3.0, 3.0);
    std::vector<double> deltas;
    for (int j = 0; j < k; ++j) deltas.push_back(rng.uniform(-3.0, 3.0));
    for (olt::Family fam : {olt::Family::Cumulative, olt::Family::Sequential, olt::Family::AdjacentPcm}) {
      auto d = deltas;
      if (fam == olt::Family::Cumulative) std::sort(d.begin(), d.end());
      const olt::OrdinalModel model(fam, kLogistic, olt::ItemThresholds("i", d));
      const auto dist = olt::category_probs(model, theta);
      std::vector<double> blocks;
      for (int r = 1; r <= k; ++r) blocks.push_back(olt::dichotomize(dist, olt::matching_kind(fam), r));
      const auto rebuilt = [&] {
        switch (fam) {
          case olt::Family::Cumulative:
            return olt::build_cumulative(olt::BinaryBlockSpec(olt::BlockKind::MarginalRasch, blocks));
          case olt::Family::Sequential:
            return olt::build_sequential(olt::BinaryBlockSpec(olt::BlockKind::ConditionalTransition, blocks));
          default:
            return olt::build_pcm(olt::BinaryBlockSpec(olt::BlockKind::LocalAdjacent, blocks));
        }
      }();
      EXPECT_LT(oracle_ref::sup_distance(rebuilt.probs(), dist.probs()), 1e-12);
    }
  }
}

TEST(Builders, AcceptanceMatchesMonotonicityExactly) {
  olt::Rng rng(606);
  int rejected = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = rng.uniform_int(1, 6);
    std::vector<double> probs;
    for (int j = 0; j < k; ++j) probs.push_back(rng.uniform(0.0, 1.0));
    if (rng.bernoulli(0.5)) std::sort(probs.rbegin(), probs.rend());
    const bool nonincreasing = std::is_sorted(probs.rbegin(), probs.rend());
    bool accepted = true;
    try {
      olt::BinaryBlockSpec(olt::BlockKind::MarginalRasch, probs);
    } catch (const olt::OrderingViolationError&) {
      accepted = false;
      ++rejected;
    }
    EXPECT_EQ(accepted, nonincreasing);
  }
  EXPECT_GT(rejected, 0);
}

TEST(Builders, KindAndIntervalValidation) {
  const olt::BinaryBlockSpec marg(olt::BlockKind::MarginalRasch, {0.7, 0.2});
  EXPECT_THROW(olt::build_sequential(marg), olt::InvalidInputError);
  EXPECT_THROW(olt::build_pcm(marg), olt::InvalidInputError);
  const olt::BinaryBlockSpec cond(olt::BlockKind::ConditionalTransition, {0.7, 0.2});
  EXPECT_THROW(olt::build_cumulative(cond), olt::InvalidInputError);
  EXPECT_THROW(olt::BinaryBlockSpec(olt::BlockKind::LocalAdjacent, {0.5, 1.0}), olt::ValidationError);
  EXPECT_THROW(olt::BinaryBlockSpec(olt::BlockKind::LocalAdjacent, std::vector<double>{}),
               olt::InvalidInputError);
}

TEST(ImpliedThresholds, LogitScaleDiagnostic) {
  const olt::BinaryBlockSpec spec(olt::BlockKind::LocalAdjacent, {0.5, oracle_ref::logistic(-1.25)});
  const auto implied = olt::implied_thresholds(spec, 0.0);
  EXPECT_NEAR(implied[0], 0.0, 1e-12);
  EXPECT_NEAR(implied[1], 1.25, 1e-12);
  const auto shifted = olt::implied_thresholds(spec, 2.0);
  EXPECT_NEAR(shifted[0], 2.0, 1e-12);
}

}  // namespace
