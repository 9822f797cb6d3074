#include <gtest/gtest.h>

#include <cmath>

#include "olt/model.hpp"
#include "olt/rng.hpp"
#include "oracles.hpp"

namespace {

const olt::ResponseFunction kLogistic = olt::ResponseFunction::logistic();

olt::OrdinalModel make(olt::Family fam, std::vector<double> deltas) {
  return olt::OrdinalModel(fam, kLogistic, olt::ItemThresholds("i", std::move(deltas)));
}

TEST(CategoryProbs, PcmSymmetricThirds) {
  const auto dist = olt::category_probs(make(olt::Family::AdjacentPcm, {0.0, 0.0}), 0.0);
  for (int r = 0; r <= 2; ++r) EXPECT_NEAR(dist.prob(r), 1.0 / 3.0, 1e-15);
}

TEST(CategoryProbs, SequentialHalving) {
  const auto dist = olt::category_probs(make(olt::Family::Sequential, {0.0, 0.0}), 0.0);
  EXPECT_NEAR(dist.prob(0), 0.5, 1e-15);
  EXPECT_NEAR(dist.prob(1), 0.25, 1e-15);
  EXPECT_NEAR(dist.prob(2), 0.25, 1e-15);
}

TEST(CategoryProbs, CumulativeDifferencesOfF) {
  // expected values from an independent logistic evaluation
  const double f_plus = oracle_ref::logistic(1.0);
  const double f_minus = oracle_ref::logistic(-1.0);
  const auto dist = olt::category_probs(make(olt::Family::Cumulative, {-1.0, 1.0}), 0.0);
  EXPECT_NEAR(dist.prob(0), 1.0 - f_plus, 1e-14);
  EXPECT_NEAR(dist.prob(1), f_plus - f_minus, 1e-14);
  EXPECT_NEAR(dist.prob(2), f_minus, 1e-14);
}

TEST(CategoryProbs, PcmEndCategorySymmetry) {
  // theta - delta_1 = -(theta - delta_2) forces P(0) = P(2)
  const auto dist = olt::category_probs(make(olt::Family::AdjacentPcm, {0.5, 1.5}), 1.0);
  EXPECT_NEAR(dist.prob(0), dist.prob(2), 1e-15);
}

TEST(CategoryProbs, NormalizationAcrossFamilies) {
  olt::Rng rng(101);
  for (int trial = 0; trial < 600; ++trial) {
    const int k = rng.uniform_int(1, 10);
    const double theta = rng.uniform(-5.0, 5.0);
    std::vector<double> deltas;
    for (int j = 0; j < k; ++j) deltas.push_back(rng.uniform(-5.0, 5.0));
    for (olt::Family fam : {olt::Family::Cumulative, olt::Family::Sequential, olt::Family::AdjacentPcm}) {
      auto d = deltas;
      if (fam == olt::Family::Cumulative) std::sort(d.begin(), d.end());
      const auto dist = olt::category_probs(make(fam, d), theta);
      double sum = 0.0;
      for (int r = 0; r <= k; ++r) {
        EXPECT_GE(dist.prob(r), 0.0);
        EXPECT_LE(dist.prob(r), 1.0);
        sum += dist.prob(r);
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(CategoryProbs, RaschReductionAtKOne) {
  olt::Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const double theta = rng.uniform(-4.0, 4.0);
    const double delta = rng.uniform(-4.0, 4.0);
    const double rasch = oracle_ref::logistic(theta - delta);
    for (olt::Family fam : {olt::Family::Cumulative, olt::Family::Sequential, olt::Family::AdjacentPcm}) {
      const auto dist = olt::category_probs(make(fam, {delta}), theta);
      EXPECT_NEAR(dist.prob(1), rasch, 1e-13);
    }
  }
}

TEST(CategoryProbs, MatchReferenceImplementations) {
  olt::Rng rng(55);
  for (int trial = 0; trial < 400; ++trial) {
    const int k = rng.uniform_int(1, 8);
    const double theta = rng.uniform(-3.0, 3.0);
    std::vector<double> deltas;
    for (int j = 0; j < k; ++j) deltas.push_back(rng.uniform(-3.0, 3.0));
    auto sorted = deltas;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_LT(oracle_ref::sup_distance(olt::category_probs(make(olt::Family::Cumulative, sorted), theta).probs(),
                                       oracle_ref::cumulative_probs(theta, sorted)),
              1e-13);
    EXPECT_LT(oracle_ref::sup_distance(olt::category_probs(make(olt::Family::Sequential, deltas), theta).probs(),
                                       oracle_ref::sequential_probs(theta, deltas)),
              1e-13);
    EXPECT_LT(oracle_ref::sup_distance(olt::category_probs(make(olt::Family::AdjacentPcm, deltas), theta).probs(),
                                       oracle_ref::pcm_probs(theta, deltas)),
              1e-13);
  }
}

TEST(CategoryProbs, InputValidation) {
  EXPECT_THROW(olt::category_probs(make(olt::Family::AdjacentPcm, {0.0}), std::nan("")),
               olt::InvalidInputError);
  EXPECT_THROW(make(olt::Family::Cumulative, {1.0, -1.0}), olt::OrderingViolationError);
  EXPECT_THROW(olt::ItemThresholds("i", {}), olt::InvalidInputError);
  EXPECT_THROW(olt::ItemThresholds("i", {std::nan("")}), olt::InvalidInputError);
}

TEST(Exceedance, BasicsAndMonotonicity) {
  EXPECT_NEAR(olt::exceedance_prob(make(olt::Family::Cumulative, {0.0}), 0.0, 1), 0.5, 1e-15);
  for (olt::Family fam : {olt::Family::Cumulative, olt::Family::Sequential, olt::Family::AdjacentPcm}) {
    EXPECT_DOUBLE_EQ(olt::exceedance_prob(make(fam, {0.0, 1.0}), 0.3, 0), 1.0);
  }
  const auto seq = make(olt::Family::Sequential, {0.0, 0.0});
  EXPECT_NEAR(olt::exceedance_prob(seq, 0.0, 2), 0.25, 1e-15);

  olt::Rng rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = rng.uniform_int(1, 6);
    std::vector<double> deltas;
    for (int j = 0; j < k; ++j) deltas.push_back(rng.uniform(-3.0, 3.0));
    std::sort(deltas.begin(), deltas.end());
    for (olt::Family fam : {olt::Family::Cumulative, olt::Family::Sequential, olt::Family::AdjacentPcm}) {
      const auto model = make(fam, deltas);
      const double theta = rng.uniform(-3.0, 3.0);
      double prev = 1.0;
      for (int r = 0; r <= k; ++r) {
        const double e = olt::exceedance_prob(model, theta, r);
        EXPECT_LE(e, prev + 1e-15);
        prev = e;
      }
      // strictly increasing in theta for every r >= 1
      for (int r = 1; r <= k; ++r) {
        double last = olt::exceedance_prob(model, -4.0, r);
        for (double t = -3.5; t <= 4.0; t += 0.5) {
          const double e = olt::exceedance_prob(model, t, r);
          EXPECT_GT(e, last);
          last = e;
        }
      }
    }
  }
  EXPECT_THROW(olt::exceedance_prob(seq, 0.0, 3), olt::IndexError);
  EXPECT_THROW(olt::exceedance_prob(seq, 0.0, -1), olt::IndexError);
}

TEST(AdjacentLogOdds, ClosedFormAndRatioAgreement) {
  EXPECT_NEAR(olt::adjacent_log_odds(make(olt::Family::AdjacentPcm, {0.5, 1.5}), 1.0, 1), 0.5, 1e-15);
  EXPECT_NEAR(olt::adjacent_log_odds(make(olt::Family::AdjacentPcm, {0.0, 0.0}), 0.0, 2), 0.0, 1e-15);

  const auto model = make(olt::Family::AdjacentPcm, {1.0});
  EXPECT_NEAR(olt::adjacent_log_odds(model, -2.0, 1), -3.0, 1e-15);
  const auto ref = oracle_ref::pcm_probs(-2.0, std::vector<double>{1.0});
  EXPECT_NEAR(std::log(ref[1] / ref[0]), olt::adjacent_log_odds(model, -2.0, 1), 1e-12);

  EXPECT_THROW(olt::adjacent_log_odds(make(olt::Family::Sequential, {0.0}), 0.0, 1),
               olt::UnsupportedOperationError);
  const olt::OrdinalModel probit(olt::Family::AdjacentPcm,
                                 olt::ResponseFunction::custom([](double x) {
                                   return 0.5 * std::erfc(-x / std::sqrt(2.0));
                                 }),
                                 olt::ItemThresholds("i", {0.0}));
  EXPECT_THROW(olt::adjacent_log_odds(probit, 0.0, 1), olt::UnsupportedOperationError);
}

TEST(LocalConditional, EqualsFAndRatio) {
  // theta = delta_r puts both local splits at one half
  EXPECT_NEAR(olt::local_conditional_prob(make(olt::Family::AdjacentPcm, {0.7, 1.3}), 0.7, 1), 0.5, 1e-15);
  EXPECT_NEAR(olt::local_conditional_prob(make(olt::Family::Sequential, {0.0, 0.0}), 0.0, 2), 0.5, 1e-15);

  const auto model = make(olt::Family::AdjacentPcm, {-0.2, 0.5});
  const double direct = olt::local_conditional_prob(model, 0.3, 1);
  EXPECT_NEAR(direct, oracle_ref::logistic(0.5), 1e-15);
  const auto ref = oracle_ref::pcm_probs(0.3, std::vector<double>{-0.2, 0.5});
  EXPECT_NEAR(direct, ref[1] / (ref[0] + ref[1]), 1e-12);

  EXPECT_THROW(olt::local_conditional_prob(make(olt::Family::Cumulative, {0.0}), 0.0, 1),
               olt::UnsupportedOperationError);
  EXPECT_THROW(olt::local_conditional_prob(model, 0.0, 0), olt::IndexError);
  EXPECT_THROW(olt::local_conditional_prob(model, 0.0, 3), olt::IndexError);
}

TEST(LocalConditional, EqualAdjacentProbabilitiesAtThreshold) {
  olt::Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = rng.uniform_int(2, 8);
    std::vector<double> deltas;
    for (int j = 0; j < k; ++j) deltas.push_back(rng.uniform(-3.0, 3.0));
    const int r = rng.uniform_int(1, k);
    const auto dist = olt::category_probs(make(olt::Family::AdjacentPcm, deltas),
                                          deltas[static_cast<std::size_t>(r) - 1]);
    EXPECT_NEAR(dist.prob(r), dist.prob(r - 1), 1e-12);
  }
}

TEST(ReversePcm, TransformAndDistributionReversal) {
  {
    const auto [model, theta] = olt::reverse_pcm(make(olt::Family::AdjacentPcm, {0.0, 0.0}), 0.0);
    EXPECT_DOUBLE_EQ(theta.theta, 0.0);
    EXPECT_EQ(model.thresholds().deltas(), (std::vector<double>{0.0, 0.0}));
  }
  {
    const auto [model, theta] = olt::reverse_pcm(make(olt::Family::AdjacentPcm, {-0.5, 2.0}), 1.0);
    EXPECT_DOUBLE_EQ(theta.theta, -1.0);
    EXPECT_EQ(model.thresholds().deltas(), (std::vector<double>{-2.0, 0.5}));
  }
  olt::Rng rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = rng.uniform_int(1, 8);
    const double theta = rng.uniform(-3.0, 3.0);
    std::vector<double> deltas;
    for (int j = 0; j < k; ++j) deltas.push_back(rng.uniform(-3.0, 3.0));
    const auto model = make(olt::Family::AdjacentPcm, deltas);
    const auto dist = olt::category_probs(model, theta);
    const auto [rev_model, rev_theta] = olt::reverse_pcm(model, theta);
    const auto rev = olt::category_probs(rev_model, rev_theta);
    for (int r = 0; r <= k; ++r) EXPECT_NEAR(rev.prob(r), dist.prob(k - r), 1e-12);
  }
  EXPECT_THROW(olt::reverse_pcm(make(olt::Family::Sequential, {0.0}), 0.0),
               olt::UnsupportedOperationError);
}

TEST(ReversePcm, SequentialCounterexamplePinned) {
  // regression instance found by randomized search: the analogous transform
  // (theta' = -theta, delta'_r = -delta_{k+1-r}) moves the sequential law by
  // more than 0.01 in sup norm
  const std::vector<double> deltas = {-2.0, 2.0};
  const double theta = 0.0;
  const auto dist = olt::category_probs(make(olt::Family::Sequential, deltas), theta);
  std::vector<double> reversed_neg(deltas.rbegin(), deltas.rend());
  for (double& v : reversed_neg) v = -v;
  const auto transformed = olt::category_probs(make(olt::Family::Sequential, reversed_neg), -theta);
  double dev = 0.0;
  for (int r = 0; r <= 2; ++r) {
    dev = std::max(dev, std::abs(transformed.prob(r) - dist.prob(2 - r)));
  }
  EXPECT_GT(dev, 0.01);
}

TEST(GeneralResponseFunction, AdjacentModelViaLocalOdds) {
  // a symmetric non-logistic CDF exercises the local-odds construction
  const auto probit = olt::ResponseFunction::custom(
      [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
  const olt::OrdinalModel model(olt::Family::AdjacentPcm, probit,
                                olt::ItemThresholds("i", {-0.4, 0.9, 0.2}));
  const auto dist = olt::category_probs(model, 0.6);
  double sum = 0.0;
  for (int r = 0; r <= 3; ++r) sum += dist.prob(r);
  EXPECT_NEAR(sum, 1.0, 1e-12);
  for (int r = 1; r <= 3; ++r) {
    const double m = probit(0.6 - model.thresholds().delta(r));
    EXPECT_NEAR(dist.prob(r) / (dist.prob(r - 1) + dist.prob(r)), m, 1e-12);
    EXPECT_NEAR(olt::local_conditional_prob(model, 0.6, r), m, 1e-12);
  }
  const auto [rev_model, rev_theta] = olt::reverse_pcm(model, 0.6);
  const auto rev = olt::category_probs(rev_model, rev_theta);
  for (int r = 0; r <= 3; ++r) EXPECT_NEAR(rev.prob(r), dist.prob(3 - r), 1e-12);
}

TEST(IccCurve, PointwiseAndShape) {
  const auto pcm = make(olt::Family::AdjacentPcm, {0.0, 0.0});
  const std::vector<double> single = {0.0};
  const auto curve = olt::icc_curve(pcm, 1, single);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_DOUBLE_EQ(curve[0].first, 0.0);
  EXPECT_NEAR(curve[0].second, 1.0 / 3.0, 1e-15);

  std::vector<double> grid;
  for (double t = -5.0; t <= 5.0 + 1e-12; t += 0.01) grid.push_back(t);
  const auto model = make(olt::Family::AdjacentPcm, {-1.0, 1.0});
  double prev_argmax = -1e9;
  for (int r = 0; r <= 2; ++r) {
    const auto c = olt::icc_curve(model, r, grid);
    std::size_t best = 0;
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (c[i].second > c[best].second) best = i;
    }
    EXPECT_GE(c[best].first, prev_argmax);
    prev_argmax = c[best].first;
  }

  // cumulative exceedance is nondecreasing along the grid
  const auto cum = make(olt::Family::Cumulative, {-0.5, 0.5});
  double prev = 0.0;
  for (double t : grid) {
    const double e = olt::exceedance_prob(cum, t, 1);
    EXPECT_GE(e, prev);
    prev = e;
  }

  EXPECT_THROW(olt::icc_curve(pcm, 1, std::vector<double>{}), olt::InvalidInputError);
  EXPECT_THROW(olt::icc_curve(pcm, 1, std::vector<double>{0.0, 0.0}), olt::InvalidInputError);
  EXPECT_THROW(olt::icc_curve(pcm, 3, single), olt::IndexError);
}

TEST(Distribution, Validation) {
  EXPECT_THROW(olt::OrdinalDistribution({0.5, 0.6}), olt::ValidationError);
  EXPECT_THROW(olt::OrdinalDistribution({1.2, -0.2}), olt::ValidationError);
  EXPECT_THROW(olt::OrdinalDistribution({1.0}), olt::InvalidInputError);
  const olt::OrdinalDistribution ok({0.25, 0.5, 0.25});
  EXPECT_EQ(ok.k(), 2);
  EXPECT_THROW(ok.prob(3), olt::IndexError);
}

}  // namespace
