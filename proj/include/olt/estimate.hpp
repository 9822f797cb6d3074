#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "olt/errors.hpp"
#include "olt/model.hpp"
#include "olt/numeric.hpp"

namespace olt {

/// Declares an item identifier and its category count; responses take values
/// in 0..k.
struct ItemShell {
  std::string id;
  int k = 1;
};

/// Person-by-item response matrix. Missing cells carry kMissing and are
/// skipped by all likelihood computations.
struct Dataset {
  static constexpr int kMissing = -1;

  std::vector<ItemShell> items;
  std::vector<std::string> person_ids;
  std::vector<std::vector<int>> responses;  // responses[person][item]

  int n_persons() const noexcept { return static_cast<int>(responses.size()); }
  int n_items() const noexcept { return static_cast<int>(items.size()); }

  /// Shape and range checks; throws ValidationError.
  void validate() const {
    if (person_ids.size() != responses.size()) {
      throw ValidationError("dataset: person ids and response rows disagree");
    }
    for (const auto& item : items) {
      if (item.k < 1) throw ValidationError("dataset: item '" + item.id + "' declares k < 1");
    }
    for (std::size_t p = 0; p < responses.size(); ++p) {
      if (responses[p].size() != items.size()) {
        throw ValidationError("dataset: row " + std::to_string(p + 1) + " is not rectangular");
      }
      for (std::size_t i = 0; i < items.size(); ++i) {
        const int y = responses[p][i];
        if (y == kMissing) continue;
        if (y < 0 || y > items[i].k) {
          throw ValidationError("dataset: response " + std::to_string(y) + " outside 0.." +
                                std::to_string(items[i].k) + " for item '" + items[i].id + "'");
        }
      }
    }
  }
};

struct FitOptions {
  enum class Mode { FixAbilities, JointAlternating };
  Mode mode = Mode::FixAbilities;
  int max_iter = 200;
  double tol = 1e-8;   // sup-norm gradient tolerance
  bool anchor = true;  // joint mode: recenter abilities to mean zero
};

struct FitResult {
  std::vector<std::vector<double>> thresholds;  // per item
  std::vector<double> abilities;                // estimated (joint) or echoed (fixed)
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = std::numeric_limits<double>::infinity();
  bool anchored = false;
  bool numeric_gradient = false;
};

struct LogLikGradient {
  std::vector<std::vector<double>> thresholds;
  std::vector<double> abilities;  // empty unless abilities are free

  double sup_norm() const noexcept {
    double m = 0.0;
    for (const auto& block : thresholds) {
      for (double g : block) m = std::max(m, std::abs(g));
    }
    for (double g : abilities) m = std::max(m, std::abs(g));
    return m;
  }
};

namespace detail {

/// log P(Y = y | theta) for one cell, log space throughout. May return -inf
/// when a category probability underflow-saturates.
inline double cell_log_prob(Family fam, const ResponseFunction& F, std::span<const double> d,
                            double theta, int y) {
  const int k = static_cast<int>(d.size());
  switch (fam) {
    case Family::Cumulative: {
      const double upper = y == 0 ? 1.0 : F(theta - d[static_cast<std::size_t>(y) - 1]);
      const double lower = y == k ? 0.0 : F(theta - d[static_cast<std::size_t>(y)]);
      return std::log(std::max(upper - lower, 0.0));
    }
    case Family::Sequential: {
      double ll = 0.0;
      for (int j = 0; j < y; ++j) {
        const double x = theta - d[static_cast<std::size_t>(j)];
        ll += F.is_logistic() ? log_logistic(x) : std::log(F(x));
      }
      if (y < k) {
        const double x = d[static_cast<std::size_t>(y)] - theta;
        ll += F.is_logistic() ? log_logistic(x) : std::log(F(x));
      }
      return ll;
    }
    case Family::AdjacentPcm: {
      std::vector<double> u(static_cast<std::size_t>(k) + 1, 0.0);
      double acc = 0.0;
      for (int r = 0; r < k; ++r) {
        if (F.is_logistic()) {
          acc += theta - d[static_cast<std::size_t>(r)];
        } else {
          const double m = F(theta - d[static_cast<std::size_t>(r)]);
          acc += std::log(m) - std::log1p(-m);
        }
        u[static_cast<std::size_t>(r) + 1] = acc;
      }
      return u[static_cast<std::size_t>(y)] - log_sum_exp(u);
    }
  }
  return 0.0;
}

/// Adds the cell's threshold gradient into `gd` and returns the theta
/// gradient. Logistic response function only.
inline double accumulate_cell_gradient(Family fam, std::span<const double> d, double theta, int y,
                                       std::span<double> gd) {
  const int k = static_cast<int>(d.size());
  switch (fam) {
    case Family::Cumulative: {
      const double upper = y == 0 ? 1.0 : logistic_cdf(theta - d[static_cast<std::size_t>(y) - 1]);
      const double lower = y == k ? 0.0 : logistic_cdf(theta - d[static_cast<std::size_t>(y)]);
      const double p = upper - lower;
      const double dens_upper = y == 0 ? 0.0 : upper * (1.0 - upper);
      const double dens_lower = y == k ? 0.0 : lower * (1.0 - lower);
      if (y >= 1) gd[static_cast<std::size_t>(y) - 1] -= dens_upper / p;
      if (y <= k - 1) gd[static_cast<std::size_t>(y)] += dens_lower / p;
      return (dens_upper - dens_lower) / p;
    }
    case Family::Sequential: {
      double gt = 0.0;
      for (int j = 0; j < y; ++j) {
        const double fail = logistic_cdf(d[static_cast<std::size_t>(j)] - theta);  // 1 - F
        gd[static_cast<std::size_t>(j)] -= fail;
        gt += fail;
      }
      if (y < k) {
        const double succ = logistic_cdf(theta - d[static_cast<std::size_t>(y)]);
        gd[static_cast<std::size_t>(y)] += succ;
        gt -= succ;
      }
      return gt;
    }
    case Family::AdjacentPcm: {
      std::vector<double> u(static_cast<std::size_t>(k) + 1, 0.0);
      double acc = 0.0;
      for (int r = 0; r < k; ++r) {
        acc += theta - d[static_cast<std::size_t>(r)];
        u[static_cast<std::size_t>(r) + 1] = acc;
      }
      const auto probs = softmax_from_log_weights(u);
      double mean = 0.0;
      for (int r = 1; r <= k; ++r) mean += r * probs[static_cast<std::size_t>(r)];
      double tail = 0.0;
      for (int j = k; j >= 1; --j) {
        tail += probs[static_cast<std::size_t>(j)];
        gd[static_cast<std::size_t>(j) - 1] += tail - (y >= j ? 1.0 : 0.0);
      }
      return static_cast<double>(y) - mean;
    }
  }
  return 0.0;
}

}  // namespace detail

/// Sum of log category probabilities over all non-missing cells. An empty
/// dataset yields 0.
inline double log_likelihood(const Dataset& data, Family family,
                             const std::vector<std::vector<double>>& thresholds,
                             std::span<const double> abilities,
                             const ResponseFunction& rf = ResponseFunction::logistic()) {
  data.validate();
  if (thresholds.size() != static_cast<std::size_t>(data.n_items())) {
    throw InvalidInputError("log likelihood: thresholds and items disagree");
  }
  for (int i = 0; i < data.n_items(); ++i) {
    if (static_cast<int>(thresholds[static_cast<std::size_t>(i)].size()) != data.items[static_cast<std::size_t>(i)].k) {
      throw InvalidInputError("log likelihood: threshold block length != item k");
    }
  }
  if (abilities.size() != static_cast<std::size_t>(data.n_persons())) {
    throw InvalidInputError("log likelihood: abilities and persons disagree");
  }
  double ll = 0.0;
  for (int p = 0; p < data.n_persons(); ++p) {
    for (int i = 0; i < data.n_items(); ++i) {
      const int y = data.responses[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)];
      if (y == Dataset::kMissing) continue;
      ll += detail::cell_log_prob(family, rf, thresholds[static_cast<std::size_t>(i)],
                                  abilities[static_cast<std::size_t>(p)], y);
    }
  }
  return ll;
}

/// Analytic gradient of the log likelihood with respect to all thresholds
/// (and abilities when `free_abilities`). Logistic response function only;
/// verified against central finite differences in the tests.
inline LogLikGradient gradient(const Dataset& data, Family family,
                               const std::vector<std::vector<double>>& thresholds,
                               std::span<const double> abilities, bool free_abilities = false,
                               const ResponseFunction& rf = ResponseFunction::logistic()) {
  if (!rf.is_logistic()) {
    throw UnsupportedOperationError(
        "analytic gradient requires the logistic response function; fit() falls back to finite "
        "differences for custom response functions");
  }
  data.validate();
  if (thresholds.size() != static_cast<std::size_t>(data.n_items()) ||
      abilities.size() != static_cast<std::size_t>(data.n_persons())) {
    throw InvalidInputError("gradient: dimensions disagree with dataset");
  }
  LogLikGradient grad;
  grad.thresholds.resize(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    grad.thresholds[i].assign(thresholds[i].size(), 0.0);
  }
  if (free_abilities) grad.abilities.assign(abilities.size(), 0.0);
  for (int p = 0; p < data.n_persons(); ++p) {
    for (int i = 0; i < data.n_items(); ++i) {
      const int y = data.responses[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)];
      if (y == Dataset::kMissing) continue;
      const double gt = detail::accumulate_cell_gradient(
          family, thresholds[static_cast<std::size_t>(i)], abilities[static_cast<std::size_t>(p)],
          y, grad.thresholds[static_cast<std::size_t>(i)]);
      if (free_abilities) grad.abilities[static_cast<std::size_t>(p)] += gt;
    }
  }
  return grad;
}

namespace detail {

// Maximizes the per-item and per-person blocks by damped Newton steps with a
// backtracking (Armijo) line search; the Hessian is a central finite
// difference of the gradient. Blocks are separable: items given abilities,
// persons given items.
class Fitter {
 public:
  Fitter(const Dataset& data, Family family, const FitOptions& opt, const ResponseFunction& rf)
      : data_(data), family_(family), opt_(opt), rf_(rf) {
    item_cells_.resize(static_cast<std::size_t>(data.n_items()));
    person_cells_.resize(static_cast<std::size_t>(data.n_persons()));
    for (int p = 0; p < data.n_persons(); ++p) {
      for (int i = 0; i < data.n_items(); ++i) {
        const int y = data.responses[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)];
        if (y == Dataset::kMissing) continue;
        item_cells_[static_cast<std::size_t>(i)].push_back({p, y});
        person_cells_[static_cast<std::size_t>(p)].push_back({i, y});
      }
    }
    deltas_.resize(static_cast<std::size_t>(data.n_items()));
    for (int i = 0; i < data.n_items(); ++i) {
      deltas_[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(data.items[static_cast<std::size_t>(i)].k), 0.0);
    }
    // tied thresholds give the cumulative family zero-probability middle
    // categories (a -inf starting likelihood); seed them from the pooled
    // exceedance frequencies instead, which are ordered by construction
    if (family_ == Family::Cumulative) {
      for (int i = 0; i < data.n_items(); ++i) {
        const auto& cells = item_cells_[static_cast<std::size_t>(i)];
        if (cells.empty()) continue;
        const int k = data.items[static_cast<std::size_t>(i)].k;
        for (int r = 1; r <= k; ++r) {
          long tail = 0;
          for (const auto& [p, y] : cells) tail += y >= r ? 1 : 0;
          const double phat = std::clamp(static_cast<double>(tail) / static_cast<double>(cells.size()),
                                         1e-3, 1.0 - 1e-3);
          deltas_[static_cast<std::size_t>(i)][static_cast<std::size_t>(r) - 1] = -logit(phat);
        }
        auto& d = deltas_[static_cast<std::size_t>(i)];
        std::sort(d.begin(), d.end());
        for (std::size_t j = 1; j < d.size(); ++j) {
          if (d[j] <= d[j - 1]) d[j] = d[j - 1] + 1e-6;  // clamping may have tied them
        }
      }
    }
    thetas_.assign(static_cast<std::size_t>(data.n_persons()), 0.0);
  }

  void check_degenerate_items() const {
    for (int i = 0; i < data_.n_items(); ++i) {
      const int k = data_.items[static_cast<std::size_t>(i)].k;
      std::vector<long> counts(static_cast<std::size_t>(k) + 1, 0);
      for (const auto& [p, y] : item_cells_[static_cast<std::size_t>(i)]) {
        ++counts[static_cast<std::size_t>(y)];
      }
      std::vector<int> empty;
      for (int c = 0; c <= k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) empty.push_back(c);
      }
      if (!empty.empty()) {
        std::string msg = "item '" + data_.items[static_cast<std::size_t>(i)].id +
                          "' has empty categories:";
        for (int c : empty) msg += " " + std::to_string(c);
        throw DegenerateItemError(msg, data_.items[static_cast<std::size_t>(i)].id, empty);
      }
    }
  }

  void set_abilities(std::span<const double> thetas) {
    std::copy(thetas.begin(), thetas.end(), thetas_.begin());
  }

  void set_thresholds(const std::vector<std::vector<double>>& deltas) { deltas_ = deltas; }

  double item_loglik(int i, std::span<const double> d) const {
    double ll = 0.0;
    for (const auto& [p, y] : item_cells_[static_cast<std::size_t>(i)]) {
      ll += cell_log_prob(family_, rf_, d, thetas_[static_cast<std::size_t>(p)], y);
    }
    return ll;
  }

  std::vector<double> item_gradient(int i, std::span<const double> d) const {
    std::vector<double> g(d.size(), 0.0);
    if (rf_.is_logistic()) {
      for (const auto& [p, y] : item_cells_[static_cast<std::size_t>(i)]) {
        accumulate_cell_gradient(family_, d, thetas_[static_cast<std::size_t>(p)], y, g);
      }
      return g;
    }
    used_numeric_gradient_ = true;
    std::vector<double> probe(d.begin(), d.end());
    for (std::size_t j = 0; j < probe.size(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(probe[j]));
      const double keep = probe[j];
      probe[j] = keep + h;
      const double up = item_loglik(i, probe);
      probe[j] = keep - h;
      const double dn = item_loglik(i, probe);
      probe[j] = keep;
      g[j] = (up - dn) / (2.0 * h);
    }
    return g;
  }

  /// One damped Newton pass over item i; returns sup norm of the gradient
  /// before the step.
  double item_newton_step(int i) {
    auto& d = deltas_[static_cast<std::size_t>(i)];
    const auto g = item_gradient(i, d);
    double gnorm = 0.0;
    for (double v : g) gnorm = std::max(gnorm, std::abs(v));
    if (gnorm < opt_.tol) return gnorm;

    const auto n = static_cast<Eigen::Index>(d.size());
    Eigen::MatrixXd hess(n, n);
    std::vector<double> probe = d;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(probe[static_cast<std::size_t>(j)]));
      const double keep = probe[static_cast<std::size_t>(j)];
      probe[static_cast<std::size_t>(j)] = keep + h;
      const auto up = item_gradient(i, probe);
      probe[static_cast<std::size_t>(j)] = keep - h;
      const auto dn = item_gradient(i, probe);
      probe[static_cast<std::size_t>(j)] = keep;
      for (Eigen::Index l = 0; l < n; ++l) {
        hess(l, j) = (up[static_cast<std::size_t>(l)] - dn[static_cast<std::size_t>(l)]) / (2.0 * h);
      }
    }
    hess = 0.5 * (hess + hess.transpose()).eval();

    Eigen::VectorXd grad_vec(n);
    for (Eigen::Index j = 0; j < n; ++j) grad_vec(j) = g[static_cast<std::size_t>(j)];
    Eigen::VectorXd step = (-hess).ldlt().solve(grad_vec);
    if (!step.allFinite() || grad_vec.dot(step) <= 0.0) {
      step = grad_vec / std::max(1.0, grad_vec.template lpNorm<Eigen::Infinity>());
    }

    const double base = item_loglik(i, d);
    const double slope = grad_vec.dot(step);
    // once the required improvement drops below the likelihood's evaluation
    // noise the Armijo test is meaningless: a zero-length step would pass it
    const double noise = 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(base) + 1.0);
    double alpha = 1.0;
    std::vector<double> trial(d.size());
    while (alpha > 1e-12 && 1e-4 * alpha * slope > noise) {
      for (std::size_t j = 0; j < d.size(); ++j) trial[j] = d[j] + alpha * step(static_cast<Eigen::Index>(j));
      const double ll = item_loglik(i, trial);
      if (std::isfinite(ll) && ll >= base + 1e-4 * alpha * slope) {
        d = trial;
        return gnorm;
      }
      alpha *= 0.5;
    }
    // the expected improvement sits below the likelihood's evaluation noise;
    // in the quadratic region the undamped Newton step still shrinks the
    // gradient, so take it when it demonstrably does
    for (std::size_t j = 0; j < d.size(); ++j) trial[j] = d[j] + step(static_cast<Eigen::Index>(j));
    if (std::isfinite(item_loglik(i, trial))) {
      const auto trial_grad = item_gradient(i, trial);
      double trial_norm = 0.0;
      for (double v : trial_grad) trial_norm = std::max(trial_norm, std::abs(v));
      if (trial_norm < gnorm) d = trial;
    }
    return gnorm;
  }

  double person_loglik(int p, double theta) const {
    double ll = 0.0;
    for (const auto& [i, y] : person_cells_[static_cast<std::size_t>(p)]) {
      ll += cell_log_prob(family_, rf_, deltas_[static_cast<std::size_t>(i)], theta, y);
    }
    return ll;
  }

  double person_gradient(int p, double theta) const {
    if (!rf_.is_logistic()) {
      used_numeric_gradient_ = true;
      const double h = 1e-6 * std::max(1.0, std::abs(theta));
      return (person_loglik(p, theta + h) - person_loglik(p, theta - h)) / (2.0 * h);
    }
    double g = 0.0;
    std::vector<double> scratch;
    for (const auto& [i, y] : person_cells_[static_cast<std::size_t>(p)]) {
      const auto& d = deltas_[static_cast<std::size_t>(i)];
      scratch.assign(d.size(), 0.0);
      g += accumulate_cell_gradient(family_, d, theta, y, scratch);
    }
    return g;
  }

  double person_newton_step(int p) {
    double& theta = thetas_[static_cast<std::size_t>(p)];
    const double g = person_gradient(p, theta);
    if (std::abs(g) < opt_.tol) return std::abs(g);
    const double h = 1e-5 * std::max(1.0, std::abs(theta));
    const double curv = (person_gradient(p, theta + h) - person_gradient(p, theta - h)) / (2.0 * h);
    double step = curv < 0.0 ? -g / curv : g;
    if (!std::isfinite(step)) step = g;
    const double base = person_loglik(p, theta);
    const double noise = 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(base) + 1.0);
    double alpha = 1.0;
    while (alpha > 1e-12 && 1e-4 * alpha * g * step > noise) {
      const double trial = theta + alpha * step;
      const double ll = person_loglik(p, trial);
      if (std::isfinite(ll) && ll >= base + 1e-4 * alpha * g * step) {
        theta = trial;
        return std::abs(g);
      }
      alpha *= 0.5;
    }
    // same terminal rule as the item block: below evaluation noise, accept
    // the undamped step when it shrinks the gradient
    const double trial = theta + step;
    if (std::isfinite(person_loglik(p, trial)) && std::abs(person_gradient(p, trial)) < std::abs(g)) {
      theta = trial;
    }
    return std::abs(g);
  }

  /// Shift invariance: subtracting the mean ability from both blocks leaves
  /// the likelihood unchanged and pins the location.
  void anchor() {
    if (thetas_.empty()) return;
    double mean = 0.0;
    for (double t : thetas_) mean += t;
    mean /= static_cast<double>(thetas_.size());
    for (double& t : thetas_) t -= mean;
    for (auto& block : deltas_) {
      for (double& d : block) d -= mean;
    }
  }

  double full_gradient_norm(bool free_abilities) const {
    double m = 0.0;
    for (int i = 0; i < data_.n_items(); ++i) {
      const auto g = item_gradient(i, deltas_[static_cast<std::size_t>(i)]);
      for (double v : g) m = std::max(m, std::abs(v));
    }
    if (free_abilities) {
      for (int p = 0; p < data_.n_persons(); ++p) {
        m = std::max(m, std::abs(person_gradient(p, thetas_[static_cast<std::size_t>(p)])));
      }
    }
    return m;
  }

  double current_loglik() const {
    double ll = 0.0;
    for (int i = 0; i < data_.n_items(); ++i) ll += item_loglik(i, deltas_[static_cast<std::size_t>(i)]);
    return ll;
  }

  const std::vector<std::vector<double>>& thresholds() const noexcept { return deltas_; }
  const std::vector<double>& abilities() const noexcept { return thetas_; }
  bool used_numeric_gradient() const noexcept { return used_numeric_gradient_; }
  const std::vector<std::pair<int, int>>& cells_of_person(int p) const {
    return person_cells_[static_cast<std::size_t>(p)];
  }

 private:
  const Dataset& data_;
  Family family_;
  FitOptions opt_;
  ResponseFunction rf_;
  std::vector<std::vector<std::pair<int, int>>> item_cells_;    // (person, y)
  std::vector<std::vector<std::pair<int, int>>> person_cells_;  // (item, y)
  std::vector<std::vector<double>> deltas_;
  std::vector<double> thetas_;
  mutable bool used_numeric_gradient_ = false;
};

}  // namespace detail

/// Maximum-likelihood fit of item thresholds, either with abilities held
/// fixed at supplied values or jointly with abilities by alternating blocks.
/// Non-convergence is reported through `converged`, not an exception; items
/// with unobserved categories raise DegenerateItemError.
inline FitResult fit(const Dataset& data, Family family, const FitOptions& opt,
                     std::span<const double> abilities = {},
                     const ResponseFunction& rf = ResponseFunction::logistic(),
                     const std::vector<std::vector<double>>* start_thresholds = nullptr) {
  data.validate();
  detail::Fitter fitter(data, family, opt, rf);
  fitter.check_degenerate_items();

  const bool joint = opt.mode == FitOptions::Mode::JointAlternating;
  if (!joint) {
    if (abilities.size() != static_cast<std::size_t>(data.n_persons())) {
      throw InvalidInputError("fit: fixed-ability mode needs one ability per person");
    }
    fitter.set_abilities(abilities);
  } else {
    if (!abilities.empty()) {
      if (abilities.size() != static_cast<std::size_t>(data.n_persons())) {
        throw InvalidInputError("fit: starting abilities must match the number of persons");
      }
      fitter.set_abilities(abilities);
    }
    for (int p = 0; p < data.n_persons(); ++p) {
      if (fitter.cells_of_person(p).empty()) {
        throw ValidationError("fit: person '" + data.person_ids[static_cast<std::size_t>(p)] +
                              "' has no observed responses; ability not identifiable");
      }
    }
  }
  if (start_thresholds != nullptr) fitter.set_thresholds(*start_thresholds);

  FitResult result;
  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    const double gnorm = fitter.full_gradient_norm(joint);
    if (gnorm < opt.tol) {
      result.converged = true;
      break;
    }
    for (int i = 0; i < data.n_items(); ++i) fitter.item_newton_step(i);
    if (joint) {
      for (int p = 0; p < data.n_persons(); ++p) fitter.person_newton_step(p);
      if (opt.anchor) fitter.anchor();
    }
  }
  result.iterations = iter;
  result.gradient_norm = fitter.full_gradient_norm(joint);
  result.converged = result.gradient_norm < opt.tol;
  result.thresholds = fitter.thresholds();
  result.abilities = fitter.abilities();
  result.log_likelihood = fitter.current_loglik();
  result.anchored = joint && opt.anchor;
  result.numeric_gradient = fitter.used_numeric_gradient();
  return result;
}

}  // namespace olt
