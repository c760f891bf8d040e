#include "crowdsim/dcm.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <unordered_map>

#include "crowdsim/dcm_kernels.hpp"

namespace crowdsim::dcm {

void UtilitySpec::validate() const {
  if (num_factors() < 1) throw ContractError("utility spec needs K >= 1 factors");
  if (num_alternatives() < 2)
    throw ContractError("utility spec needs J >= 2 alternatives");
  if (asc_reference < 0 || asc_reference >= num_alternatives())
    throw ContractError("asc_reference out of range");
  std::set<std::string> names(factor_names.begin(), factor_names.end());
  if (static_cast<int>(names.size()) != num_factors())
    throw ContractError("factor names must be unique");
}

void ParameterVector::validate(const UtilitySpec& spec) const {
  if (static_cast<int>(betas.size()) != spec.num_factors())
    throw ContractError("beta length does not match factor count");
  if (static_cast<int>(ascs.size()) != spec.num_alternatives())
    throw ContractError("asc length does not match alternative count");
  for (double b : betas)
    if (!std::isfinite(b)) throw ContractError("non-finite beta");
  for (double a : ascs)
    if (!std::isfinite(a)) throw ContractError("non-finite asc");
  if (ascs[spec.asc_reference] != 0.0)
    throw ContractError("reference ASC must be 0");
}

void ChoiceModel::validate() const {
  spec.validate();
  params.validate(spec);
}

namespace {

void check_features(const ChoiceModel& model, std::span<const double> features) {
  const std::size_t want =
      static_cast<std::size_t>(model.spec.num_alternatives()) *
      model.spec.num_factors();
  if (features.size() != want)
    throw ContractError("feature matrix size does not match the utility spec");
}

int free_asc_index(int j, int ref) { return j < ref ? j : j - 1; }

}  // namespace

std::vector<double> deterministic_utility(const ChoiceModel& model,
                                          std::span<const double> features) {
  check_features(model, features);
  const int J = model.spec.num_alternatives();
  const int K = model.spec.num_factors();
  std::vector<double> v(J);
  for (int j = 0; j < J; ++j) {
    double vj = model.params.ascs[j];
    for (int k = 0; k < K; ++k)
      vj += model.params.betas[k] * features[static_cast<std::size_t>(j) * K + k];
    v[j] = vj;
  }
  return v;
}

void softmax_inplace(std::vector<double>& v) {
  const double vmax = *std::max_element(v.begin(), v.end());
  double denom = 0.0;
  for (double& x : v) {
    x = std::exp(x - vmax);
    denom += x;
  }
  for (double& x : v) x /= denom;
}

std::vector<double> choice_probabilities(const ChoiceModel& model,
                                         std::span<const double> features) {
  std::vector<double> v = deterministic_utility(model, features);
  softmax_inplace(v);
  return v;
}

LogLikelihood log_likelihood(const ChoiceModel& model,
                             std::span<const ChoiceObservation> observations) {
  model.validate();
  if (observations.empty()) return {0.0, true};
  const std::vector<double> theta = pack_free(model.spec, model.params);
  const LlTerms terms = ll_terms_serial(model.spec, theta, observations, false);
  return {terms.ll, false};
}

std::vector<double> ll_gradient(const ChoiceModel& model,
                                std::span<const ChoiceObservation> observations) {
  model.validate();
  const std::vector<double> theta = pack_free(model.spec, model.params);
  return ll_terms_serial(model.spec, theta, observations, false).grad;
}

std::vector<double> pack_free(const UtilitySpec& spec,
                              const ParameterVector& params) {
  std::vector<double> theta(spec.num_free());
  const int K = spec.num_factors();
  for (int k = 0; k < K; ++k) theta[k] = params.betas[k];
  for (int j = 0; j < spec.num_alternatives(); ++j)
    if (j != spec.asc_reference)
      theta[K + free_asc_index(j, spec.asc_reference)] = params.ascs[j];
  return theta;
}

ParameterVector unpack_free(const UtilitySpec& spec,
                            std::span<const double> theta) {
  ParameterVector p;
  const int K = spec.num_factors();
  p.betas.assign(theta.begin(), theta.begin() + K);
  p.ascs.assign(spec.num_alternatives(), 0.0);
  for (int j = 0; j < spec.num_alternatives(); ++j)
    if (j != spec.asc_reference)
      p.ascs[j] = theta[K + free_asc_index(j, spec.asc_reference)];
  return p;
}

namespace {

// Cholesky solve of A x = b for a small symmetric positive-definite A
// (row-major, overwritten). Returns false when A is not positive-definite.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double sum = a[static_cast<std::size_t>(i) * n + j];
      for (int k = 0; k < i; ++k)
        sum -= a[static_cast<std::size_t>(i) * n + k] *
               a[static_cast<std::size_t>(j) * n + k];
      if (i == j) {
        if (sum <= 0.0 || !std::isfinite(sum)) return false;
        a[static_cast<std::size_t>(i) * n + i] = std::sqrt(sum);
      } else {
        a[static_cast<std::size_t>(j) * n + i] =
            sum / a[static_cast<std::size_t>(i) * n + i];
      }
    }
  }
  for (int i = 0; i < n; ++i) {  // L y = b
    double sum = b[i];
    for (int k = 0; k < i; ++k)
      sum -= a[static_cast<std::size_t>(i) * n + k] * b[k];
    b[i] = sum / a[static_cast<std::size_t>(i) * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {  // L^T x = y
    double sum = b[i];
    for (int k = i + 1; k < n; ++k)
      sum -= a[static_cast<std::size_t>(k) * n + i] * b[k];
    b[i] = sum / a[static_cast<std::size_t>(i) * n + i];
  }
  return true;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void check_identifiable(const UtilitySpec& spec,
                        std::span<const ChoiceObservation> observations) {
  // Degenerate dataset: a single choice pattern with no feature contrast
  // anywhere pins nothing down.
  const int J = spec.num_alternatives();
  const int K = spec.num_factors();
  const int first = observations.front().chosen;
  bool same_choice = true;
  bool any_contrast = false;
  for (const ChoiceObservation& o : observations) {
    if (static_cast<int>(o.features.size()) != J * K)
      throw ContractError("observation feature matrix does not match spec");
    if (o.chosen < 0 || o.chosen >= J)
      throw ContractError("chosen alternative out of range");
    if (o.chosen != first) same_choice = false;
    for (int k = 0; k < K && !any_contrast; ++k)
      for (int j = 1; j < J; ++j)
        if (o.x(j, k, K) != o.x(0, k, K)) {
          any_contrast = true;
          break;
        }
    if (!same_choice && any_contrast) break;
  }
  if (same_choice && !any_contrast)
    throw ContractError(
        "dataset is unidentifiable: one choice pattern and no feature "
        "contrast between alternatives");
}

}  // namespace

EstimateResult estimate(const UtilitySpec& spec,
                        std::span<const ChoiceObservation> observations,
                        const EstimateOptions& opts) {
  spec.validate();
  if (observations.empty())
    throw ContractError("estimate requires at least one observation");
  check_identifiable(spec, observations);

  const int D = spec.num_free();
  std::vector<double> theta(D, 0.0);

  auto eval = [&](std::span<const double> th, bool hess) {
    return opts.threads == 1
               ? ll_terms_serial(spec, th, observations, hess)
               : ll_terms_parallel(spec, th, observations, hess, opts.threads);
  };

  LlTerms cur = eval(theta, true);
  EstimateResult result;
  result.report.initial_ll = cur.ll;
  result.report.ll_trace.push_back(cur.ll);

  std::vector<double> step(D), trial(D), hwork;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    result.report.gradient_inf_norm = inf_norm(cur.grad);
    if (result.report.gradient_inf_norm < opts.gradient_tolerance) {
      result.report.converged = true;
      break;
    }
    if (inf_norm(theta) > opts.separation_bound) {
      result.report.separation = true;
      result.report.message =
          "parameter diverging; data look separable for some alternative";
      break;
    }

    // Newton direction: (-H) d = g. -H is PSD for the MNL log-likelihood,
    // so a failed factorization means a rank-deficient direction; fall back
    // to plain gradient ascent.
    hwork.assign(cur.hess.begin(), cur.hess.end());
    for (double& h : hwork) h = -h;
    step = cur.grad;
    if (!cholesky_solve(hwork, step, D)) step = cur.grad;

    double alpha = 1.0;
    bool accepted = false;
    for (int half = 0; half < 40; ++half) {
      for (int i = 0; i < D; ++i) trial[i] = theta[i] + alpha * step[i];
      const LlTerms t = eval(trial, false);
      if (std::isfinite(t.ll) && t.ll >= cur.ll) {
        theta = trial;
        cur = eval(theta, true);
        cur.ll = t.ll;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No ascent step found: numerically at the optimum.
      result.report.converged =
          result.report.gradient_inf_norm < 1e2 * opts.gradient_tolerance;
      break;
    }
    result.report.ll_trace.push_back(cur.ll);
  }
  if (iter == opts.max_iterations)
    result.report.message = "iteration limit reached";

  result.report.iterations = iter;
  result.report.final_ll = cur.ll;
  result.report.gradient_inf_norm = inf_norm(cur.grad);
  if (result.report.gradient_inf_norm < opts.gradient_tolerance)
    result.report.converged = true;
  result.params = unpack_free(spec, theta);
  return result;
}

double predict_accuracy(const ChoiceModel& model,
                        std::span<const ChoiceObservation> observations) {
  if (observations.empty())
    throw ContractError("predict_accuracy requires observations");
  long correct = 0;
  for (const ChoiceObservation& o : observations) {
    const std::vector<double> p = choice_probabilities(model, o.features);
    int best = 0;
    for (int j = 1; j < static_cast<int>(p.size()); ++j)
      if (p[j] > p[best]) best = j;  // strict: ties keep the lowest index
    if (best == o.chosen) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(observations.size());
}

CvResult k_fold_cv(const UtilitySpec& spec,
                   std::span<const ChoiceObservation> observations, int k,
                   Grouping grouping, rng::SplitMix64& g,
                   const EstimateOptions& opts) {
  if (k < 2) throw ContractError("k-fold CV needs k >= 2");

  // Group keys in first-appearance order, then a seeded shuffle and a
  // round-robin assignment gives near-equal fold sizes.
  std::vector<std::vector<std::size_t>> groups;
  if (grouping == Grouping::ByObservation) {
    groups.resize(observations.size());
    for (std::size_t i = 0; i < observations.size(); ++i) groups[i] = {i};
  } else {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < observations.size(); ++i) {
      auto [it, inserted] =
          index.try_emplace(observations[i].individual_id, groups.size());
      if (inserted) groups.emplace_back();
      groups[it->second].push_back(i);
    }
  }
  if (static_cast<int>(groups.size()) < k)
    throw ContractError("fewer groups than folds");

  std::vector<std::size_t> order(groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng::shuffle(order, g);

  std::vector<int> fold_of(groups.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    fold_of[order[pos]] = static_cast<int>(pos % k);

  CvResult result;
  long pooled_correct = 0;
  long pooled_total = 0;
  for (int f = 0; f < k; ++f) {
    std::vector<ChoiceObservation> train, test;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      auto& dst = fold_of[gi] == f ? test : train;
      for (std::size_t oi : groups[gi]) dst.push_back(observations[oi]);
    }
    EstimateResult fit = estimate(spec, train, opts);
    ChoiceModel m{spec, fit.params};
    CvFold fold;
    fold.params = fit.params;
    fold.report = fit.report;
    fold.test_size = static_cast<int>(test.size());
    fold.accuracy = test.empty() ? 0.0 : predict_accuracy(m, test);
    pooled_correct += std::lround(fold.accuracy * fold.test_size);
    pooled_total += fold.test_size;
    result.folds.push_back(std::move(fold));
    result.mean_accuracy += fold.accuracy;
  }
  result.mean_accuracy /= k;
  result.pooled_accuracy =
      pooled_total == 0 ? 0.0
                        : static_cast<double>(pooled_correct) / pooled_total;
  return result;
}

}  // namespace crowdsim::dcm
