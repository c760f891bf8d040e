#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crowdsim/errors.hpp"
#include "crowdsim/rng.hpp"

namespace crowdsim::dcm {

/// Utility specification: which factors enter the deterministic utility,
/// which alternatives exist, and which alternative's constant is pinned to 0.
struct UtilitySpec {
  std::vector<std::string> factor_names;  // length K, unique
  std::vector<std::string> alternatives;  // length J >= 2
  int asc_reference = 0;                  // ASC of this alternative fixed at 0

  int num_factors() const { return static_cast<int>(factor_names.size()); }
  int num_alternatives() const { return static_cast<int>(alternatives.size()); }
  /// Free parameter count: K betas plus J-1 unpinned constants.
  int num_free() const { return num_factors() + num_alternatives() - 1; }

  void validate() const;
};

/// One shared beta per factor plus one constant per alternative
/// (ascs[asc_reference] is identically 0).
struct ParameterVector {
  std::vector<double> betas;  // length K
  std::vector<double> ascs;   // length J

  void validate(const UtilitySpec& spec) const;
};

/// A single recorded decision: J x K factor matrix and the chosen index.
struct ChoiceObservation {
  std::string individual_id;
  double time_s = 0.0;
  std::vector<double> features;  // row-major J x K
  int chosen = 0;

  double x(int j, int k, int num_factors) const {
    return features[static_cast<std::size_t>(j) * num_factors + k];
  }
};

struct ChoiceModel {
  UtilitySpec spec;
  ParameterVector params;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

/// V[j] = asc[j] + sum_k beta[k] * x[j][k].
std::vector<double> deterministic_utility(const ChoiceModel& model,
                                          std::span<const double> features);

/// Softmax of the utilities, computed max-shifted. Sums to 1 within 1e-12.
std::vector<double> choice_probabilities(const ChoiceModel& model,
                                         std::span<const double> features);

/// Softmax over an already-computed utility vector (in place).
void softmax_inplace(std::vector<double>& v);

/// Inverse-CDF draw over a probability vector, in alternative order.
template <class Urbg>
int sample_from_probabilities(std::span<const double> probs, Urbg& g) {
  const double u = rng::uniform_double(g);
  double acc = 0.0;
  const int n = static_cast<int>(probs.size());
  for (int j = 0; j < n; ++j) {
    acc += probs[j];
    if (u < acc) return j;
  }
  return n - 1;  // guard against accumulated rounding
}

template <class Urbg>
int sample_choice(const ChoiceModel& model, std::span<const double> features,
                  Urbg& g) {
  const std::vector<double> p = choice_probabilities(model, features);
  return sample_from_probabilities(p, g);
}

struct LogLikelihood {
  double value = 0.0;
  bool empty_warning = false;  // set when the observation list was empty
};

/// Sum of log P_i(chosen_i) in log-sum-exp form.
LogLikelihood log_likelihood(const ChoiceModel& model,
                             std::span<const ChoiceObservation> observations);

/// Gradient over the free parameters, ordered as K betas followed by the
/// J-1 constants in alternative order with the reference skipped.
std::vector<double> ll_gradient(const ChoiceModel& model,
                                std::span<const ChoiceObservation> observations);

// Free-parameter packing shared by the gradient, the estimator and tests.
std::vector<double> pack_free(const UtilitySpec& spec,
                              const ParameterVector& params);
ParameterVector unpack_free(const UtilitySpec& spec,
                            std::span<const double> theta);

struct EstimateOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-6;   // infinity norm
  double separation_bound = 50.0;     // |theta| beyond this flags separation
  int threads = 1;                    // 0 = OpenMP default
};

struct EstimateReport {
  double final_ll = 0.0;
  double initial_ll = 0.0;
  int iterations = 0;
  bool converged = false;
  bool separation = false;
  double gradient_inf_norm = 0.0;
  std::vector<double> ll_trace;  // LL after each accepted iteration
  std::string message;
};

struct EstimateResult {
  ParameterVector params;
  EstimateReport report;
};

/// Maximum-likelihood fit from the zero start: Newton steps with a
/// backtracking gradient-ascent fallback when the Hessian is not usable.
EstimateResult estimate(const UtilitySpec& spec,
                        std::span<const ChoiceObservation> observations,
                        const EstimateOptions& opts = {});

/// Fraction of observations whose argmax probability matches the recorded
/// choice. Ties resolve to the lowest alternative index.
double predict_accuracy(const ChoiceModel& model,
                        std::span<const ChoiceObservation> observations);

enum class Grouping { ByIndividual, ByObservation };

struct CvFold {
  ParameterVector params;
  EstimateReport report;
  double accuracy = 0.0;
  int test_size = 0;
};

struct CvResult {
  std::vector<CvFold> folds;
  double mean_accuracy = 0.0;    // mean of per-fold accuracies
  double pooled_accuracy = 0.0;  // total correct over total held-out
};

/// Seeded k-fold cross-validation. With Grouping::ByIndividual every
/// observation of one individual lands in the same fold.
CvResult k_fold_cv(const UtilitySpec& spec,
                   std::span<const ChoiceObservation> observations, int k,
                   Grouping grouping, rng::SplitMix64& g,
                   const EstimateOptions& opts = {});

}  // namespace crowdsim::dcm
