#pragma once

#include <span>
#include <vector>

#include "crowdsim/dcm.hpp"

namespace crowdsim::dcm {

// Log-likelihood, score and (optionally) Hessian accumulated over a dataset
// at a free-parameter point theta. D = K + J - 1.
struct LlTerms {
  double ll = 0.0;
  std::vector<double> grad;  // D
  std::vector<double> hess;  // D x D row-major, only if with_hessian
};

// Serial reference kernel. Kept as the ground truth the parallel kernel is
// tested and benchmarked against; also the T=1 path of the estimator.
LlTerms ll_terms_serial(const UtilitySpec& spec, std::span<const double> theta,
                        std::span<const ChoiceObservation> observations,
                        bool with_hessian);

// OpenMP kernel: contiguous chunks, one partial per thread, merged in thread
// order. Bitwise-reproducible for a fixed thread count; agrees with the
// serial kernel within 1e-10 for any thread count, exactly for threads == 1.
LlTerms ll_terms_parallel(const UtilitySpec& spec,
                          std::span<const double> theta,
                          std::span<const ChoiceObservation> observations,
                          bool with_hessian, int threads);

}  // namespace crowdsim::dcm
