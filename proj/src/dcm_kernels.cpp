#include "crowdsim/dcm_kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace crowdsim::dcm {

namespace {

// Index of alternative j inside the free-ASC block (j != ref).
inline int free_asc_index(int j, int ref) { return j < ref ? j : j - 1; }

struct Scratch {
  std::vector<double> v;   // utilities
  std::vector<double> p;   // probabilities
  std::vector<double> pz;  // sum_j P_j z_j, length D
};

// Accumulates one observation into (ll, grad, hess). hess may be null.
inline void accumulate_one(const UtilitySpec& spec,
                           std::span<const double> theta,
                           const ChoiceObservation& obs, double& ll,
                           double* grad, double* hess, Scratch& s) {
  const int J = spec.num_alternatives();
  const int K = spec.num_factors();
  const int ref = spec.asc_reference;
  const int D = K + J - 1;
  const double* x = obs.features.data();

  s.v.resize(J);
  for (int j = 0; j < J; ++j) {
    double vj = j == ref ? 0.0 : theta[K + free_asc_index(j, ref)];
    const double* xj = x + static_cast<std::size_t>(j) * K;
    for (int k = 0; k < K; ++k) vj += theta[k] * xj[k];
    s.v[j] = vj;
  }

  const double vmax = *std::max_element(s.v.begin(), s.v.end());
  double denom = 0.0;
  s.p.resize(J);
  for (int j = 0; j < J; ++j) {
    s.p[j] = std::exp(s.v[j] - vmax);
    denom += s.p[j];
  }
  const double lse = vmax + std::log(denom);
  ll += s.v[obs.chosen] - lse;
  for (int j = 0; j < J; ++j) s.p[j] /= denom;

  for (int j = 0; j < J; ++j) {
    const double c = (j == obs.chosen ? 1.0 : 0.0) - s.p[j];
    const double* xj = x + static_cast<std::size_t>(j) * K;
    for (int k = 0; k < K; ++k) grad[k] += c * xj[k];
    if (j != ref) grad[K + free_asc_index(j, ref)] += c;
  }

  if (hess == nullptr) return;

  // d2LL = (sum_j P_j z_j)(.)^T - sum_j P_j z_j z_j^T with z_j = [x_j, e_j].
  s.pz.assign(D, 0.0);
  for (int j = 0; j < J; ++j) {
    const double pj = s.p[j];
    const double* xj = x + static_cast<std::size_t>(j) * K;
    for (int k = 0; k < K; ++k) s.pz[k] += pj * xj[k];
    if (j != ref) s.pz[K + free_asc_index(j, ref)] += pj;

    // subtract P_j z_j z_j^T (z_j is sparse in the ASC block)
    for (int a = 0; a < K; ++a) {
      const double za = xj[a];
      for (int b = 0; b < K; ++b) hess[a * D + b] -= pj * za * xj[b];
      if (j != ref) {
        const int fb = K + free_asc_index(j, ref);
        hess[a * D + fb] -= pj * za;
        hess[fb * D + a] -= pj * za;
      }
    }
    if (j != ref) {
      const int fj = K + free_asc_index(j, ref);
      hess[fj * D + fj] -= pj;
    }
  }
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) hess[a * D + b] += s.pz[a] * s.pz[b];
}

LlTerms accumulate_range(const UtilitySpec& spec, std::span<const double> theta,
                         std::span<const ChoiceObservation> obs,
                         bool with_hessian) {
  const int D = spec.num_free();
  LlTerms out;
  out.grad.assign(D, 0.0);
  if (with_hessian) out.hess.assign(static_cast<std::size_t>(D) * D, 0.0);
  Scratch s;
  for (const ChoiceObservation& o : obs)
    accumulate_one(spec, theta, o, out.ll, out.grad.data(),
                   with_hessian ? out.hess.data() : nullptr, s);
  return out;
}

}  // namespace

LlTerms ll_terms_serial(const UtilitySpec& spec, std::span<const double> theta,
                        std::span<const ChoiceObservation> observations,
                        bool with_hessian) {
  return accumulate_range(spec, theta, observations, with_hessian);
}

LlTerms ll_terms_parallel(const UtilitySpec& spec,
                          std::span<const double> theta,
                          std::span<const ChoiceObservation> observations,
                          bool with_hessian, int threads) {
  if (threads <= 0) threads = omp_get_max_threads();
  const std::size_t n = observations.size();
  const std::size_t nchunks =
      std::min<std::size_t>(static_cast<std::size_t>(threads), std::max<std::size_t>(n, 1));

  std::vector<LlTerms> partials(nchunks);
#pragma omp parallel for schedule(static, 1) num_threads(static_cast<int>(nchunks))
  for (std::size_t c = 0; c < nchunks; ++c) {
    const std::size_t lo = n * c / nchunks;
    const std::size_t hi = n * (c + 1) / nchunks;
    partials[c] =
        accumulate_range(spec, theta, observations.subspan(lo, hi - lo),
                         with_hessian);
  }

  // Merge in chunk order so the result depends only on the chunk count.
  const int D = spec.num_free();
  LlTerms out;
  out.grad.assign(D, 0.0);
  if (with_hessian) out.hess.assign(static_cast<std::size_t>(D) * D, 0.0);
  for (const LlTerms& part : partials) {
    out.ll += part.ll;
    for (int i = 0; i < D; ++i) out.grad[i] += part.grad[i];
    if (with_hessian)
      for (std::size_t i = 0; i < out.hess.size(); ++i)
        out.hess[i] += part.hess[i];
  }
  return out;
}

}  // namespace crowdsim::dcm
