#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bayescal/calibrator.hpp"
#include "bayescal/types.hpp"

namespace bayescal {

// Zero-mean-by-default Gaussian prior shared across all weights and the bias.
// std defaults high so the prior stays uninformative.
struct PriorSpec {
  double mean = 0.0;
  double std = 10.0;
};

// Factorized Gaussian over the calibration parameters. Entries are ordered
// like the weight vector with the bias last, so size() == feature_dim + 1.
struct VariationalPosterior {
  std::vector<double> mu;
  std::vector<double> log_sigma;

  std::size_t size() const { return mu.size(); }
  WeightVector mean_weights() const;
};

struct MlConfig {
  int max_steps = 20000;
  double learning_rate = 1e-2;
  double convergence_tol = 1e-6;  // on the per-sample mean gradient norm
  std::uint64_t seed = 0;
  std::optional<WeightVector> init;  // start point; zeros when absent
};

struct SviConfig {
  int max_steps = 20000;
  double learning_rate = 1e-2;
  int mc_samples_per_step = 8;
  std::uint64_t seed = 0;
  PriorSpec prior;
  bool init_from_ml = true;
  MlConfig ml;  // used for the warm start
};

// Maximum-likelihood point estimate by full-batch adaptive-moment descent on
// the NLL. Requires both label values to be present; an all-matched or
// all-unmatched set has no finite minimizer.
WeightVector fit_ml(const SampleSet& train, const CalibratorSpec& spec,
                    const MlConfig& cfg);

// Same, starting from precomputed features (shared by fit_svi's warm start).
WeightVector fit_ml(const std::vector<FeatureVector>& features,
                    const std::vector<int>& labels, const MlConfig& cfg);

// Closed-form KL(q || p) between the factorized Gaussian posterior and the
// shared Gaussian prior. Non-negative, zero iff q equals the prior.
double kl_gaussians(const VariationalPosterior& q, const PriorSpec& p);

// Reparameterized Monte-Carlo ELBO estimate:
//   mean_s[-nll(theta_s)] - KL(q || prior),  theta_s = mu + sigma * eps_s.
double elbo_estimate(const SampleSet& train, const CalibratorSpec& spec,
                     const VariationalPosterior& q, const PriorSpec& prior, int n_mc,
                     std::uint64_t seed);

// Stochastic variational inference: gradient ascent on the reparameterized
// ELBO with a factorized Gaussian posterior. Deterministic under cfg.seed.
VariationalPosterior fit_svi(const SampleSet& train, const CalibratorSpec& spec,
                             const SviConfig& cfg);

// t independent draws theta = mu + sigma * eps from the posterior.
std::vector<WeightVector> sample_weights(const VariationalPosterior& q, int t,
                                         std::uint64_t seed);

}  // namespace bayescal
