#include "bayescal/inference.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bayescal/errors.hpp"
#include "bayescal/rng.hpp"

namespace bayescal {

namespace {

// Minimizing Adam step; callers negate gradients to ascend.
struct Adam {
  std::vector<double> m, v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int t = 0;

  explicit Adam(std::size_t dim) : m(dim, 0.0), v(dim, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
  }
};

void check_labels(const std::vector<int>& labels, const char* where) {
  const bool any_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool any_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!any_pos || !any_neg) {
    throw data_error(std::string(where) +
                     ": degenerate labels (need at least one matched and one unmatched sample)");
  }
}

WeightVector unpack(const std::vector<double>& params) {
  WeightVector theta;
  theta.weights.assign(params.begin(), params.end() - 1);
  theta.bias = params.back();
  return theta;
}

}  // namespace

WeightVector VariationalPosterior::mean_weights() const {
  WeightVector theta;
  theta.weights.assign(mu.begin(), mu.end() - 1);
  theta.bias = mu.back();
  return theta;
}

WeightVector fit_ml(const std::vector<FeatureVector>& features,
                    const std::vector<int>& labels, const MlConfig& cfg) {
  if (features.empty()) throw data_error("fit_ml: empty training set");
  check_labels(labels, "fit_ml");
  if (cfg.max_steps <= 0 || !(cfg.learning_rate > 0.0) || !(cfg.convergence_tol > 0.0)) {
    throw config_error("fit_ml: max_steps, learning_rate and convergence_tol must be positive");
  }

  const std::size_t dim = features.front().values.size() + 1;
  const double n = static_cast<double>(features.size());
  std::vector<double> params(dim, 0.0);
  if (cfg.init) {
    if (cfg.init->weights.size() + 1 != dim) {
      throw config_error("fit_ml: init length does not match the feature dimension");
    }
    std::copy(cfg.init->weights.begin(), cfg.init->weights.end(), params.begin());
    params[dim - 1] = cfg.init->bias;
  }
  Adam adam(dim);
  std::vector<double> grad(dim);
  NllGradient g;

  // Track the best iterate; Adam's final step is not guaranteed to be it.
  std::vector<double> best_params = params;
  double best_nll = std::numeric_limits<double>::infinity();

  for (int step = 0; step < cfg.max_steps; ++step) {
    const WeightVector theta = unpack(params);
    const double current = nll_with_gradient(features, labels, theta, g);
    if (!std::isfinite(current)) {
      throw numeric_error("fit_ml: non-finite NLL at step " + std::to_string(step));
    }
    if (current < best_nll) {
      best_nll = current;
      best_params = params;
    }
    double norm2 = 0.0;
    for (std::size_t d = 0; d + 1 < dim; ++d) {
      grad[d] = g.weights[d] / n;
      norm2 += grad[d] * grad[d];
    }
    grad[dim - 1] = g.bias / n;
    norm2 += grad[dim - 1] * grad[dim - 1];
    if (std::sqrt(norm2) <= cfg.convergence_tol) break;

    adam.step(params, grad, cfg.learning_rate);
  }
  {
    const double final_nll = nll(features, labels, unpack(params));
    if (std::isfinite(final_nll) && final_nll < best_nll) best_params = params;
  }
  return unpack(best_params);
}

WeightVector fit_ml(const SampleSet& train, const CalibratorSpec& spec,
                    const MlConfig& cfg) {
  if (train.empty()) throw data_error("fit_ml: empty training set");
  return fit_ml(build_feature_matrix(train, spec), labels_of(train), cfg);
}

double kl_gaussians(const VariationalPosterior& q, const PriorSpec& p) {
  if (!(p.std > 0.0)) throw config_error("kl_gaussians: prior std must be positive");
  if (q.mu.size() != q.log_sigma.size()) {
    throw std::invalid_argument("kl_gaussians: mu/log_sigma length mismatch");
  }
  const double var_p = p.std * p.std;
  double kl = 0.0;
  for (std::size_t d = 0; d < q.mu.size(); ++d) {
    const double sigma = std::exp(q.log_sigma[d]);
    const double dm = q.mu[d] - p.mean;
    kl += std::log(p.std) - q.log_sigma[d] + (sigma * sigma + dm * dm) / (2.0 * var_p) - 0.5;
  }
  return kl;
}

namespace {

double elbo_from_draws(const std::vector<FeatureVector>& features,
                       const std::vector<int>& labels, const VariationalPosterior& q,
                       const PriorSpec& prior, int n_mc, Rng& rng) {
  const std::size_t dim = q.size();
  double lik = 0.0;
  std::vector<double> params(dim);
  for (int s = 0; s < n_mc; ++s) {
    for (std::size_t d = 0; d < dim; ++d) {
      params[d] = q.mu[d] + std::exp(q.log_sigma[d]) * rng.normal();
    }
    lik += -nll(features, labels, unpack(params));
  }
  return lik / n_mc - kl_gaussians(q, prior);
}

}  // namespace

double elbo_estimate(const SampleSet& train, const CalibratorSpec& spec,
                     const VariationalPosterior& q, const PriorSpec& prior, int n_mc,
                     std::uint64_t seed) {
  if (n_mc < 1) throw config_error("elbo_estimate: n_mc must be >= 1");
  if (train.empty()) throw data_error("elbo_estimate: empty sample set");
  const auto features = build_feature_matrix(train, spec);
  const auto labels = labels_of(train);
  if (q.size() != features.front().values.size() + 1) {
    throw std::invalid_argument("elbo_estimate: posterior dimension mismatch");
  }
  Rng rng(seed);
  return elbo_from_draws(features, labels, q, prior, n_mc, rng);
}

VariationalPosterior fit_svi(const SampleSet& train, const CalibratorSpec& spec,
                             const SviConfig& cfg) {
  if (train.empty()) throw data_error("fit_svi: empty training set");
  if (cfg.max_steps <= 0 || cfg.mc_samples_per_step <= 0 || !(cfg.learning_rate > 0.0)) {
    throw config_error("fit_svi: max_steps, learning_rate and mc_samples_per_step must be positive");
  }
  if (!(cfg.prior.std > 0.0)) throw config_error("fit_svi: prior std must be positive");

  const auto features = build_feature_matrix(train, spec);
  const auto labels = labels_of(train);
  check_labels(labels, "fit_svi");

  const std::size_t dim = features.front().values.size() + 1;
  const double var_p = cfg.prior.std * cfg.prior.std;

  VariationalPosterior q;
  q.mu.assign(dim, 0.0);
  q.log_sigma.assign(dim, -2.0);
  if (cfg.init_from_ml) {
    MlConfig ml = cfg.ml;
    ml.seed = cfg.seed;
    const WeightVector theta = fit_ml(features, labels, ml);
    std::copy(theta.weights.begin(), theta.weights.end(), q.mu.begin());
    q.mu[dim - 1] = theta.bias;

    // Seed the scales with the diagonal Laplace estimate at the ML point,
    // 1/sqrt(sum_i q_i(1-q_i) phi_id^2 + 1/var_p); the optimizer then only
    // fine-tunes instead of walking log_sigma across several units.
    std::vector<double> curvature(dim, 1.0 / var_p);
    for (std::size_t i = 0; i < features.size(); ++i) {
      const double qi = forward(features[i], theta);
      const double w = qi * (1.0 - qi);
      const std::vector<double>& phi = features[i].values;
      for (std::size_t d = 0; d + 1 < dim; ++d) curvature[d] += w * phi[d] * phi[d];
      curvature[dim - 1] += w;
    }
    for (std::size_t d = 0; d < dim; ++d) {
      q.log_sigma[d] = std::clamp(-0.5 * std::log(curvature[d]), -12.0, 0.5);
    }
  }

  // Optimize [mu, log_sigma] jointly; ascend by feeding Adam the negated
  // ELBO gradient.
  std::vector<double> params(2 * dim);
  std::copy(q.mu.begin(), q.mu.end(), params.begin());
  std::copy(q.log_sigma.begin(), q.log_sigma.end(), params.begin() + dim);

  Adam adam(2 * dim);
  Rng rng(cfg.seed);
  std::vector<double> grad(2 * dim);
  std::vector<double> eps(dim);
  std::vector<double> theta_s(dim);

  // Convergence monitor: relative improvement of the 200-step ELBO moving
  // average, checked once per window.
  constexpr int kWindow = 200;
  constexpr double kRelTol = 1e-5;
  std::deque<double> history;
  double prev_window_mean = 0.0;
  bool have_prev_window = false;

  const double inv_mc = 1.0 / cfg.mc_samples_per_step;
  NllGradient g;
  for (int step = 0; step < cfg.max_steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double elbo_lik = 0.0;

    for (int s = 0; s < cfg.mc_samples_per_step; ++s) {
      for (std::size_t d = 0; d < dim; ++d) {
        eps[d] = rng.normal();
        theta_s[d] = params[d] + std::exp(params[dim + d]) * eps[d];
      }
      const WeightVector theta = unpack(theta_s);
      elbo_lik += -nll_with_gradient(features, labels, theta, g);
      for (std::size_t d = 0; d < dim; ++d) {
        const double gd = (d + 1 < dim) ? g.weights[d] : g.bias;
        const double sigma = std::exp(params[dim + d]);
        // d(-ELBO)/dmu and d(-ELBO)/dlog_sigma, likelihood part.
        grad[d] += gd * inv_mc;
        grad[dim + d] += gd * sigma * eps[d] * inv_mc;
      }
    }
    elbo_lik *= inv_mc;

    // KL gradients in closed form.
    double kl = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double sigma = std::exp(params[dim + d]);
      const double dm = params[d] - cfg.prior.mean;
      kl += std::log(cfg.prior.std) - params[dim + d] +
            (sigma * sigma + dm * dm) / (2.0 * var_p) - 0.5;
      grad[d] += dm / var_p;
      grad[dim + d] += sigma * sigma / var_p - 1.0;
    }

    const double elbo = elbo_lik - kl;
    if (!std::isfinite(elbo)) {
      throw numeric_error("fit_svi: non-finite ELBO at step " + std::to_string(step));
    }

    history.push_back(elbo);
    if (history.size() > kWindow) history.pop_front();
    if (static_cast<int>(history.size()) == kWindow && (step + 1) % kWindow == 0) {
      const double window_mean =
          std::accumulate(history.begin(), history.end(), 0.0) / kWindow;
      if (have_prev_window) {
        const double rel = (window_mean - prev_window_mean) /
                           std::max(1.0, std::abs(prev_window_mean));
        if (rel < kRelTol) break;
      }
      prev_window_mean = window_mean;
      have_prev_window = true;
    }

    adam.step(params, grad, cfg.learning_rate);
  }

  std::copy(params.begin(), params.begin() + dim, q.mu.begin());
  std::copy(params.begin() + dim, params.end(), q.log_sigma.begin());
  return q;
}

std::vector<WeightVector> sample_weights(const VariationalPosterior& q, int t,
                                         std::uint64_t seed) {
  if (t < 1) throw config_error("sample_weights: t must be >= 1");
  if (q.mu.size() != q.log_sigma.size() || q.mu.empty()) {
    throw std::invalid_argument("sample_weights: invalid posterior");
  }
  const std::size_t dim = q.size();
  std::vector<double> sigma(dim);
  for (std::size_t d = 0; d < dim; ++d) sigma[d] = std::exp(q.log_sigma[d]);

  Rng rng(seed);
  std::vector<WeightVector> draws;
  draws.reserve(t);
  std::vector<double> theta(dim);
  for (int k = 0; k < t; ++k) {
    for (std::size_t d = 0; d < dim; ++d) theta[d] = q.mu[d] + sigma[d] * rng.normal();
    draws.push_back(unpack(theta));
  }
  return draws;
}

}  // namespace bayescal
