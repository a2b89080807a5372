#include "bayescal/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "bayescal/errors.hpp"
#include "bayescal/split.hpp"

namespace bayescal {

namespace {

using nlohmann::ordered_json;

std::string key_of(CalibrationMethod m, FeatureSubset s) {
  return to_string(m) + "/" + to_string(s);
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

struct RepeatOutput {
  std::vector<BaselineResult> baseline;
  std::vector<RepeatResult> rows;
};

RepeatOutput run_one_repeat(const SampleSet& samples, const ExperimentConfig& cfg,
                            int repeat) {
  const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(repeat);
  const auto [train, test] = split_train_test(samples, cfg.train_fraction, seed);

  RepeatOutput out;
  for (FeatureSubset subset : cfg.subsets) {
    const BinningScheme scheme = cfg.scheme_for(subset);
    out.baseline.push_back({repeat, subset, baseline_report(test, scheme).d_ece});

    for (CalibrationMethod method : cfg.methods) {
      CalibratorSpec spec{method, subset, cfg.epsilon};
      EvalOptions opts;
      opts.tau = cfg.tau;
      opts.t = cfg.samples_t;
      opts.seed = seed;
      opts.scheme = scheme;

      if (method == CalibrationMethod::kHistogram) {
        FittedModel model;
        model.spec = spec;
        model.histogram = fit_histogram_binning(train, spec, scheme);
        const auto eval = evaluate_model(test, model, opts);
        out.rows.push_back(
            {repeat, method, subset, std::nullopt, eval.report.d_ece, std::nullopt,
             std::nullopt});
        continue;
      }

      std::optional<WeightVector> ml_point;
      if (cfg.run_ml) {
        MlConfig ml = cfg.ml;
        ml.seed = seed;
        ml_point = fit_ml(train, spec, ml);
        FittedModel model;
        model.spec = spec;
        model.estimator = Estimator::kMl;
        model.weights = ml_point;
        const auto eval = evaluate_model(test, model, opts);
        out.rows.push_back({repeat, method, subset, Estimator::kMl, eval.report.d_ece,
                            std::nullopt, std::nullopt});
      }
      if (cfg.run_svi) {
        SviConfig svi = cfg.svi;
        svi.seed = seed;
        svi.ml = cfg.ml;
        // Reuse the ML solution for the warm start instead of refitting.
        if (ml_point) svi.ml.init = ml_point;
        const VariationalPosterior q = fit_svi(train, spec, svi);
        FittedModel model;
        model.spec = spec;
        model.estimator = Estimator::kSvi;
        model.weights = q.mean_weights();
        model.posterior = q;
        model.prior = svi.prior;
        model.seed = seed;
        const auto eval = evaluate_model(test, model, opts);
        out.rows.push_back({repeat, method, subset, Estimator::kSvi, eval.report.d_ece,
                            eval.report.picp, eval.report.mpiw});
      }
    }
  }
  return out;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw data_error("cannot write \"" + tmp + "\"");
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (repeats < 1) throw config_error("experiment: repeats must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw config_error("experiment: train_fraction must be in (0, 1)");
  }
  if (!(tau > 0.0 && tau < 1.0)) throw config_error("experiment: tau must be in (0, 1)");
  if (samples_t < 2) throw config_error("experiment: samples_t must be >= 2");
  if (methods.empty() || subsets.empty()) {
    throw config_error("experiment: need at least one method and one subset");
  }
  if (!run_ml && !run_svi) throw config_error("experiment: estimator selects neither ml nor svi");
  if (min_samples_per_bin < 0) throw config_error("experiment: min_samples_per_bin must be >= 0");
}

BinningScheme ExperimentConfig::scheme_for(FeatureSubset subset) const {
  BinningScheme scheme = default_scheme(subset);
  const auto it = bins_per_dim_override.find(to_string(subset));
  if (it != bins_per_dim_override.end()) {
    std::fill(scheme.bins_per_dim.begin(), scheme.bins_per_dim.end(), it->second);
  }
  scheme.min_samples_per_bin = min_samples_per_bin;
  scheme.validate();
  return scheme;
}

ExperimentResult run_experiment(const SampleSet& samples, const ExperimentConfig& config) {
  config.validate();
  if (samples.empty()) throw data_error("run_experiment: empty sample set");

  ExperimentResult result;
  result.config = config;

  // Repeats are independent; run them on a small pool and splice the outputs
  // back in repeat order so results stay deterministic.
  const int n_threads = config.threads > 0
                            ? config.threads
                            : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<RepeatOutput> outputs(config.repeats);
  std::vector<std::future<void>> futures;
  std::atomic<int> next{0};
  const int workers = std::min(n_threads, config.repeats);
  for (int w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&]() {
      for (int r = next.fetch_add(1); r < config.repeats; r = next.fetch_add(1)) {
        outputs[r] = run_one_repeat(samples, config, r);
      }
    }));
  }
  for (auto& f : futures) f.get();

  for (int r = 0; r < config.repeats; ++r) {
    result.baseline_rows.insert(result.baseline_rows.end(), outputs[r].baseline.begin(),
                                outputs[r].baseline.end());
    result.repeat_rows.insert(result.repeat_rows.end(), outputs[r].rows.begin(),
                              outputs[r].rows.end());
  }

  // Aggregate in (method, subset, estimator) declaration order.
  for (CalibrationMethod method : config.methods) {
    for (FeatureSubset subset : config.subsets) {
      std::vector<std::optional<Estimator>> estimators;
      if (method == CalibrationMethod::kHistogram) {
        estimators.push_back(std::nullopt);
      } else {
        if (config.run_ml) estimators.push_back(Estimator::kMl);
        if (config.run_svi) estimators.push_back(Estimator::kSvi);
      }
      for (const auto& est : estimators) {
        std::vector<double> d, p, m;
        for (const RepeatResult& row : result.repeat_rows) {
          if (row.method != method || row.subset != subset || row.estimator != est) continue;
          d.push_back(row.d_ece);
          if (row.picp) p.push_back(*row.picp);
          if (row.mpiw) m.push_back(*row.mpiw);
        }
        if (d.empty()) continue;
        AggregateRow agg;
        agg.method = method;
        agg.subset = subset;
        agg.estimator = est;
        agg.n_repeats = static_cast<int>(d.size());
        const MeanStd ds = mean_std(d);
        agg.d_ece_mean = ds.mean;
        agg.d_ece_std = ds.std;
        if (!p.empty()) {
          const MeanStd ps = mean_std(p);
          agg.picp_mean = ps.mean;
          agg.picp_std = ps.std;
        }
        if (!m.empty()) {
          const MeanStd ms = mean_std(m);
          agg.mpiw_mean = ms.mean;
          agg.mpiw_std = ms.std;
        }
        result.aggregate.push_back(agg);
      }
    }
  }

  for (CalibrationMethod method : config.methods) {
    if (method == CalibrationMethod::kHistogram) continue;
    for (FeatureSubset subset : config.subsets) {
      std::optional<double> ml_mean, svi_mean;
      for (const AggregateRow& agg : result.aggregate) {
        if (agg.method != method || agg.subset != subset) continue;
        if (agg.estimator == Estimator::kMl) ml_mean = agg.d_ece_mean;
        if (agg.estimator == Estimator::kSvi) svi_mean = agg.d_ece_mean;
      }
      if (ml_mean && svi_mean) {
        result.svi_minus_ml[key_of(method, subset)] = *svi_mean - *ml_mean;
      }
    }
  }
  return result;
}

std::string resolved_config_toml(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "[experiment]\n";
  out << "samples = \"" << config.samples_path << "\"\n";
  out << "methods = [";
  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    out << (i ? ", " : "") << '"' << to_string(config.methods[i]) << '"';
  }
  out << "]\n";
  out << "subsets = [";
  for (std::size_t i = 0; i < config.subsets.size(); ++i) {
    out << (i ? ", " : "") << '"' << to_string(config.subsets[i]) << '"';
  }
  out << "]\n";
  out << "estimator = \""
      << (config.run_ml && config.run_svi ? "both" : (config.run_ml ? "ml" : "svi"))
      << "\"\n";
  out << "repeats = " << config.repeats << "\n";
  out << "train_fraction = " << format_fixed(config.train_fraction, 6) << "\n";
  out << "seed = " << config.base_seed << "\n";
  out << "tau = " << format_fixed(config.tau, 6) << "\n";
  out << "samples_t = " << config.samples_t << "\n";
  out << "epsilon = " << config.epsilon << "\n";
  out << "min_samples_per_bin = " << config.min_samples_per_bin << "\n";
  for (const auto& [subset, bins] : config.bins_per_dim_override) {
    out << "bins." << subset << " = " << bins << "\n";
  }
  out << "\n[ml]\n";
  out << "max_steps = " << config.ml.max_steps << "\n";
  out << "learning_rate = " << config.ml.learning_rate << "\n";
  out << "convergence_tol = " << config.ml.convergence_tol << "\n";
  out << "\n[svi]\n";
  out << "max_steps = " << config.svi.max_steps << "\n";
  out << "learning_rate = " << config.svi.learning_rate << "\n";
  out << "mc_samples_per_step = " << config.svi.mc_samples_per_step << "\n";
  out << "prior_mean = " << config.svi.prior.mean << "\n";
  out << "prior_std = " << config.svi.prior.std << "\n";
  out << "init_from_ml = " << (config.svi.init_from_ml ? "true" : "false") << "\n";
  return out.str();
}

std::string aggregate_to_json(const ExperimentResult& result) {
  ordered_json j;
  j["protocol"] = {{"repeats", result.config.repeats},
                   {"train_fraction", result.config.train_fraction},
                   {"base_seed", result.config.base_seed},
                   {"tau", result.config.tau},
                   {"samples_t", result.config.samples_t}};

  ordered_json baseline = ordered_json::array();
  for (FeatureSubset subset : result.config.subsets) {
    std::vector<double> d;
    for (const BaselineResult& row : result.baseline_rows) {
      if (row.subset == subset) d.push_back(row.d_ece);
    }
    const MeanStd ms = mean_std(d);
    baseline.push_back({{"subset", to_string(subset)},
                        {"d_ece_mean", ms.mean},
                        {"d_ece_std", ms.std}});
  }
  j["baseline"] = std::move(baseline);

  ordered_json rows = ordered_json::array();
  for (const AggregateRow& agg : result.aggregate) {
    ordered_json row;
    row["method"] = to_string(agg.method);
    row["subset"] = to_string(agg.subset);
    row["estimator"] = agg.estimator ? ordered_json(to_string(*agg.estimator))
                                     : ordered_json(nullptr);
    row["n_repeats"] = agg.n_repeats;
    row["d_ece_mean"] = agg.d_ece_mean;
    row["d_ece_std"] = agg.d_ece_std;
    row["picp_mean"] = agg.picp_mean ? ordered_json(*agg.picp_mean) : ordered_json(nullptr);
    row["picp_std"] = agg.picp_std ? ordered_json(*agg.picp_std) : ordered_json(nullptr);
    row["mpiw_mean"] = agg.mpiw_mean ? ordered_json(*agg.mpiw_mean) : ordered_json(nullptr);
    row["mpiw_std"] = agg.mpiw_std ? ordered_json(*agg.mpiw_std) : ordered_json(nullptr);
    rows.push_back(std::move(row));
  }
  j["results"] = std::move(rows);

  ordered_json deltas = ordered_json::array();
  for (const auto& [key, delta] : result.svi_minus_ml) {
    deltas.push_back({{"pair", key}, {"d_ece_svi_minus_ml", delta}});
  }
  j["svi_minus_ml"] = std::move(deltas);

  ordered_json per_repeat = ordered_json::array();
  for (const RepeatResult& row : result.repeat_rows) {
    per_repeat.push_back(
        {{"repeat", row.repeat},
         {"method", to_string(row.method)},
         {"subset", to_string(row.subset)},
         {"estimator",
          row.estimator ? ordered_json(to_string(*row.estimator)) : ordered_json(nullptr)},
         {"d_ece", row.d_ece},
         {"picp", row.picp ? ordered_json(*row.picp) : ordered_json(nullptr)},
         {"mpiw", row.mpiw ? ordered_json(*row.mpiw) : ordered_json(nullptr)}});
  }
  j["per_repeat"] = std::move(per_repeat);
  return j.dump(2);
}

namespace {

// Table-I-shaped CSV: one row per method, D-ECE as percent with 3 decimals,
// ML cell annotated with the signed SVI delta when both estimators ran.
std::string dece_table_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "method";
  for (FeatureSubset subset : result.config.subsets) out << "," << to_string(subset);
  out << "\n";

  auto agg_of = [&](CalibrationMethod m, FeatureSubset s,
                    std::optional<Estimator> e) -> const AggregateRow* {
    for (const AggregateRow& agg : result.aggregate) {
      if (agg.method == m && agg.subset == s && agg.estimator == e) return &agg;
    }
    return nullptr;
  };

  out << "baseline";
  for (FeatureSubset subset : result.config.subsets) {
    std::vector<double> d;
    for (const BaselineResult& row : result.baseline_rows) {
      if (row.subset == subset) d.push_back(row.d_ece);
    }
    out << "," << format_fixed(mean_std(d).mean * 100.0, 3);
  }
  out << "\n";

  for (CalibrationMethod method : result.config.methods) {
    out << to_string(method);
    for (FeatureSubset subset : result.config.subsets) {
      if (method == CalibrationMethod::kHistogram) {
        const AggregateRow* agg = agg_of(method, subset, std::nullopt);
        out << "," << (agg ? format_fixed(agg->d_ece_mean * 100.0, 3) : "");
        continue;
      }
      const AggregateRow* ml = agg_of(method, subset, Estimator::kMl);
      const AggregateRow* svi = agg_of(method, subset, Estimator::kSvi);
      out << ",";
      if (ml && svi) {
        const double delta = (svi->d_ece_mean - ml->d_ece_mean) * 100.0;
        out << format_fixed(ml->d_ece_mean * 100.0, 3) << (delta >= 0 ? " +" : " -")
            << format_fixed(std::abs(delta), 3);
      } else if (ml) {
        out << format_fixed(ml->d_ece_mean * 100.0, 3);
      } else if (svi) {
        out << format_fixed(svi->d_ece_mean * 100.0, 3);
      }
    }
    out << "\n";
  }
  return out.str();
}

// Table-II-shaped CSV: PICP and MPIW percentages for the SVI estimates.
std::string picp_mpiw_table_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "metric,method";
  for (FeatureSubset subset : result.config.subsets) out << "," << to_string(subset);
  out << "\n";
  for (const char* metric : {"picp", "mpiw"}) {
    for (CalibrationMethod method : result.config.methods) {
      if (method == CalibrationMethod::kHistogram) continue;
      out << metric << "," << to_string(method);
      for (FeatureSubset subset : result.config.subsets) {
        out << ",";
        for (const AggregateRow& agg : result.aggregate) {
          if (agg.method != method || agg.subset != subset ||
              agg.estimator != Estimator::kSvi) {
            continue;
          }
          const auto& value = std::string(metric) == "picp" ? agg.picp_mean : agg.mpiw_mean;
          if (value) out << format_fixed(*value * 100.0, 3);
        }
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string per_repeat_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "repeat,method,subset,estimator,d_ece,picp,mpiw\n";
  for (const RepeatResult& row : result.repeat_rows) {
    out << row.repeat << "," << to_string(row.method) << "," << to_string(row.subset) << ","
        << (row.estimator ? to_string(*row.estimator) : "") << ","
        << format_fixed(row.d_ece, 6) << ","
        << (row.picp ? format_fixed(*row.picp, 6) : "") << ","
        << (row.mpiw ? format_fixed(*row.mpiw, 6) : "") << "\n";
  }
  return out.str();
}

}  // namespace

void write_experiment_outputs(const ExperimentResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  atomic_write((dir / "resolved_config.toml").string(), resolved_config_toml(result.config));
  atomic_write((dir / "aggregate.json").string(), aggregate_to_json(result));
  atomic_write((dir / "dece_table.csv").string(), dece_table_csv(result));
  atomic_write((dir / "picp_mpiw_table.csv").string(), picp_mpiw_table_csv(result));
  atomic_write((dir / "per_repeat.csv").string(), per_repeat_csv(result));
}

}  // namespace bayescal
