#include "bayescal/model_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bayescal/errors.hpp"

namespace bayescal {

namespace {
using nlohmann::ordered_json;
}

std::string to_string(Estimator e) {
  return e == Estimator::kMl ? "ml" : "svi";
}

Estimator estimator_from_string(const std::string& name) {
  if (name == "ml") return Estimator::kMl;
  if (name == "svi") return Estimator::kSvi;
  throw config_error("unknown estimator \"" + name + "\" (expected ml or svi)");
}

std::string model_to_json(const FittedModel& model) {
  ordered_json j;
  j["method"] = to_string(model.spec.method);
  j["subset"] = to_string(model.spec.subset);
  j["epsilon"] = model.spec.epsilon;
  if (model.estimator) j["estimator"] = to_string(*model.estimator);
  if (model.weights) {
    j["weights"] = model.weights->weights;
    j["bias"] = model.weights->bias;
  }
  if (model.posterior) {
    ordered_json p;
    p["mu"] = model.posterior->mu;
    p["log_sigma"] = model.posterior->log_sigma;
    if (model.prior) p["prior"] = {{"mean", model.prior->mean}, {"std", model.prior->std}};
    p["seed"] = model.seed;
    j["posterior"] = std::move(p);
  }
  if (model.histogram) {
    j["bins"] = model.histogram->values;
    j["counts"] = model.histogram->counts;
    j["fallback"] = model.histogram->fallback;
    j["scheme"] = {{"dims", model.histogram->scheme.dims},
                   {"bins_per_dim", model.histogram->scheme.bins_per_dim},
                   {"min_samples_per_bin", model.histogram->scheme.min_samples_per_bin}};
  }
  return j.dump(2);
}

FittedModel model_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw data_error(std::string("model JSON malformed: ") + e.what());
  }
  FittedModel model;
  try {
    model.spec.method = method_from_string(j.at("method").get<std::string>());
    model.spec.subset = subset_from_string(j.at("subset").get<std::string>());
    model.spec.epsilon = j.at("epsilon").get<double>();
    if (j.contains("estimator")) {
      model.estimator = estimator_from_string(j["estimator"].get<std::string>());
    }
    if (j.contains("weights")) {
      WeightVector w;
      w.weights = j["weights"].get<std::vector<double>>();
      w.bias = j.at("bias").get<double>();
      model.weights = std::move(w);
    }
    if (j.contains("posterior")) {
      const auto& p = j["posterior"];
      VariationalPosterior q;
      q.mu = p.at("mu").get<std::vector<double>>();
      q.log_sigma = p.at("log_sigma").get<std::vector<double>>();
      if (q.mu.size() != q.log_sigma.size()) {
        throw data_error("model posterior: mu/log_sigma length mismatch");
      }
      model.posterior = std::move(q);
      if (p.contains("prior")) {
        PriorSpec prior;
        prior.mean = p["prior"].at("mean").get<double>();
        prior.std = p["prior"].at("std").get<double>();
        model.prior = prior;
      }
      if (p.contains("seed")) model.seed = p["seed"].get<std::uint64_t>();
    }
    if (j.contains("bins")) {
      HistogramBinningModel hb;
      hb.values = j["bins"].get<std::vector<double>>();
      hb.counts = j.at("counts").get<std::vector<int>>();
      hb.fallback = j.at("fallback").get<double>();
      const auto& s = j.at("scheme");
      hb.scheme.dims = s.at("dims").get<std::vector<std::string>>();
      hb.scheme.bins_per_dim = s.at("bins_per_dim").get<std::vector<int>>();
      hb.scheme.min_samples_per_bin = s.at("min_samples_per_bin").get<int>();
      hb.scheme.validate();
      if (hb.values.size() != hb.scheme.total_bins()) {
        throw data_error("model bins: value count does not match the scheme");
      }
      model.histogram = std::move(hb);
    }
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("model JSON missing or mistyped field: ") + e.what());
  }
  if (!model.weights && !model.histogram) {
    throw data_error("model JSON carries neither weights nor bins");
  }
  return model;
}

void save_model(const FittedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write \"" + path + "\"");
  out << model_to_json(model) << '\n';
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open \"" + path + "\"");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

double calibrate_score(const FittedModel& model, const MatchedSample& sample) {
  if (model.histogram) return predict_histogram_binning(*model.histogram, sample);
  if (!model.weights) throw data_error("calibrate_score: model has no point weights");
  return forward(build_features(sample, model.spec), *model.weights);
}

}  // namespace bayescal
