/*
 * Copyright 2026 The ulsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ulsim/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ulsim/errors.hpp"

namespace ulsim {

using nlohmann::json;

namespace {

// Reads object members, rejecting unknown keys and naming the offending path.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + "wrong type");
    }
  }

  template <typename T, typename Parse>
  void get_enum(const char* key, T& out, Parse parse) {
    std::string name;
    get(key, name);
    if (!j_.contains(key)) return;
    try {
      out = parse(name);
    } catch (const ConfigError& e) {
      throw ConfigError(where(key) + e.what());
    }
  }

  template <typename T, typename Parse>
  void get_enum_list(const char* key, std::vector<T>& out, Parse parse) {
    std::vector<std::string> names;
    get(key, names);
    if (!j_.contains(key)) return;
    out.clear();
    for (const auto& n : names) {
      try {
        out.push_back(parse(n));
      } catch (const ConfigError& e) {
        throw ConfigError(where(key) + e.what());
      }
    }
  }

  Section child(const char* key) {
    seen_.insert(key);
    static const json kEmpty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : kEmpty, join(key));
  }

  bool has(const char* key) const { return j_.contains(key); }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.contains(item.key())) throw ConfigError(where(item.key()) + "unknown key");
  }

  std::string join(const std::string& key) const {
    return path_.empty() ? key : (key.empty() ? path_ : path_ + "." + key);
  }

  std::string where(const std::string& key) const {
    const std::string p = join(key);
    return p.empty() ? "" : p + ": ";
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename T>
std::vector<std::string> names_of(const std::vector<T>& xs) {
  std::vector<std::string> out;
  for (const auto& x : xs) out.push_back(to_string(x));
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (dataset_source != "synthetic" && dataset_source != "idx")
    throw ConfigError("dataset.source: must be 'synthetic' or 'idx'");
  if (dataset_source == "idx" && (idx_images.empty() || idx_labels.empty()))
    throw ConfigError("dataset.idx_images/idx_labels: required for idx source");
  const std::size_t num_classes = dataset_source == "idx" ? 10 : synthetic.num_classes;
  if (dataset_source == "synthetic") {
    if (synthetic.num_classes < 2) throw ConfigError("dataset.num_classes: must be >= 2");
    if (synthetic.samples_per_class < 1)
      throw ConfigError("dataset.samples_per_class: must be >= 1");
    if (synthetic.feature_dim < 1) throw ConfigError("dataset.feature_dim: must be >= 1");
    if (!(synthetic.spread >= 0.0)) throw ConfigError("dataset.spread: must be >= 0");
  }
  for (std::size_t h : hidden)
    if (h == 0) throw ConfigError("model.hidden: layer widths must be positive");
  if (fl.num_clients == 0) throw ConfigError("federation.num_clients: must be positive");
  if (fl.local_epochs == 0) throw ConfigError("federation.local_epochs: must be positive");
  if (fl.batch_size == 0) throw ConfigError("federation.batch_size: must be positive");
  if (!(fl.learning_rate > 0.0) || !std::isfinite(fl.learning_rate))
    throw ConfigError("federation.learning_rate: must be positive");
  if (!(dirichlet_alpha > 0.0) || !std::isfinite(dirichlet_alpha))
    throw ConfigError("federation.dirichlet_alpha: must be positive");
  if (unlearn.calib_epochs == 0 || unlearn.calib_epochs > fl.local_epochs)
    throw ConfigError("unlearning.calib_epochs: must be in 1..federation.local_epochs");
  if (!(unlearn.lambda_ewc >= 0.0) || !std::isfinite(unlearn.lambda_ewc))
    throw ConfigError("unlearning.lambda_ewc: must be >= 0");
  if (unlearn.fisher_samples == 0) throw ConfigError("unlearning.fisher_samples: must be positive");
  if (num_labels == 0 || num_labels >= num_classes)
    throw ConfigError("unlearning.num_label_categories: must be in 1.." +
                      std::to_string(num_classes - 1));
  if (!(forgotten_fraction > 0.0 && forgotten_fraction < 1.0))
    throw ConfigError("unlearning.forgotten_fraction: must be in (0, 1)");
  if (!std::isfinite(tau)) throw ConfigError("attack.tau: must be finite");
  if (window > fl.rounds) throw ConfigError("attack.window: exceeds federation.rounds");
  if (trials == 0) throw ConfigError("experiment.trials: must be positive");
  if (has_axes) {
    try {
      axes.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("experiment.axes: ") + e.what());
    }
    for (std::size_t l : axes.num_labels)
      if (l >= num_classes)
        throw ConfigError("experiment.axes.num_label_categories: known_count k = " +
                          std::to_string(l) + " must be below num_classes");
  }
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section top(root, "");
  top.get("seed", c.seed);
  top.get("output_dir", c.output_dir);
  top.get("workers", c.workers);

  Section ds = top.child("dataset");
  ds.get("source", c.dataset_source);
  ds.get("num_classes", c.synthetic.num_classes);
  ds.get("samples_per_class", c.synthetic.samples_per_class);
  ds.get("feature_dim", c.synthetic.feature_dim);
  ds.get("spread", c.synthetic.spread);
  ds.get("idx_images", c.idx_images);
  ds.get("idx_labels", c.idx_labels);
  ds.get("max_samples", c.idx_max_samples);
  ds.finish();

  Section model = top.child("model");
  model.get("hidden", c.hidden);
  model.finish();

  Section fed = top.child("federation");
  fed.get("num_clients", c.fl.num_clients);
  fed.get("rounds", c.fl.rounds);
  fed.get("local_epochs", c.fl.local_epochs);
  fed.get("batch_size", c.fl.batch_size);
  fed.get("learning_rate", c.fl.learning_rate);
  fed.get_enum("distribution", c.distribution, parse_distribution);
  fed.get("dirichlet_alpha", c.dirichlet_alpha);
  fed.finish();

  Section ul = top.child("unlearning");
  ul.get_enum("method", c.method, parse_method);
  ul.get_enum("level", c.level, parse_level);
  ul.get("num_label_categories", c.num_labels);
  ul.get("forgotten_fraction", c.forgotten_fraction);
  ul.get("calib_epochs", c.unlearn.calib_epochs);
  ul.get("ascent_steps", c.unlearn.ascent_steps);
  ul.get("lambda_ewc", c.unlearn.lambda_ewc);
  ul.get("fine_tune_rounds", c.unlearn.fine_tune_rounds);
  ul.get("fisher_samples", c.unlearn.fisher_samples);
  ul.finish();

  Section at = top.child("attack");
  at.get_enum("mode", c.mode, parse_mode_kind);
  at.get("tau", c.tau);
  at.get("window", c.window);
  at.finish();

  Section ex = top.child("experiment");
  ex.get("trials", c.trials);
  if (ex.has("axes")) {
    c.axes = effective_axes(c);  // defaults for any axis not listed
    c.has_axes = true;
    Section ax = ex.child("axes");
    ax.get_enum_list("method", c.axes.methods, parse_method);
    ax.get_enum_list("level", c.axes.levels, parse_level);
    ax.get("num_label_categories", c.axes.num_labels);
    ax.get("forgotten_fraction", c.axes.fractions);
    ax.get_enum_list("distribution", c.axes.distributions, parse_distribution);
    ax.get_enum_list("mode", c.axes.modes, parse_mode_kind);
    ax.get("tau", c.axes.taus);
    ax.finish();
  } else {
    ex.child("axes");
  }
  ex.finish();
  top.finish();

  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  j["dataset"] = {{"source", c.dataset_source},
                  {"num_classes", c.synthetic.num_classes},
                  {"samples_per_class", c.synthetic.samples_per_class},
                  {"feature_dim", c.synthetic.feature_dim},
                  {"spread", c.synthetic.spread},
                  {"idx_images", c.idx_images},
                  {"idx_labels", c.idx_labels},
                  {"max_samples", c.idx_max_samples}};
  j["model"] = {{"hidden", c.hidden}};
  j["federation"] = {{"num_clients", c.fl.num_clients},
                     {"rounds", c.fl.rounds},
                     {"local_epochs", c.fl.local_epochs},
                     {"batch_size", c.fl.batch_size},
                     {"learning_rate", c.fl.learning_rate},
                     {"distribution", to_string(c.distribution)},
                     {"dirichlet_alpha", c.dirichlet_alpha}};
  j["unlearning"] = {{"method", to_string(c.method)},
                     {"level", to_string(c.level)},
                     {"num_label_categories", c.num_labels},
                     {"forgotten_fraction", c.forgotten_fraction},
                     {"calib_epochs", c.unlearn.calib_epochs},
                     {"ascent_steps", c.unlearn.ascent_steps},
                     {"lambda_ewc", c.unlearn.lambda_ewc},
                     {"fine_tune_rounds", c.unlearn.fine_tune_rounds},
                     {"fisher_samples", c.unlearn.fisher_samples}};
  j["attack"] = {{"mode", to_string(c.mode)}, {"tau", c.tau}, {"window", c.window}};
  json ex = {{"trials", c.trials}};
  if (c.has_axes) {
    ex["axes"] = {{"method", names_of(c.axes.methods)},
                  {"level", names_of(c.axes.levels)},
                  {"num_label_categories", c.axes.num_labels},
                  {"forgotten_fraction", c.axes.fractions},
                  {"distribution", names_of(c.axes.distributions)},
                  {"mode", names_of(c.axes.modes)},
                  {"tau", c.axes.taus}};
  }
  j["experiment"] = ex;
  return j.dump(2) + "\n";
}

std::vector<std::string> preset_names() { return {"table1", "table2", "table3", "fig2"}; }

RunConfig load_preset(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  if (fs::exists(name_or_path) && fs::is_regular_file(name_or_path))
    return load_config(name_or_path);
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name_or_path) == names.end())
    throw ConfigError("unknown preset '" + name_or_path + "'");
  const char* dir = std::getenv("ULSIM_PRESET_DIR");
  const fs::path base =
      dir != nullptr && *dir != '\0' ? fs::path(dir) : fs::path(ULSIM_PRESET_DIR);
  return load_config((base / (name_or_path + ".json")).string());
}

GridPoint single_point(const RunConfig& c) {
  return {c.method, c.level, c.num_labels, c.forgotten_fraction, c.distribution, c.mode, c.tau};
}

SweepAxes effective_axes(const RunConfig& c) {
  if (c.has_axes) return c.axes;
  const GridPoint p = single_point(c);
  return {{p.method}, {p.level}, {p.num_labels}, {p.forgotten_fraction},
          {p.distribution}, {p.mode}, {p.tau}};
}

ExperimentSetup make_setup(const RunConfig& c) {
  ExperimentSetup s;
  s.synthetic = c.synthetic;
  s.hidden = c.hidden;
  s.fl = c.fl;
  s.unlearn = c.unlearn;
  s.window = c.window;
  s.dirichlet_alpha = c.dirichlet_alpha;
  if (c.dataset_source == "idx") {
    Dataset d = load_idx(c.idx_images, c.idx_labels);
    if (c.idx_max_samples > 0 && c.idx_max_samples < d.size()) {
      std::vector<std::size_t> head(c.idx_max_samples);
      for (std::size_t i = 0; i < head.size(); ++i) head[i] = i;
      Batch b = gather(d, head);
      d.features = std::move(b.inputs);
      d.labels = std::move(b.labels);
    }
    s.fixed_dataset = std::make_shared<const Dataset>(std::move(d));
  }
  return s;
}

}  // namespace ulsim
