#include "menkf/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <set>

#include "menkf/error.hpp"
#include "menkf/io.hpp"

namespace menkf {

using nlohmann::json;

namespace {

json arm_json(const ArmSpec& arm) {
  return {{"hidden", arm.hidden}, {"activation", to_string(arm.activation)}};
}

std::string estimator_name(PointEstimator e) {
  return e == PointEstimator::kMean ? "mean" : "median";
}

std::string variance_init_name(VarianceInit v) {
  return v == VarianceInit::kGaussian ? "gaussian" : "gamma_shape_scale";
}

// Walks one JSON object, rejecting keys the schema does not know.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    for (const auto& [key, _] : obj_.items()) {
      (void)_;
      unknown_.insert(key);
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    unknown_.erase(key);
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(name(key), e.what());
    }
  }

  void read_optional(const char* key, std::optional<double>& out) {
    unknown_.erase(key);
    if (!obj_.contains(key)) return;
    const json& v = obj_.at(key);
    if (v.is_null()) {
      out.reset();
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      fail(name(key), "expected a number or null");
    }
  }

  Section child(const char* key) {
    unknown_.erase(key);
    static const json kEmpty = json::object();
    return Section(obj_.contains(key) ? obj_.at(key) : kEmpty, name(key));
  }

  std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    if (!unknown_.empty()) fail(name(unknown_.begin()->c_str()), "unknown config key");
  }

  [[noreturn]] static void fail(const std::string& key, const std::string& why) {
    throw Error(ErrorCode::kParse, "config key '" + key + "': " + why);
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> unknown_;
};

void read_arm(Section s, ArmSpec& arm) {
  s.read("hidden", arm.hidden);
  std::string act = to_string(arm.activation);
  s.read("activation", act);
  try {
    arm.activation = parse_activation(act);
  } catch (const Error& e) {
    Section::fail(s.name("activation"), e.what());
  }
  s.finish();
}

void collect_keys(const json& j, const std::string& prefix, std::vector<std::string>& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      collect_keys(value, name, out);
    } else {
      out.push_back(name);
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  menkf.validate();
  sim.validate();
  if (!(interval_level > 0.0 && interval_level < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "interval_level must lie in (0, 1)");
  }
}

json to_json(const RunConfig& cfg) {
  const MenkfConfig& m = cfg.menkf;
  const SimConfig& s = cfg.sim;
  json menkf = {
      {"ensemble_size", m.ensemble_size},
      {"init_var", m.init_var},
      {"arm_f", arm_json(m.arm_f)},
      {"arm_g", arm_json(m.arm_g)},
      {"batch_size", m.batch_size},
      {"passes", m.passes},
      {"jitter_var", m.jitter_var},
      {"variance_init", variance_init_name(m.variance_init)},
      {"shuffle", m.shuffle},
      {"inflation", m.inflation},
      {"fixed_logit", m.fixed_logit ? json(*m.fixed_logit) : json(nullptr)},
      {"fixed_noise_var", m.fixed_noise_var ? json(*m.fixed_noise_var) : json(nullptr)},
      {"parallel", m.parallel},
      {"threads", m.threads},
  };
  json sim = {
      {"points", s.points},
      {"replicates", s.replicates},
      {"perturb_sd", s.perturb_sd},
      {"threshold", s.threshold},
      {"dim_f", s.dim_f},
      {"dim_g", s.dim_g},
      {"scenario", to_string(s.scenario)},
      {"surrogate_sd", s.surrogate_sd},
      {"latent_dim", s.latent_dim},
      {"latent_noise_g", s.latent_noise_g},
      {"feature_noise", s.feature_noise},
      {"embedding_scale", s.embedding_scale},
      {"logit_sd", s.logit_sd},
  };
  return {
      {"seed", cfg.seed},
      {"menkf", menkf},
      {"sim", sim},
      {"split", {{"train", cfg.split.train}, {"test", cfg.split.test}}},
      {"study",
       {{"parallel", cfg.study.parallel},
        {"threads", cfg.study.threads},
        {"save_checkpoints", cfg.study.save_checkpoints}}},
      {"evaluation",
       {{"interval_level", cfg.interval_level},
        {"point_estimator", estimator_name(cfg.point_estimator)}}},
      {"output", {{"dir", cfg.output_dir}}},
  };
}

json results_json(const RunConfig& cfg) {
  json doc = to_json(cfg);
  for (const char* section : {"menkf", "study"}) {
    doc.at(section).erase("parallel");
    doc.at(section).erase("threads");
  }
  return doc;
}

RunConfig run_config_from_json(const json& doc) {
  RunConfig cfg;
  Section root(doc, "");
  root.read("seed", cfg.seed);

  {
    Section s = root.child("menkf");
    MenkfConfig& m = cfg.menkf;
    s.read("ensemble_size", m.ensemble_size);
    s.read("init_var", m.init_var);
    read_arm(s.child("arm_f"), m.arm_f);
    read_arm(s.child("arm_g"), m.arm_g);
    s.read("batch_size", m.batch_size);
    s.read("passes", m.passes);
    s.read("jitter_var", m.jitter_var);
    std::string vi = variance_init_name(m.variance_init);
    s.read("variance_init", vi);
    if (vi == "gaussian") {
      m.variance_init = VarianceInit::kGaussian;
    } else if (vi == "gamma_shape_scale") {
      m.variance_init = VarianceInit::kGammaShapeScale;
    } else {
      Section::fail("menkf.variance_init", "expected 'gaussian' or 'gamma_shape_scale'");
    }
    s.read("shuffle", m.shuffle);
    s.read("inflation", m.inflation);
    s.read_optional("fixed_logit", m.fixed_logit);
    s.read_optional("fixed_noise_var", m.fixed_noise_var);
    s.read("parallel", m.parallel);
    s.read("threads", m.threads);
    s.finish();
  }
  {
    Section s = root.child("sim");
    SimConfig& c = cfg.sim;
    s.read("points", c.points);
    s.read("replicates", c.replicates);
    s.read("perturb_sd", c.perturb_sd);
    s.read("threshold", c.threshold);
    s.read("dim_f", c.dim_f);
    s.read("dim_g", c.dim_g);
    std::string scenario = to_string(c.scenario);
    s.read("scenario", scenario);
    try {
      c.scenario = parse_scenario(scenario);
    } catch (const Error& e) {
      Section::fail("sim.scenario", e.what());
    }
    s.read("surrogate_sd", c.surrogate_sd);
    s.read("latent_dim", c.latent_dim);
    s.read("latent_noise_g", c.latent_noise_g);
    s.read("feature_noise", c.feature_noise);
    s.read("embedding_scale", c.embedding_scale);
    s.read("logit_sd", c.logit_sd);
    s.finish();
  }
  {
    Section s = root.child("split");
    s.read("train", cfg.split.train);
    s.read("test", cfg.split.test);
    s.finish();
  }
  {
    Section s = root.child("study");
    s.read("parallel", cfg.study.parallel);
    s.read("threads", cfg.study.threads);
    s.read("save_checkpoints", cfg.study.save_checkpoints);
    s.finish();
  }
  {
    Section s = root.child("evaluation");
    s.read("interval_level", cfg.interval_level);
    std::string est = estimator_name(cfg.point_estimator);
    s.read("point_estimator", est);
    if (est == "mean") {
      cfg.point_estimator = PointEstimator::kMean;
    } else if (est == "median") {
      cfg.point_estimator = PointEstimator::kMedian;
    } else {
      Section::fail("evaluation.point_estimator", "expected 'mean' or 'median'");
    }
    s.finish();
  }
  {
    Section s = root.child("output");
    s.read("dir", cfg.output_dir);
    s.finish();
  }
  root.finish();

  cfg.menkf.seed = cfg.seed;
  cfg.sim.seed = cfg.seed;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, std::string("invalid config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return run_config_from_json(doc);
}

void apply_env_overrides(RunConfig& cfg) {
  const char* env = std::getenv("MENKF_SEED");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || end == env || *end != '\0') {
    throw Error(ErrorCode::kParse, std::string("MENKF_SEED is not an integer: ") + env);
  }
  cfg.seed = v;
  cfg.menkf.seed = v;
  cfg.sim.seed = v;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  collect_keys(to_json(RunConfig{}), "", out);
  return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const json doc = {{"seed", cfg.seed}, {"menkf", results_json(cfg).at("menkf")}};
  return io::fnv1a64(doc.dump());
}

}  // namespace menkf
