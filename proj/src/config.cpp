#include "ctbayes/config.hpp"

#include <fstream>
#include <set>

namespace ctbayes {

using nlohmann::json;

namespace {

// Pulls typed fields out of a JSON object and complains about anything left over.
class StrictObject {
 public:
  StrictObject(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  template <typename T>
  void get_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    T v{};
    get(key, v);
    out = v;
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(mc_samples >= 2, "mc_samples must be >= 2");
  require(val_mc_samples >= 2, "val_mc_samples must be >= 2");
  require(beta1 >= 0.0, "beta1 must be >= 0");
  require(beta2 >= 0.0, "beta2 must be >= 0");
  require(learning_rate > 0.0, "learning_rate must be > 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(moped_delta > 0.0, "moped_delta must be > 0");
  require(epochs >= 0, "epochs must be >= 0");
  require(pretrain_epochs >= 0, "pretrain_epochs must be >= 0");
  require(!kl_scale || *kl_scale >= 0.0, "kl_scale must be >= 0");
  require(patience >= 1, "patience must be >= 1");
  require(patch_size >= 4, "patch_size must be >= 4");
  require(patches_per_slice >= 1, "patches_per_slice must be >= 1");
  require(checkpoint_every >= 1, "checkpoint_every must be >= 1");
  require(perceptual.channels.size() >= 1, "perceptual.channels must be non-empty");
  try {
    model.validate();
    discriminator.validate();
    data.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(patch_size <= data.slice_size, "patch_size exceeds data.slice_size");
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"seed", c.seed},
           {"mc_samples", c.mc_samples},
           {"beta1", c.beta1},
           {"beta2", c.beta2},
           {"learning_rate", c.learning_rate},
           {"batch_size", c.batch_size},
           {"moped_delta", c.moped_delta},
           {"epochs", c.epochs},
           {"pretrain_epochs", c.pretrain_epochs},
           {"kl_scale", c.kl_scale ? json(*c.kl_scale) : json(nullptr)},
           {"freeze_sigma", c.freeze_sigma},
           {"patience", c.patience},
           {"patch_size", c.patch_size},
           {"patches_per_slice", c.patches_per_slice},
           {"val_mc_samples", c.val_mc_samples},
           {"checkpoint_every", c.checkpoint_every},
           {"model", {{"channels", c.model.channels},
                      {"encoder_layers", c.model.encoder_layers},
                      {"leaky_slope", c.model.leaky_slope}}},
           {"discriminator", {{"channels", c.discriminator.channels},
                              {"strides", c.discriminator.strides},
                              {"kernel", c.discriminator.kernel},
                              {"padding", c.discriminator.padding},
                              {"leaky_slope", c.discriminator.leaky_slope}}},
           {"perceptual", {{"channels", c.perceptual.channels}, {"seed", c.perceptual.seed}}},
           {"data", c.data},
           {"paths", {{"data_dir", c.data_dir}, {"run_dir", c.run_dir}}}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  StrictObject root(j, "config");
  root.get("seed", c.seed);
  root.get("mc_samples", c.mc_samples);
  root.get("beta1", c.beta1);
  root.get("beta2", c.beta2);
  root.get("learning_rate", c.learning_rate);
  root.get("batch_size", c.batch_size);
  root.get("moped_delta", c.moped_delta);
  root.get("epochs", c.epochs);
  root.get("pretrain_epochs", c.pretrain_epochs);
  root.get_optional("kl_scale", c.kl_scale);
  root.get("freeze_sigma", c.freeze_sigma);
  root.get("patience", c.patience);
  root.get("patch_size", c.patch_size);
  root.get("patches_per_slice", c.patches_per_slice);
  root.get("val_mc_samples", c.val_mc_samples);
  root.get("checkpoint_every", c.checkpoint_every);

  if (const json* m = root.child("model")) {
    StrictObject o(*m, "config.model");
    o.get("channels", c.model.channels);
    o.get("encoder_layers", c.model.encoder_layers);
    o.get("leaky_slope", c.model.leaky_slope);
    o.finish();
  }
  if (const json* d = root.child("discriminator")) {
    StrictObject o(*d, "config.discriminator");
    o.get("channels", c.discriminator.channels);
    o.get("strides", c.discriminator.strides);
    o.get("kernel", c.discriminator.kernel);
    o.get("padding", c.discriminator.padding);
    o.get("leaky_slope", c.discriminator.leaky_slope);
    o.finish();
  }
  if (const json* p = root.child("perceptual")) {
    StrictObject o(*p, "config.perceptual");
    o.get("channels", c.perceptual.channels);
    o.get("seed", c.perceptual.seed);
    o.finish();
  }
  if (const json* d = root.child("data")) {
    try {
      c.data = d->get<DatasetConfig>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config.data: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config.data: ") + e.what());
    }
  }
  if (const json* p = root.child("paths")) {
    StrictObject o(*p, "config.paths");
    o.get("data_dir", c.data_dir);
    o.get("run_dir", c.run_dir);
    o.finish();
  }
  root.finish();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write config snapshot '" + path + "'");
  os << json(cfg).dump(2) << "\n";
}

void apply_profile(ExperimentConfig& cfg, const std::string& profile) {
  if (profile == "paper") return;
  if (profile == "smoke") {
    cfg.data.slice_size = 128;
    for (auto& d : cfg.data.domains) d.counts = {64, 8, 16};
    cfg.epochs = 3;
    return;
  }
  throw ConfigError("unknown profile '" + profile + "' (expected paper or smoke)");
}

}  // namespace ctbayes
