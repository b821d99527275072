// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/train/config.hpp"

#include <fmt/format.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace s2f::train {
namespace {

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size() || v[0] == '-')
    throw std::invalid_argument("config " + key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

double to_f64(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size())
    throw std::invalid_argument("config " + key + ": expected a number, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw std::invalid_argument("config " + key + ": expected a boolean, got '" + v + "'");
}

std::string b2s(bool b) { return b ? "true" : "false"; }

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string& full, const std::string&)> set;
};

#define S2F_U64(sec, name, expr)                                               \
  Field {                                                                      \
    sec, name, [](const RunConfig& c) { return std::to_string(c.expr); },      \
        [](RunConfig& c, const std::string& k, const std::string& v) {         \
          c.expr = static_cast<decltype(c.expr)>(to_u64(k, v));                \
        }                                                                      \
  }
#define S2F_F64(sec, name, expr)                                               \
  Field {                                                                      \
    sec, name, [](const RunConfig& c) { return fmt::format("{}", c.expr); },   \
        [](RunConfig& c, const std::string& k, const std::string& v) {         \
          c.expr = static_cast<decltype(c.expr)>(to_f64(k, v));                \
        }                                                                      \
  }
#define S2F_BOOL(sec, name, expr)                                              \
  Field {                                                                      \
    sec, name, [](const RunConfig& c) { return b2s(c.expr); },                 \
        [](RunConfig& c, const std::string& k, const std::string& v) {         \
          c.expr = to_bool(k, v);                                              \
        }                                                                      \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      S2F_U64("smash", "patch_size", smash.patch_size),
      S2F_U64("smash", "patch_count", smash.patch_count),
      S2F_U64("smash", "view_size", smash.view_size),
      S2F_U64("smash", "input_size", input_size),
      S2F_U64("lfa", "groups", model.groups),
      S2F_F64("lfa", "alpha", model.alpha),
      S2F_BOOL("lfa", "energy_norm", model.energy_norm),
      Field{"lfa", "mask_mode",
            [](const RunConfig& c) { return std::string(lfa::mask_mode_name(c.model.mask_mode)); },
            [](RunConfig& c, const std::string&, const std::string& v) {
              c.model.mask_mode = lfa::parse_mask_mode(v);
            }},
      S2F_F64("optim", "lr", optim.lr),
      S2F_F64("optim", "beta1", optim.beta1),
      S2F_F64("optim", "beta2", optim.beta2),
      S2F_F64("optim", "eps", optim.eps),
      S2F_U64("optim", "batch_size", batch_size),
      S2F_F64("augment", "trigger_prob", augment.trigger_prob),
      S2F_U64("augment", "jpeg_q_min", augment.jpeg_q_min),
      S2F_U64("augment", "jpeg_q_max", augment.jpeg_q_max),
      S2F_F64("augment", "blur_sigma_min", augment.blur_sigma_min),
      S2F_F64("augment", "blur_sigma_max", augment.blur_sigma_max),
      S2F_U64("train", "epochs", epochs),
      S2F_U64("train", "seed", seed),
      Field{"train", "ablation",
            [](const RunConfig& c) { return std::string(model::ablation_name(c.ablation)); },
            [](RunConfig& c, const std::string&, const std::string& v) {
              c.ablation = model::parse_ablation(v);
            }},
      S2F_F64("train", "val_fraction", val_fraction),
      S2F_BOOL("train", "balanced", balanced),
      S2F_U64("train", "workers", workers),
      S2F_BOOL("train", "cache_images", cache_images),
      S2F_BOOL("train", "restore_best", restore_best),
      S2F_U64("eval", "smash_seed", eval_smash_seed),
  };
  return f;
}

#undef S2F_U64
#undef S2F_F64
#undef S2F_BOOL

void set_field(RunConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
  for (const Field& f : fields())
    if (section == f.section && key == f.key) {
      f.set(cfg, section + "." + key, value);
      if (section == "smash" && key == "view_size") cfg.model.view_size = cfg.smash.view_size;
      return;
    }
  throw std::invalid_argument("unknown config key '" + section + "." + key + "'");
}

}  // namespace

void RunConfig::validate() const {
  smash.validate();
  if (model.view_size != smash.view_size)
    throw std::invalid_argument("config: model view size differs from smash view size");
  if (smash.view_size < 8)
    throw std::invalid_argument("config: view_size must be at least 8 for the three pooling stages");
  model.lfa_config().validate();
  augment.validate();
  if (batch_size == 0) throw std::invalid_argument("config: batch_size must be > 0");
  if (!(optim.lr >= 0)) throw std::invalid_argument("config: lr must be >= 0");
  if (!(val_fraction >= 0 && val_fraction < 1))
    throw std::invalid_argument("config: val_fraction must be in [0,1)");
  if (input_size != 0 && input_size < smash.patch_size)
    throw std::invalid_argument("config: input_size smaller than patch_size");
}

std::string RunConfig::to_ini() const {
  std::string out, section;
  for (const Field& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(*this) + "\n";
  }
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a(to_ini()); }

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw std::invalid_argument("override must look like section.key=value, got '" +
                                assignment + "'");
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  set_field(cfg, trim(assignment.substr(0, dot)),
            trim(assignment.substr(dot + 1, eq - dot - 1)),
            trim(assignment.substr(eq + 1)));
}

RunConfig parse_config(const std::string& ini_text) {
  boost::property_tree::ptree tree;
  std::istringstream in(ini_text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw std::invalid_argument("config: key '" + section + "' outside any section");
    for (const auto& [key, value] : body)
      set_field(cfg, section, key, value.get_value<std::string>());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

}  // namespace s2f::train
