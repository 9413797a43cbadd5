// Copyright 2026 The Incremental Representation Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ir/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ir/error.hpp"
#include "ir/metrics.hpp"

namespace ir::harness {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

class Reader {
 public:
  Reader(const KeyValue& kv, const std::string& source) : kv_(kv), source_(source) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_, kv_.line, kv_.key + ": " + what);
  }

  double real() const {
    double v = 0.0;
    const std::string& s = kv_.value;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
      fail("expected a number, got '" + s + "'");
    }
    return v;
  }

  std::uint64_t integer() const { return parse_integer(kv_.value); }

  std::size_t count() const { return static_cast<std::size_t>(integer()); }

  bool boolean() const {
    const std::string v = lower(kv_.value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail("expected true/false, got '" + kv_.value + "'");
  }

  std::vector<std::uint64_t> integer_list() const {
    std::vector<std::uint64_t> out;
    std::istringstream in(kv_.value);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_integer(trim(item)));
    if (out.empty()) fail("expected a non-empty list");
    return out;
  }

  const std::string& text() const { return kv_.value; }

 private:
  std::uint64_t parse_integer(const std::string& s) const {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      fail("expected a non-negative integer, got '" + s + "'");
    }
    return v;
  }

  const KeyValue& kv_;
  const std::string& source_;
};

bool apply_synthetic_key(SyntheticSpec& spec, const std::string& key, const Reader& r,
                         bool seed_key_is_data_seed) {
  if (key == "classes") spec.classes = r.count();
  else if (key == "channels") spec.channels = r.count();
  else if (key == "image_size") spec.image_size = r.count();
  else if (key == "train_per_class") spec.train_per_class = r.count();
  else if (key == "test_per_class") spec.test_per_class = r.count();
  else if (key == "template_noise") spec.template_noise = r.real();
  else if (key == "sample_noise") spec.sample_noise = r.real();
  else if (key == (seed_key_is_data_seed ? "data_seed" : "seed")) spec.seed = r.integer();
  else return false;
  return true;
}

cil::Norm parse_norm(const Reader& r) {
  const std::string v = lower(r.text());
  if (v == "l1") return cil::Norm::kL1;
  if (v == "l2") return cil::Norm::kL2;
  if (v == "nuclear") return cil::Norm::kNuclear;
  r.fail("expected l1, l2 or nuclear");
}

aug::AugKind parse_aug(const Reader& r) {
  const std::string v = lower(r.text());
  if (v == "rotation") return aug::AugKind::kRotation;
  if (v == "mixup") return aug::AugKind::kMixup;
  if (v == "none") return aug::AugKind::kNone;
  r.fail("expected rotation, mixup or none");
}

nn::InitPolicy parse_policy(const Reader& r) {
  const std::string v = lower(r.text());
  if (v == "warm") return nn::InitPolicy::kWarm;
  if (v == "random") return nn::InitPolicy::kRandom;
  r.fail("expected warm or random");
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::string_view text, const std::string& source) {
  std::vector<KeyValue> out;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected 'key = value'");
    KeyValue kv{lower(trim(line.substr(0, eq))), trim(line.substr(eq + 1)), line_no};
    if (kv.key.empty()) throw ParseError(source, line_no, "empty key");
    if (kv.value.empty()) throw ParseError(source, line_no, kv.key + ": empty value");
    if (!seen.insert(kv.key).second) throw ParseError(source, line_no, "duplicate key " + kv.key);
    out.push_back(std::move(kv));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void SyntheticSpec::validate() const {
  if (classes < 1) throw ConfigError("synthetic: classes must be >= 1");
  if (channels < 1) throw ConfigError("synthetic: channels must be >= 1");
  if (image_size < 3) throw ConfigError("synthetic: image_size must be >= 3");
  if (train_per_class < 1) throw ConfigError("synthetic: train_per_class must be >= 1");
  if (!(template_noise >= 0.0)) throw ConfigError("synthetic: template_noise must be >= 0");
  if (!(sample_noise >= 0.0)) throw ConfigError("synthetic: sample_noise must be >= 0");
}

void ExperimentConfig::validate() const {
  phase.validate();
  if (source == DataSource::kSynthetic) synthetic.validate();
  if (source == DataSource::kCsv && (train_csv.empty() || test_csv.empty())) {
    throw ConfigError("csv source needs train_csv and test_csv");
  }
  if (!(initial_fraction > 0.0 && initial_fraction <= 1.0)) {
    throw ConfigError("initial_fraction must lie in (0, 1]");
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (embedding_dim == 0) throw ConfigError("embedding_dim must be >= 1");
}

ExperimentConfig parse_experiment_config(std::string_view text, const std::string& source,
                                         const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  for (const KeyValue& kv : parse_key_values(text, source)) {
    const Reader r(kv, source);
    const std::string& k = kv.key;
    if (apply_synthetic_key(cfg.synthetic, k, r, true)) continue;
    if (k == "source") {
      const std::string v = lower(kv.value);
      if (v == "synthetic") cfg.source = DataSource::kSynthetic;
      else if (v == "csv") cfg.source = DataSource::kCsv;
      else r.fail("expected synthetic or csv");
    } else if (k == "train_csv") {
      cfg.train_csv = base_dir / kv.value;
    } else if (k == "test_csv") {
      cfg.test_csv = base_dir / kv.value;
    } else if (k == "initial_fraction") {
      cfg.initial_fraction = r.real();
    } else if (k == "phases") {
      cfg.incremental_phases = r.count();
    } else if (k == "tau") {
      cfg.phase.tau = r.real();
    } else if (k == "lambda") {
      cfg.phase.lambda = r.real();
    } else if (k == "norm") {
      cfg.phase.norm = parse_norm(r);
    } else if (k == "epochs") {
      cfg.phase.epochs = r.count();
    } else if (k == "batch_size") {
      cfg.phase.batch_size = r.count();
    } else if (k == "base_lr") {
      cfg.phase.base_lr = r.real();
    } else if (k == "aug") {
      cfg.phase.aug = parse_aug(r);
    } else if (k == "theta_init") {
      cfg.phase.theta_init = parse_policy(r);
    } else if (k == "enable_ce") {
      cfg.phase.enable_ce = r.boolean();
    } else if (k == "enable_sm") {
      cfg.phase.enable_sm = r.boolean();
    } else if (k == "seeds") {
      cfg.seeds = r.integer_list();
    } else if (k == "embedding_dim") {
      cfg.embedding_dim = r.count();
    } else {
      throw ParseError(source, kv.line, "unknown key '" + k + "'");
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_text_file(path), path.string(), path.parent_path());
}

SyntheticSpec parse_synthetic_spec(std::string_view text, const std::string& source) {
  SyntheticSpec spec;
  for (const KeyValue& kv : parse_key_values(text, source)) {
    const Reader r(kv, source);
    if (!apply_synthetic_key(spec, kv.key, r, false)) {
      throw ParseError(source, kv.line, "unknown key '" + kv.key + "'");
    }
  }
  spec.validate();
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  return parse_synthetic_spec(read_text_file(path), path.string());
}

std::string to_string(cil::Norm norm) {
  switch (norm) {
    case cil::Norm::kL1:
      return "l1";
    case cil::Norm::kL2:
      return "l2";
    case cil::Norm::kNuclear:
      break;
  }
  return "nuclear";
}

std::string to_string(aug::AugKind kind) {
  switch (kind) {
    case aug::AugKind::kRotation:
      return "rotation";
    case aug::AugKind::kMixup:
      return "mixup";
    case aug::AugKind::kNone:
      break;
  }
  return "none";
}

std::string to_string(nn::InitPolicy policy) {
  return policy == nn::InitPolicy::kWarm ? "warm" : "random";
}

std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& cfg) {
  using eval::format_double;
  std::vector<std::pair<std::string, std::string>> out;
  auto add = [&](std::string k, std::string v) { out.emplace_back(std::move(k), std::move(v)); };
  const bool synthetic = cfg.source == DataSource::kSynthetic;
  add("source", synthetic ? "synthetic" : "csv");
  if (synthetic) {
    add("classes", std::to_string(cfg.synthetic.classes));
    add("channels", std::to_string(cfg.synthetic.channels));
    add("image_size", std::to_string(cfg.synthetic.image_size));
    add("train_per_class", std::to_string(cfg.synthetic.train_per_class));
    add("test_per_class", std::to_string(cfg.synthetic.test_per_class));
    add("template_noise", format_double(cfg.synthetic.template_noise));
    add("sample_noise", format_double(cfg.synthetic.sample_noise));
    add("data_seed", std::to_string(cfg.synthetic.seed));
  } else {
    add("train_csv", cfg.train_csv.string());
    add("test_csv", cfg.test_csv.string());
  }
  add("initial_fraction", format_double(cfg.initial_fraction));
  add("phases", std::to_string(cfg.incremental_phases));
  add("tau", format_double(cfg.phase.tau));
  add("lambda", format_double(cfg.phase.lambda));
  add("norm", to_string(cfg.phase.norm));
  add("epochs", std::to_string(cfg.phase.epochs));
  add("batch_size", std::to_string(cfg.phase.batch_size));
  add("base_lr", format_double(cfg.phase.base_lr));
  add("aug", to_string(cfg.phase.aug));
  add("theta_init", to_string(cfg.phase.theta_init));
  add("enable_ce", cfg.phase.enable_ce ? "true" : "false");
  add("enable_sm", cfg.phase.enable_sm ? "true" : "false");
  std::string seeds;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (i) seeds += ",";
    seeds += std::to_string(cfg.seeds[i]);
  }
  add("seeds", seeds);
  add("embedding_dim", std::to_string(cfg.embedding_dim));
  return out;
}

}  // namespace ir::harness
