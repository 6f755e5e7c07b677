// Copyright 2026 The Conex Authors.
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

#include "conex/config.h"

#include <charconv>
#include <functional>
#include <map>

#include <fmt/format.h>

#include "conex/util.h"

namespace conex {
namespace {

template <typename T>
T ParseNumber(std::string_view key, std::string_view text) {
  T v{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError(fmt::format("{}: bad value \"{}\"", key, text));
  }
  return v;
}

using Setter = std::function<void(RunConfig &, std::string_view, std::string_view)>;

template <typename T>
Setter Field(T RunConfig::*member) {
  return [member](RunConfig &c, std::string_view k, std::string_view v) {
    c.*member = ParseNumber<T>(k, v);
  };
}

template <typename T>
Setter ModelField(T ModelConfig::*member) {
  return [member](RunConfig &c, std::string_view k, std::string_view v) {
    c.model.*member = ParseNumber<T>(k, v);
  };
}

template <typename T>
Setter AnnotatorField(T AnnotatorConfig::*member) {
  return [member](RunConfig &c, std::string_view k, std::string_view v) {
    c.annotator.*member = ParseNumber<T>(k, v);
  };
}

const std::map<std::string, Setter, std::less<>> &Setters() {
  static const auto *setters = new std::map<std::string, Setter, std::less<>>{
      {"layers", ModelField(&ModelConfig::layers)},
      {"hidden_size", ModelField(&ModelConfig::hidden_size)},
      {"embedding_size", ModelField(&ModelConfig::embedding_size)},
      {"vocab_size", ModelField(&ModelConfig::vocab_size)},
      {"attention",
       [](RunConfig &c, std::string_view, std::string_view v) {
         try {
           c.model.attention = ParseAttentionKind(v);
         } catch (const std::exception &e) {
           throw ConfigError(e.what());
         }
       }},
      {"min_count", ModelField(&ModelConfig::min_count)},
      {"coverage_loss_weight", ModelField(&ModelConfig::coverage_loss_weight)},
      {"learning_rate", ModelField(&ModelConfig::learning_rate)},
      {"lr_decay", ModelField(&ModelConfig::lr_decay)},
      {"max_grad_norm", ModelField(&ModelConfig::max_grad_norm)},
      {"init_scale", ModelField(&ModelConfig::init_scale)},
      {"batch_size", ModelField(&ModelConfig::batch_size)},
      {"train_steps", ModelField(&ModelConfig::train_steps)},
      {"seed", ModelField(&ModelConfig::seed)},
      {"window", ModelField(&ModelConfig::window)},
      {"stride", ModelField(&ModelConfig::stride)},
      {"alpha_min1", AnnotatorField(&AnnotatorConfig::alpha_min1)},
      {"alpha_min2", AnnotatorField(&AnnotatorConfig::alpha_min2)},
      {"grid_h", AnnotatorField(&AnnotatorConfig::grid_h)},
      {"ner",
       [](RunConfig &c, std::string_view, std::string_view v) { c.annotator.ner = v; }},
      {"beam", Field(&RunConfig::beam)},
      {"max_length", Field(&RunConfig::max_length)},
      {"jobs", Field(&RunConfig::jobs)},
  };
  return *setters;
}

}  // namespace

void RunConfig::Set(std::string_view key, std::string_view value) {
  auto it = Setters().find(key);
  if (it == Setters().end()) throw ConfigError(fmt::format("unknown config key \"{}\"", key));
  it->second(*this, key, value);
}

void RunConfig::ApplyFile(std::string_view content) {
  size_t line_number = 0;
  for (std::string_view raw : SplitLines(content)) {
    ++line_number;
    std::string_view line = raw;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = Trim(line);
    if (line.empty() || (line.front() == '[' && line.back() == ']')) continue;
    size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("config line {}: expected key = value", line_number));
    }
    std::string_view key = Trim(line.substr(0, eq));
    std::string_view value = Trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    try {
      Set(key, value);
    } catch (const ConfigError &e) {
      throw ConfigError(fmt::format("config line {}: {}", line_number, e.what()));
    }
  }
}

void RunConfig::ApplyOverrides(const nlohmann::json &overrides) {
  if (overrides.is_null()) return;
  if (!overrides.is_object()) throw ConfigError("overrides must be a JSON object");
  for (const auto &[key, value] : overrides.items()) {
    if (value.is_string()) {
      Set(key, value.get<std::string>());
    } else if (value.is_number() || value.is_boolean()) {
      Set(key, value.dump());
    } else {
      throw ConfigError(fmt::format("{}: unsupported value {}", key, value.dump()));
    }
  }
}

void RunConfig::Validate() const {
  model.Validate();
  annotator.Validate();
  if (model.stride > model.window) {
    throw ConfigError(fmt::format("stride ({}) must not exceed window ({})", model.stride,
                                  model.window));
  }
  if (beam < 1) throw ConfigError(fmt::format("beam must be >= 1, got {}", beam));
  if (max_length < 1) throw ConfigError(fmt::format("max_length must be >= 1, got {}", max_length));
  if (jobs < 1) throw ConfigError(fmt::format("jobs must be >= 1, got {}", jobs));
}

nlohmann::json RunConfig::ToJson() const {
  nlohmann::json j = model.ToJson();
  j["alpha_min1"] = annotator.alpha_min1;
  j["alpha_min2"] = annotator.alpha_min2;
  j["grid_h"] = annotator.grid_h;
  j["ner"] = annotator.ner;
  j["beam"] = beam;
  j["max_length"] = max_length;
  j["jobs"] = jobs;
  return j;
}

RunConfig RunConfig::FromJson(const nlohmann::json &j) {
  RunConfig c;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  c.ApplyOverrides(j);
  return c;
}

std::vector<std::string> RunConfig::Keys() {
  std::vector<std::string> keys;
  for (const auto &[k, _] : Setters()) keys.push_back(k);
  return keys;
}

RunConfig ResolveRunConfig(const std::string &config_path, const nlohmann::json &overrides) {
  RunConfig c;
  if (!config_path.empty()) c.ApplyFile(ReadFile(config_path));
  c.ApplyOverrides(overrides);
  c.Validate();
  return c;
}

}  // namespace conex
