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

// Resolved run parameters: defaults, then a key=value config file, then
// explicit overrides. Every key is flat and unique across sections.

#ifndef CONEX_CONFIG_H_
#define CONEX_CONFIG_H_

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "conex/annotator.h"
#include "conex/model.h"

namespace conex {

struct RunConfig {
  ModelConfig model;
  AnnotatorConfig annotator;
  int beam = 1;
  int max_length = 100;
  int jobs = 1;

  // Sets one key from its textual value. Throws ConfigError on unknown keys
  // and malformed values.
  void Set(std::string_view key, std::string_view value);
  // Lines of `key = value`; `#` starts a comment, `[section]` lines are
  // ignored, string values may be double-quoted.
  void ApplyFile(std::string_view content);
  // Object of key -> string, number or bool.
  void ApplyOverrides(const nlohmann::json &overrides);
  void Validate() const;

  nlohmann::json ToJson() const;
  static RunConfig FromJson(const nlohmann::json &j);

  static std::vector<std::string> Keys();
};

RunConfig ResolveRunConfig(const std::string &config_path, const nlohmann::json &overrides);

}  // namespace conex

#endif  // CONEX_CONFIG_H_
