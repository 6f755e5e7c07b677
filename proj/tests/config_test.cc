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
#include "doctest.h"

namespace conex {
namespace {

TEST_CASE("defaults, file, then overrides") {
  RunConfig c;
  c.ApplyFile(R"(# run
[model]
layers = 3
attention = "bilinear_general"   # inline comment
[annotator]
alpha_min1 = 55.5
ner = "file:#spans.jsonl"
)");
  CHECK(c.model.layers == 3);
  CHECK(c.model.attention == AttentionKind::kBilinearGeneral);
  CHECK(c.annotator.alpha_min1 == 55.5);
  CHECK(c.annotator.ner == "file:#spans.jsonl");
  c.ApplyOverrides({{"layers", 1}, {"seed", 9}, {"alpha_min2", 2.5}});
  CHECK(c.model.layers == 1);
  CHECK(c.model.seed == 9);
  CHECK(c.annotator.alpha_min2 == 2.5);
  CHECK(c.model.hidden_size == ModelConfig{}.hidden_size);
}

TEST_CASE("resolved config round-trips through JSON") {
  RunConfig c;
  c.Set("window", "40");
  c.Set("beam", "4");
  c.Set("coverage_loss_weight", "0.25");
  RunConfig back = RunConfig::FromJson(c.ToJson());
  CHECK(back.ToJson() == c.ToJson());
  for (const std::string &key : RunConfig::Keys()) CHECK(c.ToJson().contains(key));
  CHECK(c.ToJson().size() == RunConfig::Keys().size());
}

TEST_CASE("bad configs are rejected") {
  RunConfig c;
  CHECK_THROWS_AS(c.Set("layer", "2"), ConfigError);
  CHECK_THROWS_AS(c.Set("layers", "two"), ConfigError);
  CHECK_THROWS_AS(c.Set("layers", "2x"), ConfigError);
  CHECK_THROWS_AS(c.Set("attention", "dot"), ConfigError);
  CHECK_THROWS_AS(c.ApplyFile("layers 2"), ConfigError);
  CHECK_THROWS_AS(c.ApplyOverrides({{"layers", {1, 2}}}), ConfigError);
  RunConfig wide;
  wide.model.stride = 60;
  CHECK_THROWS_AS(wide.Validate(), ConfigError);
  RunConfig thresholds;
  thresholds.annotator.alpha_min2 = 70;
  CHECK_THROWS_AS(thresholds.Validate(), ConfigError);
  RunConfig beam;
  beam.beam = 0;
  CHECK_THROWS_AS(beam.Validate(), ConfigError);
}

}  // namespace
}  // namespace conex
