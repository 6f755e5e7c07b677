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

#include "conex/conex.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "conex/annotator.h"
#include "conex/config.h"
#include "conex/corpus.h"
#include "conex/evaluation.h"
#include "conex/model.h"
#include "conex/ngram.h"
#include "conex/pipeline.h"
#include "conex/trainer.h"
#include "conex/util.h"

struct conex_freq_table {
  conex::FrequencyTable table;
  std::string hash;
};

struct conex_model {
  conex::PointerGenerator model;
  uint64_t step = 0;
  std::string hash;
};

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char *kDocsFormat = "conex-docs/1";
constexpr const char *kRunFormat = "conex-run/1";

thread_local std::string last_error;

conex_status Fail(conex_status status, const std::string &message) {
  last_error = message;
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
conex_status Guard(Fn &&fn) {
  try {
    fn();
    last_error.clear();
    return CONEX_OK;
  } catch (const conex::IoError &e) {
    return Fail(CONEX_E_IO, e.what());
  } catch (const conex::ParseError &e) {
    return Fail(CONEX_E_PARSE, e.what());
  } catch (const json::parse_error &e) {
    return Fail(CONEX_E_PARSE, e.what());
  } catch (const conex::ValidationError &e) {
    return Fail(CONEX_E_VALIDATION, e.what());
  } catch (const conex::ConfigError &e) {
    return Fail(CONEX_E_CONFIG, e.what());
  } catch (const conex::NumericError &e) {
    return Fail(CONEX_E_NUMERIC, e.what());
  } catch (const conex::DistinctivenessUnavailable &e) {
    return Fail(CONEX_E_UNAVAILABLE, e.what());
  } catch (const std::exception &e) {
    return Fail(CONEX_E_INTERNAL, e.what());
  } catch (...) {
    return Fail(CONEX_E_INTERNAL, "unknown error");
  }
}

void Require(const void *p, const char *what) {
  if (p == nullptr) throw conex::ConfigError(fmt::format("{} must not be null", what));
}

char *Dup(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void Put(char **out, const std::string &s) {
  if (out != nullptr) *out = Dup(s);
}

conex::RunConfig ParseConfig(const char *config_json) {
  if (config_json == nullptr) return conex::RunConfig{};
  conex::RunConfig c = conex::RunConfig::FromJson(json::parse(config_json));
  c.Validate();
  return c;
}

std::string FileHash(const std::string &path) {
  return conex::HashHex(conex::Fnv1a64(conex::ReadFile(path)));
}

conex::DocumentFormat FormatFor(const std::string &path) {
  std::string ext = std::filesystem::path(path).extension().string();
  return ext == ".conll" || ext == ".tsv" ? conex::DocumentFormat::kConllTsv
                                          : conex::DocumentFormat::kJsonl;
}

std::vector<conex::Document> Load(const std::string &path) {
  return conex::LoadDocuments(path, FormatFor(path));
}

std::string Header(const json &config, const ordered_json &inputs) {
  ordered_json h;
  h["format"] = kDocsFormat;
  h["config"] = config;
  h["inputs"] = inputs;
  return h.dump();
}

ordered_json Curve(const conex::FrequencyTable &table, const conex::NgramKey &key,
                   conex::VaryingSlot slot, std::optional<double> angle) {
  if (!angle) return nullptr;
  conex::NeighborCurve curve = conex::BuildNeighborCurve(table, key, slot);
  ordered_json points = ordered_json::array();
  for (const conex::CurvePoint &p : curve.points) {
    points.push_back({{"key", p.key.ToString()}, {"count", p.count}, {"frequency", p.frequency}});
  }
  return {{"angle", *angle}, {"focus_index", curve.focus_index}, {"points", points}};
}

}  // namespace

extern "C" {

const char *conex_version(void) { return "1.0.0"; }

const char *conex_last_error(void) { return last_error.c_str(); }

const char *conex_status_name(conex_status status) {
  switch (status) {
    case CONEX_OK: return "ok";
    case CONEX_E_IO: return "io error";
    case CONEX_E_PARSE: return "parse error";
    case CONEX_E_VALIDATION: return "validation error";
    case CONEX_E_CONFIG: return "configuration error";
    case CONEX_E_NUMERIC: return "numeric error";
    case CONEX_E_UNAVAILABLE: return "distinctiveness unavailable";
    case CONEX_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void conex_string_free(char *s) { std::free(s); }

conex_status conex_config_resolve(const char *config_path, const char *overrides_json,
                                  char **out_json) {
  return Guard([&] {
    Require(out_json, "out_json");
    json overrides = overrides_json != nullptr ? json::parse(overrides_json) : json(nullptr);
    conex::RunConfig c =
        conex::ResolveRunConfig(config_path != nullptr ? config_path : "", overrides);
    Put(out_json, c.ToJson().dump());
  });
}

conex_status conex_freq_table_load(const char *path, conex_freq_table **out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    std::string content = conex::ReadFile(path);
    auto t = std::make_unique<conex_freq_table>();
    t->table = conex::ParseFrequencyTable(content);
    t->hash = conex::HashHex(conex::Fnv1a64(content));
    *out = t.release();
  });
}

void conex_freq_table_free(conex_freq_table *table) { delete table; }

size_t conex_freq_table_size(const conex_freq_table *table) {
  return table == nullptr ? 0 : table->table.size();
}

conex_status conex_angles_json(const conex_freq_table *table, const char *ngram, int grid_h,
                               char **out_json) {
  return Guard([&] {
    Require(table, "table");
    Require(ngram, "ngram");
    Require(out_json, "out_json");
    conex::NgramKey key = conex::NgramKey::Parse(ngram);
    conex::MatchAngles a = conex::ComputeAngles(table->table, key, grid_h);
    if (!a.head && !a.tail) {
      throw conex::DistinctivenessUnavailable(
          fmt::format("\"{}\" is not in the frequency table", key.ToString()));
    }
    ordered_json j;
    j["key"] = key.ToString();
    j["grid_h"] = grid_h;
    j["head"] = Curve(table->table, key, conex::VaryingSlot::kHead, a.head);
    j["tail"] = Curve(table->table, key, conex::VaryingSlot::kTail, a.tail);
    Put(out_json, j.dump());
  });
}

conex_status conex_annotate_file(const conex_freq_table *table, const char *config_json,
                                 const char *input_path, const char *output_path,
                                 char **out_stats_json) {
  return Guard([&] {
    Require(table, "table");
    Require(input_path, "input_path");
    Require(output_path, "output_path");
    conex::RunConfig config = ParseConfig(config_json);
    std::vector<conex::Document> docs = Load(input_path);
    conex::WeakAnnotator annotator(table->table, config.annotator);
    std::vector<conex::Document> out(docs.size());
    std::vector<conex::AnnotationStats> stats(docs.size());
    conex::ParallelFor(docs.size(), config.jobs,
                       [&](size_t i) { out[i] = annotator.Annotate(docs[i], &stats[i]); });
    conex::AnnotationStats total;
    for (const auto &s : stats) {
      total.named_entities += s.named_entities;
      total.multi_token += s.multi_token;
      total.single_token += s.single_token;
    }
    ordered_json inputs = {{"documents", FileHash(input_path)}, {"freq_table", table->hash}};
    conex::WriteDocuments(output_path, out, Header(config.ToJson(), inputs));
    ordered_json s = {{"documents", out.size()},
                      {"named_entities", total.named_entities},
                      {"multi_token", total.multi_token},
                      {"single_token", total.single_token}};
    Put(out_stats_json, s.dump());
  });
}

conex_status conex_train(const char *config_json, const char *input_path,
                         const char *validation_path, const char *init_path,
                         const char *output_dir, char **out_summary_json) {
  return Guard([&] {
    Require(input_path, "input_path");
    Require(output_dir, "output_dir");
    conex::RunConfig config = ParseConfig(config_json);
    const auto window = static_cast<size_t>(config.model.window);
    const auto stride = static_cast<size_t>(config.model.stride);
    std::vector<conex::TrainingPair> train =
        conex::MakeTrainingPairs(Load(input_path), window, stride);
    std::vector<conex::TrainingPair> validation;
    ordered_json inputs = {{"train", FileHash(input_path)}};
    if (validation_path != nullptr) {
      validation = conex::MakeTrainingPairs(Load(validation_path), window, stride);
      inputs["validation"] = FileHash(validation_path);
    }
    std::optional<conex::ModelCheckpoint> init;
    if (init_path != nullptr) {
      init = conex::LoadCheckpoint(init_path);
      inputs["init"] = FileHash(init_path);
    }

    namespace fs = std::filesystem;
    const fs::path dir(output_dir);
    fs::create_directories(dir);
    conex::TrainOptions options;
    options.sink = [&](const conex::ModelCheckpoint &ckpt, const conex::CheckpointRecord &) {
      conex::SaveCheckpoint((dir / fmt::format("step-{}.ckpt", ckpt.step)).string(), ckpt);
    };
    conex::TrainResult r = conex::Train(config.model, train, validation,
                                        init ? &init->model : nullptr, options);
    conex::SaveCheckpoint((dir / "best.ckpt").string(), r.best);
    conex::SaveCheckpoint((dir / "last.ckpt").string(), r.last);

    std::string loss = "step,loss\n";
    for (size_t i = 0; i < r.loss_curve.size(); ++i) {
      loss += fmt::format("{},{:.17g}\n", i + 1, r.loss_curve[i]);
    }
    conex::WriteFile((dir / "loss.csv").string(), loss);
    std::string table = "step,train_loss,validation_loss,learning_rate\n";
    for (const conex::CheckpointRecord &c : r.checkpoints) {
      table += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", c.step, c.train_loss,
                           c.validation_loss, c.learning_rate);
    }
    conex::WriteFile((dir / "checkpoints.csv").string(), table);

    ordered_json summary;
    summary["format"] = kRunFormat;
    summary["config"] = config.ToJson();
    summary["inputs"] = inputs;
    summary["training_pairs"] = train.size();
    summary["validation_pairs"] = validation.size();
    summary["vocabulary"] = r.best.model.vocab().size();
    summary["unk_targets"] = r.unk_targets;
    summary["best_step"] = r.best.step;
    summary["last_step"] = r.last.step;
    conex::WriteFile((dir / "run.json").string(), summary.dump(2) + "\n");
    Put(out_summary_json, summary.dump());
  });
}

conex_status conex_model_load(const char *path, conex_model **out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    std::string bytes = conex::ReadFile(path);
    conex::ModelCheckpoint ckpt = conex::ParseCheckpoint(bytes);
    auto m = std::make_unique<conex_model>();
    m->model = std::move(ckpt.model);
    m->step = ckpt.step;
    m->hash = conex::HashHex(conex::Fnv1a64(bytes));
    *out = m.release();
  });
}

void conex_model_free(conex_model *model) { delete model; }

conex_status conex_model_config_json(const conex_model *model, char **out_json) {
  return Guard([&] {
    Require(model, "model");
    Require(out_json, "out_json");
    ordered_json j;
    j["step"] = model->step;
    j["vocabulary"] = model->model.vocab().size();
    j["config"] = model->model.config().ToJson();
    Put(out_json, j.dump());
  });
}

conex_status conex_extract_file(const conex_model *const *models, size_t num_models,
                                const char *config_json, const char *input_path,
                                const char *output_path, char **out_stats_json) {
  return Guard([&] {
    Require(models, "models");
    Require(input_path, "input_path");
    Require(output_path, "output_path");
    if (num_models == 0) throw conex::ConfigError("at least one model is required");
    conex::RunConfig config = ParseConfig(config_json);
    conex::ExtractOptions options;
    options.window = static_cast<size_t>(config.model.window);
    options.stride = static_cast<size_t>(config.model.stride);
    options.decode.beam_width = config.beam;
    options.decode.max_length = config.max_length;

    std::vector<conex::Document> docs = Load(input_path);
    ordered_json inputs = {{"documents", FileHash(input_path)}};
    ordered_json model_hashes = ordered_json::array();
    std::vector<std::vector<conex::Document>> per_model;
    conex::ExtractStats total;
    for (size_t m = 0; m < num_models; ++m) {
      Require(models[m], "model");
      model_hashes.push_back(models[m]->hash);
      std::vector<conex::Document> out(docs.size());
      std::vector<conex::ExtractStats> stats(docs.size());
      conex::ParallelFor(docs.size(), config.jobs, [&](size_t i) {
        out[i] = conex::Extract(models[m]->model, docs[i], options, &stats[i]);
      });
      for (const auto &s : stats) {
        total.windows += s.windows;
        total.concepts += s.concepts;
        total.unmatched += s.unmatched;
      }
      per_model.push_back(std::move(out));
    }
    inputs["models"] = model_hashes;
    std::vector<conex::Document> result =
        per_model.size() == 1 ? std::move(per_model[0]) : conex::EnsembleCorpora(per_model);
    conex::WriteDocuments(output_path, result, Header(config.ToJson(), inputs));
    ordered_json s = {{"documents", result.size()},
                      {"windows", total.windows},
                      {"concepts", total.concepts},
                      {"unmatched", total.unmatched}};
    Put(out_stats_json, s.dump());
  });
}

conex_status conex_ensemble_files(const char *const *input_paths, size_t num_inputs,
                                  const char *output_path) {
  return Guard([&] {
    Require(input_paths, "input_paths");
    Require(output_path, "output_path");
    if (num_inputs < 2) throw conex::ConfigError("ensemble needs at least two inputs");
    std::vector<std::vector<conex::Document>> corpora;
    ordered_json hashes = ordered_json::array();
    for (size_t i = 0; i < num_inputs; ++i) {
      Require(input_paths[i], "input path");
      corpora.push_back(Load(input_paths[i]));
      hashes.push_back(FileHash(input_paths[i]));
    }
    conex::WriteDocuments(output_path, conex::EnsembleCorpora(corpora),
                          Header(json::object(), {{"predictions", hashes}}));
  });
}

conex_status conex_evaluate_files(const char *predicted_path, const char *gold_path,
                                  char **out_json, char **out_table) {
  return Guard([&] {
    Require(predicted_path, "predicted_path");
    Require(gold_path, "gold_path");
    conex::ScoreReport r = conex::Score(Load(predicted_path), Load(gold_path));
    Put(out_json, r.ToJson().dump());
    Put(out_table, r.ToTable());
  });
}

}  // extern "C"
