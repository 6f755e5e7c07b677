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

// Command-line front end over the C interface.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "conex/conex.h"

namespace {

using nlohmann::json;

// Owns a string returned by the C interface.
struct CString {
  char *p = nullptr;
  ~CString() { conex_string_free(p); }
  std::string str() const { return p != nullptr ? p : ""; }
};

class Failure : public std::exception {
 public:
  explicit Failure(conex_status s) : status(s) {}
  conex_status status;
};

void Check(conex_status s) {
  if (s != CONEX_OK) {
    fmt::print(stderr, "conex: {}: {}\n", conex_status_name(s), conex_last_error());
    throw Failure(s);
  }
}

// Flags shared with the config file; only the ones given become overrides.
struct Overrides {
  std::string config_path;
  std::optional<double> alpha_min1, alpha_min2;
  std::optional<int> window, stride, layers, steps, beam, jobs;
  std::optional<uint64_t> seed;

  std::string Resolve() const {
    json o = json::object();
    if (alpha_min1) o["alpha_min1"] = *alpha_min1;
    if (alpha_min2) o["alpha_min2"] = *alpha_min2;
    if (window) o["window"] = *window;
    if (stride) o["stride"] = *stride;
    if (layers) o["layers"] = *layers;
    if (steps) o["train_steps"] = *steps;
    if (beam) o["beam"] = *beam;
    if (jobs) o["jobs"] = *jobs;
    if (seed) o["seed"] = *seed;
    CString out;
    Check(conex_config_resolve(config_path.empty() ? nullptr : config_path.c_str(),
                               o.dump().c_str(), &out.p));
    return out.str();
  }
};

void AddConfig(CLI::App *cmd, Overrides &o) {
  cmd->add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--jobs", o.jobs, "document-level worker threads");
}

void AddWindow(CLI::App *cmd, Overrides &o) {
  cmd->add_option("--window", o.window, "window length in tokens");
  cmd->add_option("--stride", o.stride, "window stride in tokens");
}

void WriteOut(const std::string &path, const std::string &content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::FILE *f = std::fopen(path.c_str(), "wb");
  if (f == nullptr || std::fwrite(content.data(), 1, content.size(), f) != content.size()) {
    if (f != nullptr) std::fclose(f);
    fmt::print(stderr, "conex: cannot write {}\n", path);
    throw Failure(CONEX_E_IO);
  }
  std::fclose(f);
}

std::string AnglesCsv(const json &j) {
  std::string out = "direction,index,key,count,frequency,focus,angle\n";
  for (const char *dir : {"head", "tail"}) {
    const json &c = j[dir];
    if (c.is_null()) continue;
    for (size_t i = 0; i < c["points"].size(); ++i) {
      const json &p = c["points"][i];
      bool focus = i == c["focus_index"].get<size_t>();
      out += fmt::format("{},{},{},{},{:.17g},{},{}\n", dir, i, p["key"].get<std::string>(),
                         p["count"].get<uint64_t>(), p["frequency"].get<double>(),
                         focus ? 1 : 0,
                         focus ? fmt::format("{:.17g}", c["angle"].get<double>()) : "");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Concept extraction with weak annotation and pointer-generator networks"};
  app.set_version_flag("--version", std::string(conex_version()));
  app.require_subcommand(1);

  Overrides o;
  std::string input, output, freq_table, validation, init_from, gold, ngram, format = "json";
  std::vector<std::string> models, inputs;
  int grid_h = 50;

  CLI::App *annotate = app.add_subcommand("annotate", "weakly annotate documents");
  annotate->add_option("--input", input, "documents (JSONL or CoNLL)")->required();
  annotate->add_option("--output", output, "dense weak JSONL")->required();
  annotate->add_option("--freq-table", freq_table, "n-gram frequency table")->required();
  annotate->add_option("--alpha-min1", o.alpha_min1, "larger-angle threshold (degrees)");
  annotate->add_option("--alpha-min2", o.alpha_min2, "smaller-angle threshold (degrees)");
  AddConfig(annotate, o);

  CLI::App *angles = app.add_subcommand("angles", "neighbor curves and angles of an n-gram");
  angles->add_option("--freq-table", freq_table, "n-gram frequency table")->required();
  angles->add_option("--ngram", ngram, "space-separated key, e.g. \"reinforced_ADJ concrete_NOUN\"")
      ->required();
  angles->add_option("--grid-h", grid_h, "maximal difference step");
  angles->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  angles->add_option("--output", output, "output file (default stdout)");

  CLI::App *train = app.add_subcommand("train", "train a pointer-generator model");
  train->add_option("--input", input, "dense weak JSONL")->required();
  train->add_option("--output", output, "checkpoint directory")->required();
  train->add_option("--validation", validation, "held-out dense weak JSONL");
  train->add_option("--init-from", init_from, "checkpoint to fine-tune")
      ->check(CLI::ExistingFile);
  train->add_option("--layers", o.layers, "LSTM layers");
  train->add_option("--steps", o.steps, "SGD steps");
  AddWindow(train, o);
  AddConfig(train, o);

  CLI::App *extract = app.add_subcommand("extract", "extract concepts with trained models");
  extract->add_option("--input", input, "documents (JSONL or CoNLL)")->required();
  extract->add_option("--output", output, "predicted JSONL")->required();
  extract->add_option("--model", models, "checkpoint; repeat to ensemble")
      ->required()
      ->check(CLI::ExistingFile);
  extract->add_option("--beam", o.beam, "beam width");
  AddWindow(extract, o);
  AddConfig(extract, o);

  CLI::App *ensemble = app.add_subcommand("ensemble", "combine predicted corpora");
  ensemble->add_option("--input", inputs, "predicted JSONL; repeat")->required();
  ensemble->add_option("--output", output, "combined JSONL")->required();

  CLI::App *evaluate = app.add_subcommand("evaluate", "score predictions against gold");
  evaluate->add_option("--input", input, "predicted JSONL")->required();
  evaluate->add_option("--gold", gold, "gold JSONL")->required();
  evaluate->add_option("--output", output, "report JSON (default stdout)");
  bool table = false;
  evaluate->add_flag("--table", table, "also print the aligned table to stderr");

  CLI11_PARSE(app, argc, argv);

  try {
    if (annotate->parsed()) {
      std::string config = o.Resolve();
      conex_freq_table *t = nullptr;
      Check(conex_freq_table_load(freq_table.c_str(), &t));
      CString stats;
      conex_status s =
          conex_annotate_file(t, config.c_str(), input.c_str(), output.c_str(), &stats.p);
      conex_freq_table_free(t);
      Check(s);
      fmt::print(stderr, "{}\n", stats.str());
    } else if (angles->parsed()) {
      conex_freq_table *t = nullptr;
      Check(conex_freq_table_load(freq_table.c_str(), &t));
      CString j;
      conex_status s = conex_angles_json(t, ngram.c_str(), grid_h, &j.p);
      conex_freq_table_free(t);
      Check(s);
      WriteOut(output, format == "csv" ? AnglesCsv(json::parse(j.str()))
                                       : json::parse(j.str()).dump(2) + "\n");
    } else if (train->parsed()) {
      std::string config = o.Resolve();
      CString summary;
      Check(conex_train(config.c_str(), input.c_str(),
                        validation.empty() ? nullptr : validation.c_str(),
                        init_from.empty() ? nullptr : init_from.c_str(), output.c_str(),
                        &summary.p));
      fmt::print(stderr, "{}\n", summary.str());
    } else if (extract->parsed()) {
      std::string config = o.Resolve();
      std::vector<conex_model *> loaded;
      conex_status s = CONEX_OK;
      for (const std::string &m : models) {
        conex_model *p = nullptr;
        s = conex_model_load(m.c_str(), &p);
        if (s != CONEX_OK) break;
        loaded.push_back(p);
      }
      CString stats;
      if (s == CONEX_OK) {
        s = conex_extract_file(loaded.data(), loaded.size(), config.c_str(), input.c_str(),
                               output.c_str(), &stats.p);
      }
      for (conex_model *p : loaded) conex_model_free(p);
      Check(s);
      fmt::print(stderr, "{}\n", stats.str());
    } else if (ensemble->parsed()) {
      std::vector<const char *> paths;
      for (const std::string &p : inputs) paths.push_back(p.c_str());
      Check(conex_ensemble_files(paths.data(), paths.size(), output.c_str()));
    } else if (evaluate->parsed()) {
      CString j, t;
      Check(conex_evaluate_files(input.c_str(), gold.c_str(), &j.p, &t.p));
      WriteOut(output, json::parse(j.str()).dump(2) + "\n");
      if (table) fmt::print(stderr, "{}", t.str());
    }
  } catch (const Failure &f) {
    return static_cast<int>(f.status);
  }
  return 0;
}
