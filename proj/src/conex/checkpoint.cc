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

// Binary checkpoint layout, all integers little-endian:
//
//   "CONEXCKP"  u32 version  u64 step
//   u64 n  config JSON (n bytes)
//   u64 count  { u32 n  token bytes }*
//   u64 count  { u32 n  name  u32 rank  u64 dims[rank]  f64 values[] }*

#include <bit>
#include <cstring>

#include <fmt/format.h>

#include "conex/corpus.h"
#include "conex/model.h"
#include "conex/util.h"

namespace conex {
namespace {

constexpr char kMagic[8] = {'C', 'O', 'N', 'E', 'X', 'C', 'K', 'P'};

class Writer {
 public:
  void Bytes(const void *p, size_t n) { out_.append(static_cast<const char *>(p), n); }
  template <typename T>
  void Int(T v) {
    for (size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((static_cast<uint64_t>(v) >> (8 * i)) & 0xff));
    }
  }
  void F64(double d) { Int(std::bit_cast<uint64_t>(d)); }
  void Str32(const std::string &s) {
    Int<uint32_t>(static_cast<uint32_t>(s.size()));
    Bytes(s.data(), s.size());
  }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  std::string_view Bytes(size_t n) {
    if (n > in_.size() - pos_) throw ParseError("checkpoint truncated");
    std::string_view v = in_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  template <typename T>
  T Int() {
    std::string_view b = Bytes(sizeof(T));
    uint64_t v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    }
    return static_cast<T>(v);
  }
  double F64() { return std::bit_cast<double>(Int<uint64_t>()); }
  std::string Str32() { return std::string(Bytes(Int<uint32_t>())); }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  size_t pos_ = 0;
};

}  // namespace

std::string SerializeCheckpoint(const ModelCheckpoint &ckpt) {
  Writer w;
  w.Bytes(kMagic, sizeof(kMagic));
  w.Int<uint32_t>(kCheckpointVersion);
  w.Int<uint64_t>(ckpt.step);
  std::string config = ckpt.model.config().ToJson().dump();
  w.Int<uint64_t>(config.size());
  w.Bytes(config.data(), config.size());
  const auto &tokens = ckpt.model.vocab().tokens();
  w.Int<uint64_t>(tokens.size() - Vocabulary::kNumReserved);
  for (size_t i = Vocabulary::kNumReserved; i < tokens.size(); ++i) w.Str32(tokens[i]);
  const auto &params = ckpt.model.params().all();
  w.Int<uint64_t>(params.size());
  for (const Parameter &p : params) {
    w.Str32(p.name);
    w.Int<uint32_t>(static_cast<uint32_t>(p.value.rank()));
    for (size_t d : p.value.shape()) w.Int<uint64_t>(d);
    for (double v : p.value.data()) w.F64(v);
  }
  return w.Take();
}

ModelCheckpoint ParseCheckpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.Bytes(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw ParseError("not a checkpoint file");
  }
  uint32_t version = r.Int<uint32_t>();
  if (version != kCheckpointVersion) {
    throw ParseError(fmt::format("unsupported checkpoint version {}", version));
  }
  ModelCheckpoint ckpt;
  ckpt.step = r.Int<uint64_t>();
  std::string_view config_text = r.Bytes(r.Int<uint64_t>());
  nlohmann::json config_json = nlohmann::json::parse(config_text, nullptr, false);
  if (config_json.is_discarded()) throw ParseError("checkpoint config is not JSON");
  ModelConfig config = ModelConfig::FromJson(config_json);
  uint64_t ntokens = r.Int<uint64_t>();
  std::vector<std::string> tokens;
  for (uint64_t i = 0; i < ntokens; ++i) tokens.push_back(r.Str32());
  Vocabulary vocab(tokens);
  if (vocab.size() != ntokens + Vocabulary::kNumReserved) {
    throw ParseError("checkpoint vocabulary has duplicate tokens");
  }
  ckpt.model = PointerGenerator(config, std::move(vocab));
  ParameterSet &params = ckpt.model.params();
  uint64_t nparams = r.Int<uint64_t>();
  if (nparams != params.size()) {
    throw ParseError(fmt::format("checkpoint has {} tensors, model expects {}", nparams,
                                 params.size()));
  }
  for (uint64_t i = 0; i < nparams; ++i) {
    std::string name = r.Str32();
    if (!params.Has(name)) throw ParseError(fmt::format("unexpected tensor {}", name));
    Parameter &p = params.Get(name);
    Shape shape(r.Int<uint32_t>());
    for (size_t &d : shape) d = r.Int<uint64_t>();
    if (shape != p.value.shape()) {
      throw ParseError(fmt::format("tensor {} has shape {}, expected {}", name,
                                   ShapeString(shape), ShapeString(p.value.shape())));
    }
    for (double &v : p.value.data()) v = r.F64();
  }
  if (!r.done()) throw ParseError("trailing bytes after checkpoint");
  return ckpt;
}

void SaveCheckpoint(const std::string &path, const ModelCheckpoint &ckpt) {
  WriteFile(path, SerializeCheckpoint(ckpt));
}

ModelCheckpoint LoadCheckpoint(const std::string &path) {
  try {
    return ParseCheckpoint(ReadFile(path));
  } catch (const ParseError &e) {
    throw ParseError(fmt::format("{}: {}", path, e.what()));
  }
}

}  // namespace conex
