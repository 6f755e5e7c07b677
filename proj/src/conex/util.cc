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

#include "conex/util.h"

#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace conex {

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open \"{}\" for reading", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string &path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open \"{}\" for writing", path));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError(fmt::format("write to \"{}\" failed", path));
}

std::string FileStem(const std::string &path) {
  return std::filesystem::path(path).stem().string();
}

std::vector<std::string_view> SplitLines(std::string_view content) {
  std::vector<std::string_view> lines;
  size_t pos = 0;
  while (pos < content.size()) {
    size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string> SplitString(const std::string &s, char sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string::npos ? std::string::npos
                                                          : next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

std::vector<std::string> SplitWhitespace(std::string_view s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

uint64_t Fnv1a64(std::string_view data, uint64_t seed) {
  uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HashHex(uint64_t h) { return fmt::format("{:016x}", h); }

namespace {

LogLevel InitialLevel() {
  const char *env = std::getenv("CF_LOG");
  if (env == nullptr) return LogLevel::kWarning;
  try {
    return ParseLogLevel(env);
  } catch (const std::exception &) {
    return LogLevel::kWarning;
  }
}

std::atomic<LogLevel> &LevelRef() {
  static std::atomic<LogLevel> level{InitialLevel()};
  return level;
}

}  // namespace

LogLevel CurrentLogLevel() { return LevelRef().load(std::memory_order_relaxed); }
void SetLogLevel(LogLevel level) { LevelRef().store(level); }

LogLevel ParseLogLevel(std::string_view name) {
  std::string n = ToLower(name);
  if (n == "debug") return LogLevel::kDebug;
  if (n == "info") return LogLevel::kInfo;
  if (n == "warning" || n == "warn") return LogLevel::kWarning;
  if (n == "error") return LogLevel::kError;
  if (n == "off" || n == "none") return LogLevel::kOff;
  throw std::invalid_argument(fmt::format("unknown log level \"{}\"", name));
}

void LogMessage(LogLevel level, std::string_view message) {
  static std::mutex mu;
  static const char *kNames[] = {"DEBUG", "INFO", "WARNING", "ERROR", "OFF"};
  std::lock_guard<std::mutex> lock(mu);
  fmt::print(stderr, "[conex {}] {}\n", kNames[static_cast<int>(level)], message);
}

void ParallelFor(size_t n, int jobs, const std::function<void(size_t)> &fn) {
  if (jobs <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  const size_t count = std::min<size_t>(static_cast<size_t>(jobs), n);
  for (size_t t = 0; t < count; ++t) threads.emplace_back(worker);
  for (auto &t : threads) t.join();
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace conex
