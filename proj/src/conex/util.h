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

// String, file and logging helpers shared by all modules.

#ifndef CONEX_UTIL_H_
#define CONEX_UTIL_H_

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

namespace conex {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view content);
std::string FileStem(const std::string &path);

// Splits on '\n', dropping a trailing '\r' from every line. A final empty
// line after the last newline is not returned.
std::vector<std::string_view> SplitLines(std::string_view content);
std::vector<std::string> SplitString(const std::string &s, char sep);
std::vector<std::string> SplitWhitespace(std::string_view s);
std::string_view Trim(std::string_view s);
std::string ToLower(std::string_view s);

// 64-bit FNV-1a, rendered as 16 hex digits by HashHex.
uint64_t Fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL);
std::string HashHex(uint64_t h);

// ---- Logging ---------------------------------------------------------------

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3, kOff = 4 };

// Initial level comes from the CF_LOG environment variable
// (debug|info|warning|error|off); default warning.
LogLevel CurrentLogLevel();
void SetLogLevel(LogLevel level);
LogLevel ParseLogLevel(std::string_view name);
void LogMessage(LogLevel level, std::string_view message);

template <typename... Args>
void Log(LogLevel level, fmt::format_string<Args...> f, Args &&...args) {
  if (level < CurrentLogLevel()) return;
  LogMessage(level, fmt::format(f, std::forward<Args>(args)...));
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions are
// rethrown in index order after all workers finish.
void ParallelFor(size_t n, int jobs, const std::function<void(size_t)> &fn);

}  // namespace conex

#endif  // CONEX_UTIL_H_
