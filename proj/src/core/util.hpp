// Copyright 2026 The greenjudge Authors.
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
#ifndef GREENJUDGE_CORE_UTIL_HPP_
#define GREENJUDGE_CORE_UTIL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace greenjudge {

std::string sha256_hex(std::string_view data);
std::uint64_t fnv1a64(std::string_view data);

// Portable seeded generator. std::uniform_int_distribution is
// implementation-defined, so index draws use rejection sampling on the raw
// mt19937_64 stream to keep outputs identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);
  // Uniform in [0, 1).
  double uniform_real();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt);

// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_whitespace(std::string_view s);
std::size_t count_words(std::string_view s);
std::string to_lower(std::string_view s);

// Shortest round-trip decimal representation.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);
// Writes via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_UTIL_HPP_
