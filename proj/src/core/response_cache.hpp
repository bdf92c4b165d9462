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
#ifndef GREENJUDGE_CORE_RESPONSE_CACHE_HPP_
#define GREENJUDGE_CORE_RESPONSE_CACHE_HPP_

#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "core/llm_backend.hpp"

namespace greenjudge {

// Append-only content-addressed store. On disk each record lives at
//   <dir>/v1/<first two hex chars of key>/<key>.json
// holding {"version":1,"key":...,"request":...,"response":...}. Records are
// never rewritten once present. An empty dir keeps the cache in memory.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir = {});

  std::optional<CompletionResponse> lookup(const std::string& key) const;
  void store(const std::string& key, const nlohmann::json& request_material,
             const CompletionResponse& response);

  std::filesystem::path path_for(const std::string& key) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, CompletionResponse> memory_;
};

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_RESPONSE_CACHE_HPP_
