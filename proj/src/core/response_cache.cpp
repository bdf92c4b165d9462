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
#include "core/response_cache.hpp"

#include <mutex>

#include "core/error.hpp"
#include "core/util.hpp"

namespace greenjudge {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_ / "v1");
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return dir_ / "v1" / key.substr(0, 2) / (key + ".json");
}

std::optional<CompletionResponse> ResponseCache::lookup(const std::string& key) const {
  {
    std::shared_lock lock(mu_);
    auto it = memory_.find(key);
    if (it != memory_.end()) return it->second;
  }
  if (dir_.empty()) return std::nullopt;
  const auto path = path_for(key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  CompletionResponse response;
  try {
    const auto record = nlohmann::json::parse(read_file(path));
    if (record.value("key", "") != key) {
      fail(ErrorCode::kIoError, "cache record " + path.string() + " does not match its key");
    }
    response = response_from_json(record.at("response"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIoError, "corrupt cache record " + path.string() + ": " + e.what());
  }
  std::unique_lock lock(mu_);
  memory_.emplace(key, response);
  return response;
}

void ResponseCache::store(const std::string& key, const nlohmann::json& request_material,
                          const CompletionResponse& response) {
  CompletionResponse stored = response;
  stored.cache_hit = false;
  std::unique_lock lock(mu_);
  if (!memory_.emplace(key, stored).second) return;
  if (dir_.empty()) return;
  const auto path = path_for(key);
  if (std::filesystem::exists(path)) return;
  nlohmann::json record;
  record["version"] = 1;
  record["key"] = key;
  record["request"] = request_material;
  record["response"] = response_to_json(stored);
  write_file_atomic(path, record.dump() + "\n");
}

}  // namespace greenjudge
