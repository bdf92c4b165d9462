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
#ifndef GREENJUDGE_CORE_OPENAI_BACKEND_HPP_
#define GREENJUDGE_CORE_OPENAI_BACKEND_HPP_

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include <json.hpp>

#include "core/llm_backend.hpp"

namespace greenjudge {

inline constexpr std::string_view kDefaultOpenAIModel = "gpt-4o-mini-2024-07-18";
inline constexpr std::string_view kDefaultBaseUrl = "https://api.openai.com/v1";

struct OpenAIOptions {
  std::string base_url = std::string(kDefaultBaseUrl);
  std::string api_key;
  int max_retries = 5;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30000};
  std::chrono::seconds timeout{60};

  // Reads base_url / api_key_env / retry keys from the config, falling back
  // to OPENAI_BASE_URL and OPENAI_API_KEY in the environment.
  static OpenAIOptions from_config(const BackendConfig& config);
};

// OpenAI-compatible /chat/completions client. Logprobs are converted to
// linear probabilities here and nowhere else.
class OpenAIBackend : public Backend {
 public:
  explicit OpenAIBackend(OpenAIOptions options);

  CompletionResponse complete(const CompletionRequest& request) override;
  std::string cache_namespace() const override;

 private:
  OpenAIOptions options_;
  std::string scheme_host_;
  std::string path_prefix_;
};

nlohmann::json build_chat_request_body(const CompletionRequest& request);
CompletionResponse parse_chat_completion(const nlohmann::json& body, bool want_logprobs);

std::shared_ptr<Backend> make_openai_backend(const BackendConfig& config);

}  // namespace greenjudge

#endif  // GREENJUDGE_CORE_OPENAI_BACKEND_HPP_
