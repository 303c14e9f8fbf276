#pragma once

#include "grlp/embedder.hpp"
#include "grlp/promptgen.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <memory>
#include <semaphore>
#include <string>

namespace grlp {

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 256;
  double temperature = 0.0;
  std::string model;
};

struct CompletionResponse {
  std::string text;
  double latency_ms = 0.0;
  nlohmann::json provider_meta = nlohmann::json::object();
};

/// The black-box LLM the agent talks to. Implementations accept concurrent calls.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual CompletionResponse complete(const CompletionRequest& request) const = 0;
};

/// Deterministic stand-in: echoes the response of the in-context example whose
/// query embedding is closest (cosine) to the final instruction.
class MockEnvironment final : public Environment {
 public:
  MockEnvironment(PromptTemplate tmpl, std::shared_ptr<const Embedder> embedder);

  CompletionResponse complete(const CompletionRequest& request) const override;

 private:
  PromptTemplate template_;
  std::shared_ptr<const Embedder> embedder_;
};

/// Chat-completions client: one user message, retries on 429/5xx/transport.
class HttpEnvironment final : public Environment {
 public:
  explicit HttpEnvironment(HttpClientOptions options);
  ~HttpEnvironment() override;

  CompletionResponse complete(const CompletionRequest& request) const override;

 private:
  HttpClientOptions options_;
  mutable std::counting_semaphore<> in_flight_;
};

}  // namespace grlp
