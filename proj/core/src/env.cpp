#include "grlp/env.hpp"

#include "grlp/error.hpp"
#include "http_util.hpp"

#include <chrono>

namespace grlp {

MockEnvironment::MockEnvironment(PromptTemplate tmpl, std::shared_ptr<const Embedder> embedder)
    : template_(std::move(tmpl)), embedder_(std::move(embedder)) {
  template_.validate();
  if (!embedder_) throw Error(ErrorKind::argument, "mock environment needs an embedder");
}

CompletionResponse MockEnvironment::complete(const CompletionRequest& request) const {
  const auto start = std::chrono::steady_clock::now();
  const ParsedPrompt parsed = parse_prompt(request.prompt, template_);
  CompletionResponse response;
  if (!parsed.examples.empty()) {
    const EmbeddingVector target = embedder_->embed_text(parsed.query);
    std::size_t best = 0;
    double best_sim = -INFINITY;
    for (std::size_t i = 0; i < parsed.examples.size(); ++i) {
      const double sim = cosine(embedder_->embed_text(parsed.examples[i].query), target);
      if (sim > best_sim) {
        best_sim = sim;
        best = i;
      }
    }
    response.text = parsed.examples[best].response;
    response.provider_meta["chosen_example"] = best;
  }
  response.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  response.provider_meta["provider"] = "mock";
  return response;
}

HttpEnvironment::HttpEnvironment(HttpClientOptions options)
    : options_(std::move(options)),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options_.max_in_flight))) {
  detail::parse_base_url(options_.base_url);
}

HttpEnvironment::~HttpEnvironment() = default;

CompletionResponse HttpEnvironment::complete(const CompletionRequest& request) const {
  if (request.max_tokens < 1) throw Error(ErrorKind::argument, "max_tokens must be at least 1");
  if (request.temperature < 0.0) throw Error(ErrorKind::argument, "temperature must be non-negative");
  const std::string& model = request.model.empty() ? options_.model : request.model;
  nlohmann::json body = {
      {"model", model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  const auto start = std::chrono::steady_clock::now();
  const auto reply = detail::post_json(options_, "/chat/completions", body, in_flight_);
  CompletionResponse response;
  try {
    response.text = reply.body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw HttpError(ErrorKind::protocol, reply.status, "response lacks choices[0].message.content");
  }
  response.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  response.provider_meta = {{"provider", "http"}, {"attempts", reply.attempts}, {"status", reply.status}};
  if (reply.body.contains("usage")) response.provider_meta["usage"] = reply.body["usage"];
  return response;
}

}  // namespace grlp
