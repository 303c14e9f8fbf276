#include "http_util.hpp"

#include "grlp/error.hpp"

#include <httplib.h>

#include <cstdlib>
#include <thread>

namespace grlp::detail {
namespace {

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

bool retryable(int status) { return status == 429 || status >= 500; }

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

}  // namespace

BaseUrl parse_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorKind::config, "base URL '" + url + "' lacks a scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  BaseUrl out;
  out.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) out.prefix = url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

JsonReply post_json(const HttpClientOptions& options, const std::string& path, const nlohmann::json& body,
                    std::counting_semaphore<>& in_flight) {
  const BaseUrl base = parse_base_url(options.base_url);
  httplib::Headers headers;
  if (!options.token_env.empty()) {
    const char* token = std::getenv(options.token_env.c_str());
    if (token == nullptr) {
      throw Error(ErrorKind::config, "environment variable '" + options.token_env + "' is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  const std::string payload = body.dump();
  const std::string target = base.prefix + path;

  int last_status = 0;
  std::string last_message = "no attempt made";
  const int attempts = std::max(1, options.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(options.backoff_base * (1 << (attempt - 2)));

    httplib::Result result;
    {
      SlotGuard slot(in_flight);
      httplib::Client client(base.origin);
      client.set_connection_timeout(options.timeout);
      client.set_read_timeout(options.timeout);
      client.set_write_timeout(options.timeout);
      result = client.Post(target, headers, payload, "application/json");
    }
    if (!result) {
      last_status = 0;
      last_message = "transport failure: " + httplib::to_string(result.error());
      continue;
    }
    last_status = result->status;
    if (result->status >= 200 && result->status < 300) {
      try {
        return {nlohmann::json::parse(result->body), attempt, result->status};
      } catch (const nlohmann::json::parse_error& e) {
        throw HttpError(ErrorKind::protocol, result->status, std::string("response is not JSON: ") + e.what());
      }
    }
    if (!retryable(result->status)) {
      throw HttpError(ErrorKind::request, result->status, "POST " + target + " rejected: " + excerpt(result->body));
    }
    last_message = "POST " + target + " failed: " + excerpt(result->body);
  }
  throw HttpError(ErrorKind::transport, last_status,
                  last_message + " after " + std::to_string(attempts) + " attempts");
}

}  // namespace grlp::detail
