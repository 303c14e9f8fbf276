#pragma once

#include "grlp/embedder.hpp"

#include <nlohmann/json.hpp>

#include <semaphore>
#include <string>

namespace grlp::detail {

struct BaseUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash, may be empty
};

BaseUrl parse_base_url(const std::string& url);

struct JsonReply {
  nlohmann::json body;
  int attempts = 0;
  int status = 0;
};

/// POSTs `body` to base_url + path. 429, 5xx and transport failures are retried
/// with exponential backoff up to options.max_attempts; any other non-2xx status
/// raises a request error right away.
JsonReply post_json(const HttpClientOptions& options, const std::string& path, const nlohmann::json& body,
                    std::counting_semaphore<>& in_flight);

}  // namespace grlp::detail
