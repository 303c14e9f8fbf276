#include "grlp/embedder.hpp"

#include "grlp/error.hpp"
#include "http_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

namespace grlp {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void check_finite(const EmbeddingVector& v, std::string_view source) {
  if (!v.allFinite()) throw Error(ErrorKind::numeric, std::string(source) + " produced a non-finite embedding");
}

}  // namespace

std::string example_text(const CandidateExample& example) {
  std::string text = example.query;
  text += '\n';
  if (example.context) text += *example.context;
  text += '\n';
  text += example.response;
  return text;
}

EmbeddingVector Embedder::embed_example(const CandidateExample& example) const {
  return embed_text(example_text(example));
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::argument,
                "cosine of vectors with dimensions " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

void normalize_in_place(EmbeddingVector& v, Normalization normalization) {
  if (normalization == Normalization::none) return;
  const double n = v.norm();
  if (n > 0.0) v /= n;
}

HashEmbedder::HashEmbedder(std::size_t dim, std::uint64_t salt, Normalization normalization)
    : dim_(dim), salt_(salt), normalization_(normalization) {
  if (dim < 2) throw Error(ErrorKind::argument, "embedding dimension must be at least 2");
}

std::size_t HashEmbedder::bucket(std::string_view token) const {
  std::uint64_t h = kFnvOffset ^ salt_;
  for (unsigned char c : token) {
    h ^= c;
    h *= kFnvPrime;
  }
  return static_cast<std::size_t>(h % dim_);
}

EmbeddingVector HashEmbedder::embed_text(std::string_view text) const {
  EmbeddingVector v = EmbeddingVector::Zero(static_cast<Eigen::Index>(dim_));
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    v[static_cast<Eigen::Index>(bucket(token))] += 1.0;
    token.clear();
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else {
      token.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  normalize_in_place(v, normalization_);
  return v;
}

FileEmbedder::FileEmbedder(const std::filesystem::path& path, std::size_t dim, Normalization normalization)
    : dim_(dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open embedding file '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!record.contains("text") || !record["text"].is_string() || !record.contains("vector") ||
        !record["vector"].is_array()) {
      throw Error(ErrorKind::schema, "line " + std::to_string(line_no) + ": expected {\"text\", \"vector\"}");
    }
    const auto& values = record["vector"];
    if (values.size() != dim) {
      throw Error(ErrorKind::shape, "line " + std::to_string(line_no) + ": vector has " +
                                        std::to_string(values.size()) + " entries, expected " + std::to_string(dim));
    }
    EmbeddingVector v(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) v[static_cast<Eigen::Index>(i)] = values[i].get<double>();
    check_finite(v, "embedding file");
    normalize_in_place(v, normalization);
    vectors_.insert_or_assign(record["text"].get<std::string>(), std::move(v));
  }
}

EmbeddingVector FileEmbedder::embed_text(std::string_view text) const {
  auto it = vectors_.find(std::string(text));
  if (it == vectors_.end()) {
    std::string shown(text.substr(0, 60));
    throw Error(ErrorKind::lookup, "no precomputed embedding for text '" + shown + "'");
  }
  return it->second;
}

HttpEmbedder::HttpEmbedder(HttpClientOptions options, std::size_t dim, Normalization normalization)
    : options_(std::move(options)),
      dim_(dim),
      normalization_(normalization),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options_.max_in_flight))) {
  detail::parse_base_url(options_.base_url);
}

HttpEmbedder::~HttpEmbedder() = default;

EmbeddingVector HttpEmbedder::embed_text(std::string_view text) const {
  nlohmann::json body = {{"model", options_.model}, {"input", nlohmann::json::array({std::string(text)})}};
  const auto reply = detail::post_json(options_, "/embeddings", body, in_flight_);
  const nlohmann::json* values = nullptr;
  try {
    values = &reply.body.at("data").at(0).at("embedding");
  } catch (const nlohmann::json::exception&) {
    throw HttpError(ErrorKind::protocol, reply.status, "response lacks data[0].embedding");
  }
  if (!values->is_array() || values->size() != dim_) {
    throw Error(ErrorKind::shape, "remote embedding has " + std::to_string(values->size()) + " entries, expected " +
                                      std::to_string(dim_));
  }
  EmbeddingVector v(static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < dim_; ++i) v[static_cast<Eigen::Index>(i)] = (*values)[i].get<double>();
  check_finite(v, "embedding API");
  normalize_in_place(v, normalization_);
  return v;
}

std::shared_ptr<const Embedder> make_embedder(const EmbedderConfig& config) {
  switch (config.kind) {
    case EmbedderConfig::Kind::hash:
      return std::make_shared<HashEmbedder>(config.dim, config.salt, config.normalization);
    case EmbedderConfig::Kind::file:
      return std::make_shared<FileEmbedder>(config.path, config.dim, config.normalization);
    case EmbedderConfig::Kind::http:
      return std::make_shared<HttpEmbedder>(config.http, config.dim, config.normalization);
  }
  throw Error(ErrorKind::argument, "unknown embedder kind");
}

}  // namespace grlp
