#pragma once

#include "grlp/corpus.hpp"
#include "grlp/types.hpp"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>

namespace grlp {

enum class Normalization { l2, none };

/// Provider of fixed-width text embeddings. Implementations are immutable
/// after construction and may be called from several threads at once.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::size_t dim() const = 0;
  virtual EmbeddingVector embed_text(std::string_view text) const = 0;

  /// Embeds query, context (when present) and response joined by newlines.
  EmbeddingVector embed_example(const CandidateExample& example) const;
};

/// Text fed to the embedder for a candidate example.
std::string example_text(const CandidateExample& example);

/// Standard cosine similarity; 0 when either vector has zero norm.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

void normalize_in_place(EmbeddingVector& v, Normalization normalization);

/// Bag-of-words feature hashing: lowercase, split on whitespace, bucket each
/// token by a salted FNV-1a hash and count.
class HashEmbedder final : public Embedder {
 public:
  HashEmbedder(std::size_t dim, std::uint64_t salt = 0, Normalization normalization = Normalization::l2);

  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed_text(std::string_view text) const override;

  /// Bucket index of a single (already lowercased) token.
  std::size_t bucket(std::string_view token) const;

 private:
  std::size_t dim_;
  std::uint64_t salt_;
  Normalization normalization_;
};

/// Precomputed vectors from JSON lines `{"text": ..., "vector": [...]}`.
class FileEmbedder final : public Embedder {
 public:
  FileEmbedder(const std::filesystem::path& path, std::size_t dim, Normalization normalization = Normalization::l2);

  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed_text(std::string_view text) const override;

  std::size_t size() const { return vectors_.size(); }

 private:
  std::size_t dim_;
  std::unordered_map<std::string, EmbeddingVector> vectors_;
};

struct HttpClientOptions {
  std::string base_url;
  std::string model;
  std::string token_env;
  std::size_t max_in_flight = 4;
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::seconds timeout{60};
};

/// Remote embedding API: POST {"model", "input": [text]} to <base>/embeddings
/// and read data[0].embedding.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(HttpClientOptions options, std::size_t dim, Normalization normalization = Normalization::l2);
  ~HttpEmbedder() override;

  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed_text(std::string_view text) const override;

 private:
  HttpClientOptions options_;
  std::size_t dim_;
  Normalization normalization_;
  mutable std::counting_semaphore<> in_flight_;
};

struct EmbedderConfig {
  enum class Kind { hash, file, http };
  Kind kind = Kind::hash;
  std::size_t dim = 64;
  Normalization normalization = Normalization::l2;
  std::uint64_t salt = 0;
  std::filesystem::path path;
  HttpClientOptions http;
};

std::shared_ptr<const Embedder> make_embedder(const EmbedderConfig& config);

}  // namespace grlp
