#pragma once

#include "grlp/corpus.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grlp {

/// Prompt layout: preamble, one example block per in-context example, then the
/// query block, all separated by `joiner`. Empty preamble is skipped.
struct PromptTemplate {
  std::string preamble;
  std::string example_block;  // {query}, {context}, {response}
  std::string query_block;    // {query}
  std::string joiner;

  /// Throws template_format errors for missing placeholders.
  void validate() const;

  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

PromptTemplate default_template();

/// Template file: sections introduced by `---preamble---`, `---example_block---`,
/// `---query_block---` and `---joiner---` marker lines. A section's text runs up to
/// the next marker with one trailing newline removed.
PromptTemplate parse_template(std::string_view text);
PromptTemplate load_template(const std::filesystem::path& path);
std::string format_template(const PromptTemplate& tmpl);

/// Fills one example block. When context is absent, the line holding
/// {context} is dropped together with a placeholder-free label line right above it.
std::string render_example(const CandidateExample& example, const PromptTemplate& tmpl);

std::string render_prompt(const std::vector<CandidateExample>& sequence, std::string_view query,
                          const PromptTemplate& tmpl);

struct ParsedExample {
  std::string query;
  std::optional<std::string> context;
  std::string response;
};

struct ParsedPrompt {
  std::vector<ParsedExample> examples;
  std::string query;
};

/// Recovers the example blocks and final instruction from a rendered prompt.
/// Throws a protocol error when the text does not follow the template.
ParsedPrompt parse_prompt(std::string_view prompt, const PromptTemplate& tmpl);

}  // namespace grlp
