#include "grlp/promptgen.hpp"

#include "grlp/error.hpp"

#include <array>
#include <fstream>
#include <map>
#include <sstream>

namespace grlp {
namespace {

constexpr std::string_view kQuery = "{query}";
constexpr std::string_view kContext = "{context}";
constexpr std::string_view kResponse = "{response}";
constexpr std::array<std::string_view, 3> kPlaceholders{kQuery, kContext, kResponse};

bool has_placeholder(std::string_view text) {
  for (auto p : kPlaceholders) {
    if (text.find(p) != std::string_view::npos) return true;
  }
  return false;
}

struct Fields {
  std::string_view query;
  std::string_view context;
  std::string_view response;
};

// Single left-to-right pass so substituted text is never rescanned.
std::string fill(std::string_view block, const Fields& fields) {
  std::string out;
  out.reserve(block.size() + fields.query.size() + fields.context.size() + fields.response.size());
  std::size_t pos = 0;
  while (pos < block.size()) {
    if (block[pos] == '{') {
      const auto rest = block.substr(pos);
      if (rest.starts_with(kQuery)) {
        out += fields.query;
        pos += kQuery.size();
        continue;
      }
      if (rest.starts_with(kContext)) {
        out += fields.context;
        pos += kContext.size();
        continue;
      }
      if (rest.starts_with(kResponse)) {
        out += fields.response;
        pos += kResponse.size();
        continue;
      }
    }
    out += block[pos++];
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      return lines;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
}

// Example block with the context line (and its label line) removed.
std::string without_context(std::string_view block) {
  auto lines = split_lines(block);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find(kContext) == std::string::npos) continue;
    std::size_t first = i;
    if (i > 0 && !has_placeholder(lines[i - 1])) first = i - 1;
    lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(first), lines.begin() + static_cast<std::ptrdiff_t>(i + 1));
    break;
  }
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

enum class Slot { literal, query, context, response };

struct Segment {
  Slot slot;
  std::string text;
};

std::vector<Segment> compile(std::string_view block) {
  std::vector<Segment> segs;
  std::string literal;
  std::size_t pos = 0;
  auto push_capture = [&](Slot slot, std::size_t len) {
    if (!literal.empty()) segs.push_back({Slot::literal, std::move(literal)});
    literal.clear();
    segs.push_back({slot, {}});
    pos += len;
  };
  while (pos < block.size()) {
    const auto rest = block.substr(pos);
    if (rest.starts_with(kQuery)) {
      push_capture(Slot::query, kQuery.size());
    } else if (rest.starts_with(kContext)) {
      push_capture(Slot::context, kContext.size());
    } else if (rest.starts_with(kResponse)) {
      push_capture(Slot::response, kResponse.size());
    } else {
      literal += block[pos++];
    }
  }
  if (!literal.empty()) segs.push_back({Slot::literal, std::move(literal)});
  return segs;
}

std::string leading_literal(const std::vector<Segment>& segs) {
  return !segs.empty() && segs.front().slot == Slot::literal ? segs.front().text : std::string{};
}

struct BlockMatch {
  std::size_t end;
  ParsedExample example;
};

// Lazy match of an example block at `pos`; a trailing capture stops at the first
// position where one of `terminators` begins.
std::optional<BlockMatch> match_block(const std::vector<Segment>& segs, std::string_view text, std::size_t pos,
                                      const std::vector<std::string>& terminators) {
  BlockMatch m{pos, {}};
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Segment& seg = segs[k];
    if (seg.slot == Slot::literal) {
      if (text.substr(pos).starts_with(seg.text)) {
        pos += seg.text.size();
        continue;
      }
      return std::nullopt;
    }
    std::size_t stop = std::string_view::npos;
    if (k + 1 < segs.size()) {
      stop = text.find(segs[k + 1].text, pos);
    } else {
      for (const auto& t : terminators) stop = std::min(stop, text.find(t, pos));
    }
    if (stop == std::string_view::npos) return std::nullopt;
    std::string value(text.substr(pos, stop - pos));
    switch (seg.slot) {
      case Slot::query: m.example.query = std::move(value); break;
      case Slot::context: m.example.context = std::move(value); break;
      case Slot::response: m.example.response = std::move(value); break;
      case Slot::literal: break;
    }
    pos = stop;
  }
  m.end = pos;
  return m;
}

std::optional<std::string> match_query_block(const std::vector<Segment>& segs, std::string_view text,
                                             std::size_t pos) {
  std::string query;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Segment& seg = segs[k];
    if (seg.slot == Slot::literal) {
      if (!text.substr(pos).starts_with(seg.text)) return std::nullopt;
      pos += seg.text.size();
      continue;
    }
    if (seg.slot != Slot::query) return std::nullopt;
    std::size_t stop;
    if (k + 1 == segs.size()) {
      stop = text.size();
    } else if (k + 2 == segs.size()) {
      // Final literal anchors at the end of the prompt.
      const std::string& tail = segs[k + 1].text;
      if (text.size() < pos + tail.size() || !text.ends_with(tail)) return std::nullopt;
      stop = text.size() - tail.size();
    } else {
      stop = text.find(segs[k + 1].text, pos);
      if (stop == std::string_view::npos) return std::nullopt;
    }
    query.assign(text.substr(pos, stop - pos));
    pos = stop;
  }
  if (pos != text.size()) return std::nullopt;
  return query;
}

}  // namespace

void PromptTemplate::validate() const {
  for (auto p : kPlaceholders) {
    if (example_block.find(p) == std::string::npos) {
      throw Error(ErrorKind::template_format, "example block lacks placeholder " + std::string(p));
    }
  }
  if (query_block.find(kQuery) == std::string::npos) {
    throw Error(ErrorKind::template_format, "query block lacks placeholder {query}");
  }
  if (joiner.empty()) throw Error(ErrorKind::template_format, "joiner must not be empty");
}

PromptTemplate default_template() {
  return PromptTemplate{
      "You are a helpful assistant. Follow the examples and answer the final instruction.",
      "### Instruction:\n{query}\n### Context:\n{context}\n### Response:\n{response}",
      "### Instruction:\n{query}\n### Response:\n",
      "\n\n",
  };
}

PromptTemplate parse_template(std::string_view text) {
  static const std::map<std::string, int, std::less<>> kSections{
      {"---preamble---", 0}, {"---example_block---", 1}, {"---query_block---", 2}, {"---joiner---", 3}};
  std::array<std::optional<std::string>, 4> sections;
  int current = -1;
  std::string buffer;
  auto close = [&] {
    if (current < 0) return;
    if (!buffer.empty() && buffer.back() == '\n') buffer.pop_back();
    sections[static_cast<std::size_t>(current)] = buffer;
    buffer.clear();
  };
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    const bool last = nl == std::string_view::npos;
    std::string_view line = text.substr(start, last ? std::string_view::npos : nl - start);
    std::string_view bare = line;
    if (bare.ends_with('\r')) bare.remove_suffix(1);
    if (bare.size() > 6 && bare.starts_with("---") && bare.ends_with("---") &&
        bare.find_first_of(" \t") == std::string_view::npos) {
      auto it = kSections.find(bare);
      if (it == kSections.end()) {
        throw Error(ErrorKind::template_format, "unknown template section " + std::string(bare));
      }
      if (sections[static_cast<std::size_t>(it->second)] || current == it->second) {
        throw Error(ErrorKind::template_format, "duplicate template section " + std::string(bare));
      }
      close();
      current = it->second;
    } else if (current >= 0) {
      buffer += line;
      if (!last) buffer += '\n';
    } else if (!bare.empty()) {
      throw Error(ErrorKind::template_format, "text before the first section marker");
    }
    if (last) break;
    start = nl + 1;
  }
  close();
  static const std::array<const char*, 4> kNames{"preamble", "example_block", "query_block", "joiner"};
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (!sections[i]) throw Error(ErrorKind::template_format, std::string("missing section ---") + kNames[i] + "---");
  }
  PromptTemplate tmpl{*sections[0], *sections[1], *sections[2], *sections[3]};
  tmpl.validate();
  return tmpl;
}

PromptTemplate load_template(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open template '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_template(buf.str());
}

std::string format_template(const PromptTemplate& tmpl) {
  std::string out;
  out += "---preamble---\n" + tmpl.preamble + "\n";
  out += "---example_block---\n" + tmpl.example_block + "\n";
  out += "---query_block---\n" + tmpl.query_block + "\n";
  out += "---joiner---\n" + tmpl.joiner + "\n";
  return out;
}

std::string render_example(const CandidateExample& example, const PromptTemplate& tmpl) {
  if (example.context) return fill(tmpl.example_block, {example.query, *example.context, example.response});
  return fill(without_context(tmpl.example_block), {example.query, {}, example.response});
}

std::string render_prompt(const std::vector<CandidateExample>& sequence, std::string_view query,
                          const PromptTemplate& tmpl) {
  if (query.empty()) throw Error(ErrorKind::argument, "query is empty");
  std::string out;
  auto append = [&](const std::string& part) {
    if (!out.empty()) out += tmpl.joiner;
    out += part;
  };
  if (!tmpl.preamble.empty()) out = tmpl.preamble;
  for (const auto& ex : sequence) append(render_example(ex, tmpl));
  append(fill(tmpl.query_block, {query, {}, {}}));
  return out;
}

ParsedPrompt parse_prompt(std::string_view prompt, const PromptTemplate& tmpl) {
  const auto with_ctx = compile(tmpl.example_block);
  const auto no_ctx = compile(without_context(tmpl.example_block));
  const auto query_segs = compile(tmpl.query_block);

  std::vector<std::string> terminators;
  for (const auto* segs : {&with_ctx, &no_ctx, &query_segs}) {
    terminators.push_back(tmpl.joiner + leading_literal(*segs));
  }

  std::size_t pos = 0;
  if (!tmpl.preamble.empty()) {
    const std::string head = tmpl.preamble + tmpl.joiner;
    if (!prompt.starts_with(head)) throw Error(ErrorKind::protocol, "prompt does not start with the template preamble");
    pos = head.size();
  }

  ParsedPrompt parsed;
  while (true) {
    std::optional<BlockMatch> best;
    for (const auto* segs : {&with_ctx, &no_ctx}) {
      auto m = match_block(*segs, prompt, pos, terminators);
      if (m && prompt.substr(m->end).starts_with(tmpl.joiner) && (!best || m->end < best->end)) best = std::move(m);
    }
    if (best) {
      parsed.examples.push_back(std::move(best->example));
      pos = best->end + tmpl.joiner.size();
      continue;
    }
    auto query = match_query_block(query_segs, prompt, pos);
    if (!query) throw Error(ErrorKind::protocol, "prompt does not match the template at offset " + std::to_string(pos));
    parsed.query = std::move(*query);
    return parsed;
  }
}

}  // namespace grlp
