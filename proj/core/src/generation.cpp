#include "ukad/generation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "json_util.hpp"
#include "ukad/errors.hpp"
#include "ukad/random.hpp"
#include "ukad/text.hpp"

namespace ukad::generation {

using detail::Json;

namespace {

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\f\v") == std::string_view::npos;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::string> split_paragraphs(std::string_view body) {
  std::vector<std::string> out;
  std::size_t para_start = 0;
  std::size_t pos = 0;
  bool in_break = false;
  auto emit = [&](std::size_t end) {
    const auto piece = trim(body.substr(para_start, end - para_start));
    if (!piece.empty()) out.emplace_back(piece);
  };
  while (pos <= body.size()) {
    const std::size_t nl = body.find('\n', pos);
    const std::size_t line_end = nl == std::string_view::npos ? body.size() : nl;
    const std::string_view line = body.substr(pos, line_end - pos);
    // A blank line strictly between two newlines separates paragraphs.
    if (is_blank(line) && pos > 0 && nl != std::string_view::npos) {
      if (!in_break) emit(pos);
      in_break = true;
    } else if (in_break) {
      para_start = pos;
      in_break = false;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (!in_break) emit(body.size());
  return out;
}

GeneratedResponse extract_answer(std::span<const KnowledgeSnippet> snippets,
                                 std::uint64_t seed, TurnKey turn) {
  if (snippets.empty()) throw std::invalid_argument("extract_answer: no snippets");
  std::size_t pick = 0;
  if (snippets.size() > 1) {
    Rng rng = Rng::for_turn(seed, turn.dialogue_id, turn.turn);
    pick = rng.uniform_index(snippets.size());
  }
  const std::string& body = snippets[pick].body;
  const auto paragraphs = split_paragraphs(body);
  GeneratedResponse r;
  r.turn = std::move(turn);
  r.source = ResponseSource::Extracted;
  r.text = paragraphs.size() > 1 ? paragraphs.front() : body;
  return r;
}

std::vector<GeneratedResponse> parse_external_responses(
    const std::string& text, const std::string& source,
    std::optional<std::span<const TurnKey>> required) {
  std::vector<GeneratedResponse> out;
  std::set<TurnKey> seen;
  detail::for_each_jsonl_text(text, source, [&](const Json& r, const std::string& where) {
    GeneratedResponse g;
    g.turn = TurnKey{detail::require_id(r, "dialogue_id", where),
                     detail::require_int(r, "turn", where)};
    g.text = detail::require_string(r, "text", where);
    g.source = ResponseSource::External;
    if (text::normalize(g.text).empty()) throw ParseError(where, "empty response text");
    if (!seen.insert(g.turn).second) {
      throw ParseError(where, fmt::format("duplicate turn {}", to_string(g.turn)));
    }
    out.push_back(std::move(g));
  });
  if (required) {
    for (const auto& key : *required) {
      if (!seen.count(key)) {
        throw DataError(
            fmt::format("{}: missing response for turn {}", source, to_string(key)));
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.turn < b.turn; });
  return out;
}

std::vector<GeneratedResponse> ingest_external_responses(
    const std::filesystem::path& path,
    std::optional<std::span<const TurnKey>> required) {
  return parse_external_responses(read_file(path), path.string(), required);
}

std::string responses_to_jsonl(std::span<const GeneratedResponse> responses) {
  std::string out;
  for (const auto& r : responses) {
    Json j = Json::object();
    j["dialogue_id"] = r.turn.dialogue_id;
    j["turn"] = r.turn.turn;
    j["text"] = r.text;
    out += detail::dump_line(j);
    out += '\n';
  }
  return out;
}

}  // namespace ukad::generation
