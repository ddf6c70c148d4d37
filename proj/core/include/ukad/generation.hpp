#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ukad/corpus.hpp"

namespace ukad::generation {

enum class ResponseSource { Extracted, External, Gold };

struct GeneratedResponse {
  TurnKey turn;
  std::string text;
  ResponseSource source = ResponseSource::Extracted;

  friend bool operator==(const GeneratedResponse&, const GeneratedResponse&) = default;
};

// Paragraphs are separated by one or more blank (whitespace-only) lines.
// Each paragraph is returned trimmed; empty paragraphs are dropped.
std::vector<std::string> split_paragraphs(std::string_view body);

// Answer-extraction baseline: pick one snippet uniformly (seeded) and return
// its first paragraph, or the whole body when it has a single paragraph.
// The draw uses the per-turn stream of `seed`.
GeneratedResponse extract_answer(std::span<const KnowledgeSnippet> snippets,
                                 std::uint64_t seed, TurnKey turn = {});

// JSON lines {dialogue_id, turn, text}. When `required` is given, every
// listed turn must be present.
std::vector<GeneratedResponse> ingest_external_responses(
    const std::filesystem::path& path,
    std::optional<std::span<const TurnKey>> required = std::nullopt);
std::vector<GeneratedResponse> parse_external_responses(
    const std::string& text, const std::string& source,
    std::optional<std::span<const TurnKey>> required = std::nullopt);

std::string responses_to_jsonl(std::span<const GeneratedResponse> responses);

}  // namespace ukad::generation
