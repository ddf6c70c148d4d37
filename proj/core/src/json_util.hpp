#pragma once

// Internal JSON helpers shared by the loaders. Not installed.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <string>

#include "ukad/corpus.hpp"

namespace ukad::detail {

using Json = nlohmann::ordered_json;

// Parses a whole JSON document; failures become ParseError at "source".
Json parse_document(const std::string& text, const std::string& source);

// Invokes `fn(record, where)` for each non-blank line of a JSON-lines file.
// `where` is "path:line".
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, const std::string&)>& fn);
void for_each_jsonl_text(
    const std::string& text, const std::string& source,
    const std::function<void(const Json&, const std::string&)>& fn);

const Json& require(const Json& obj, const char* field, const std::string& where);
std::string require_string(const Json& obj, const char* field,
                           const std::string& where);
// Accepts a JSON string or integer and returns its string form.
std::string require_id(const Json& obj, const char* field,
                       const std::string& where);
int require_int(const Json& obj, const char* field, const std::string& where);
double require_number(const Json& obj, const char* field,
                      const std::string& where);
bool require_bool(const Json& obj, const char* field, const std::string& where);

KnowledgeKey key_from_json(const Json& obj, const std::string& where);
Json key_to_json(const KnowledgeKey& key);

// Compact single-line dump used for every JSON-lines writer.
std::string dump_line(const Json& j);

}  // namespace ukad::detail
