#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "ukad/errors.hpp"

namespace ukad {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << content;
  if (!out) throw DataError(fmt::format("write failed for {}", path.string()));
}

namespace detail {

Json parse_document(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("{}:byte {}", source, e.byte), e.what());
  }
}

void for_each_jsonl_text(
    const std::string& text, const std::string& source,
    const std::function<void(const Json&, const std::string&)>& fn) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = fmt::format("{}:{}", source, line_no);
    Json record;
    try {
      record = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where, e.what());
    }
    if (!record.is_object()) throw ParseError(where, "record is not an object");
    fn(record, where);
  }
}

void for_each_jsonl(
    const std::filesystem::path& path,
    const std::function<void(const Json&, const std::string&)>& fn) {
  for_each_jsonl_text(read_file(path), path.string(), fn);
}

const Json& require(const Json& obj, const char* field,
                    const std::string& where) {
  if (!obj.is_object()) throw ParseError(where, "expected an object");
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw ParseError(where, fmt::format("missing field '{}'", field));
  }
  return *it;
}

std::string require_string(const Json& obj, const char* field,
                           const std::string& where) {
  const Json& v = require(obj, field, where);
  if (!v.is_string()) {
    throw ParseError(where, fmt::format("field '{}' must be a string", field));
  }
  return v.get<std::string>();
}

std::string require_id(const Json& obj, const char* field,
                       const std::string& where) {
  const Json& v = require(obj, field, where);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ParseError(where,
                   fmt::format("field '{}' must be a string or integer", field));
}

int require_int(const Json& obj, const char* field, const std::string& where) {
  const Json& v = require(obj, field, where);
  if (!v.is_number_integer()) {
    throw ParseError(where, fmt::format("field '{}' must be an integer", field));
  }
  return v.get<int>();
}

double require_number(const Json& obj, const char* field,
                      const std::string& where) {
  const Json& v = require(obj, field, where);
  if (!v.is_number()) {
    throw ParseError(where, fmt::format("field '{}' must be a number", field));
  }
  return v.get<double>();
}

bool require_bool(const Json& obj, const char* field, const std::string& where) {
  const Json& v = require(obj, field, where);
  if (!v.is_boolean()) {
    throw ParseError(where, fmt::format("field '{}' must be a boolean", field));
  }
  return v.get<bool>();
}

KnowledgeKey key_from_json(const Json& obj, const std::string& where) {
  KnowledgeKey key;
  key.domain = require_string(obj, "domain", where);
  if (auto it = obj.find("entity_id"); it != obj.end() && !it->is_null()) {
    key.entity_id = require_id(obj, "entity_id", where);
  }
  key.doc_id = require_id(obj, "doc_id", where);
  return key;
}

Json key_to_json(const KnowledgeKey& key) {
  Json j = Json::object();
  j["domain"] = key.domain;
  if (key.entity_id) j["entity_id"] = *key.entity_id;
  j["doc_id"] = key.doc_id;
  return j;
}

std::string dump_line(const Json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace detail
}  // namespace ukad
