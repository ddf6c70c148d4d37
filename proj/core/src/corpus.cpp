#include "ukad/corpus.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>
#include <stdexcept>

#include "json_util.hpp"
#include "ukad/errors.hpp"
#include "ukad/text.hpp"

namespace ukad {

using detail::Json;

std::string KnowledgeKey::to_string() const {
  return fmt::format("{}/{}/{}", domain, entity_id.value_or("*"), doc_id);
}

std::string to_string(const TurnKey& key) {
  return fmt::format("{}#{}", key.dialogue_id, key.turn);
}

// ---------------------------------------------------------------------------
// KnowledgeBase

KnowledgeBase::KnowledgeBase(std::vector<KnowledgeSnippet> snippets,
                             std::map<EntityRef, std::string> entity_names,
                             std::vector<std::string> domains)
    : snippets_(std::move(snippets)), entity_names_(std::move(entity_names)) {
  auto add_domain = [this](const std::string& d) {
    if (by_domain_.find(d) == by_domain_.end()) {
      by_domain_.emplace(d, std::vector<std::size_t>{});
      domains_.push_back(d);
    }
  };
  for (const auto& d : domains) add_domain(d);
  for (const auto& [ref, name] : entity_names_) {
    add_domain(ref.domain);
    by_entity_.try_emplace(ref);
  }

  for (std::size_t i = 0; i < snippets_.size(); ++i) {
    const KnowledgeSnippet& s = snippets_[i];
    const std::string id = s.key.to_string();
    if (s.key.domain.empty() || s.key.doc_id.empty()) {
      throw ValidationError(fmt::format("snippet {}: empty domain or doc_id", id));
    }
    if (text::normalize(s.title).empty()) {
      throw ValidationError(fmt::format("snippet {}: empty title", id));
    }
    if (text::normalize(s.body).empty()) {
      throw ValidationError(fmt::format("snippet {}: empty body", id));
    }
    if (s.key.entity_id.has_value() != s.entity_name.has_value()) {
      throw ValidationError(fmt::format(
          "snippet {}: entity_name must be present iff entity_id is", id));
    }
    if (!by_key_.emplace(s.key, i).second) {
      throw ValidationError(fmt::format("duplicate knowledge key {}", id));
    }
    add_domain(s.key.domain);
    if (s.key.entity_id) {
      EntityRef ref{s.key.domain, *s.key.entity_id};
      auto [it, inserted] = entity_names_.emplace(ref, *s.entity_name);
      if (!inserted && it->second != *s.entity_name) {
        throw ValidationError(fmt::format(
            "entity {}/{} has conflicting names '{}' and '{}'", ref.domain,
            ref.entity_id, it->second, *s.entity_name));
      }
      by_entity_[ref].push_back(i);
    } else {
      by_domain_[s.key.domain].push_back(i);
    }
  }
}

const KnowledgeSnippet* KnowledgeBase::find(const KnowledgeKey& key) const {
  auto it = by_key_.find(key);
  return it == by_key_.end() ? nullptr : &snippets_[it->second];
}

const KnowledgeSnippet& KnowledgeBase::at(const KnowledgeKey& key) const {
  if (const auto* s = find(key)) return *s;
  throw ValidationError(
      fmt::format("knowledge key {} not found", key.to_string()));
}

bool KnowledgeBase::has_domain(const std::string& domain) const {
  return by_domain_.count(domain) > 0;
}

bool KnowledgeBase::has_entity(const std::string& domain,
                               const std::string& entity_id) const {
  return entity_names_.count(EntityRef{domain, entity_id}) > 0;
}

const std::string& KnowledgeBase::entity_name(
    const std::string& domain, const std::string& entity_id) const {
  auto it = entity_names_.find(EntityRef{domain, entity_id});
  if (it == entity_names_.end()) {
    throw ValidationError(
        fmt::format("unknown entity {}/{}", domain, entity_id));
  }
  return it->second;
}

const std::vector<std::size_t>& KnowledgeBase::domain_level(
    const std::string& domain) const {
  auto it = by_domain_.find(domain);
  if (it == by_domain_.end()) {
    throw ValidationError(fmt::format("unknown domain '{}'", domain));
  }
  return it->second;
}

const std::vector<std::size_t>& KnowledgeBase::entity_level(
    const std::string& domain, const std::string& entity_id) const {
  auto it = by_entity_.find(EntityRef{domain, entity_id});
  if (it == by_entity_.end()) {
    throw ValidationError(
        fmt::format("unknown entity {}/{}", domain, entity_id));
  }
  return it->second;
}

std::size_t KnowledgeBase::domain_snippet_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(snippets_.begin(), snippets_.end(),
                    [](const auto& s) { return s.key.is_domain_level(); }));
}

std::size_t KnowledgeBase::entity_snippet_count() const noexcept {
  return snippets_.size() - domain_snippet_count();
}

// ---------------------------------------------------------------------------
// Dialogue

const Turn& Dialogue::turn(int t) const {
  if (t < 1 || static_cast<std::size_t>(t) > turns.size()) {
    throw std::out_of_range(fmt::format("dialogue {} has no turn {} (size {})",
                                        dialogue_id, t, turns.size()));
  }
  return turns[static_cast<std::size_t>(t - 1)];
}

const TurnLabel* Dialogue::label_for(int t) const {
  if (!labels) return nullptr;
  for (const auto& l : *labels) {
    if (l.turn_index == t) return &l;
  }
  return nullptr;
}

CorpusStats& CorpusStats::operator+=(const CorpusStats& o) {
  n_dialogues += o.n_dialogues;
  n_augmented_turns += o.n_augmented_turns;
  n_utterances += o.n_utterances;
  n_domain_snippets += o.n_domain_snippets;
  n_entity_snippets += o.n_entity_snippets;
  n_entities += o.n_entities;
  return *this;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

KnowledgeSnippet parse_doc(const Json& doc, const std::string& where,
                           const std::string& domain,
                           const std::optional<std::string>& entity_id,
                           const std::optional<std::string>& entity_name) {
  KnowledgeSnippet s;
  s.key.domain = domain;
  s.key.entity_id = entity_id;
  s.key.doc_id = detail::require_id(doc, "doc_id", where);
  s.entity_name = entity_name;
  s.title = detail::require_string(doc, "title", where);
  s.body = detail::require_string(doc, "body", where);
  return s;
}

void rethrow_with_location(const ValidationError& e, const std::string& where) {
  if (dynamic_cast<const ParseError*>(&e)) throw;
  throw ParseError(where, e.what());
}

}  // namespace

KnowledgeBase parse_knowledge_base(const std::string& json_text,
                                   const std::string& source) {
  const Json root = detail::parse_document(json_text, source);
  if (!root.is_object()) {
    throw ParseError(source + ":/", "knowledge file must be a JSON object");
  }
  std::vector<KnowledgeSnippet> snippets;
  std::vector<std::string> domains;
  std::map<EntityRef, std::string> names;
  std::set<KnowledgeKey> seen;

  for (const auto& [domain, body] : root.items()) {
    const std::string dwhere = fmt::format("{}:/{}", source, domain);
    if (!body.is_object()) throw ParseError(dwhere, "domain must be an object");
    domains.push_back(domain);

    auto check = [&](const KnowledgeSnippet& s, const std::string& where) {
      if (!seen.insert(s.key).second) {
        throw ParseError(where, fmt::format("duplicate knowledge key {}",
                                            s.key.to_string()));
      }
      if (text::normalize(s.title).empty()) {
        throw ParseError(where, "empty title");
      }
      if (text::normalize(s.body).empty()) throw ParseError(where, "empty body");
    };

    if (auto it = body.find("faqs"); it != body.end()) {
      if (!it->is_array()) throw ParseError(dwhere + "/faqs", "must be a list");
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string where = fmt::format("{}/faqs/{}", dwhere, i);
        snippets.push_back(
            parse_doc((*it)[i], where, domain, std::nullopt, std::nullopt));
        check(snippets.back(), where);
      }
    }
    if (auto it = body.find("entities"); it != body.end()) {
      if (!it->is_object()) {
        throw ParseError(dwhere + "/entities", "must be an object");
      }
      for (const auto& [entity_id, entity] : it->items()) {
        const std::string ewhere =
            fmt::format("{}/entities/{}", dwhere, entity_id);
        const std::string name = detail::require_string(entity, "name", ewhere);
        if (text::normalize(name).empty()) {
          throw ParseError(ewhere, "empty entity name");
        }
        names.emplace(EntityRef{domain, entity_id}, name);
        const Json& docs = detail::require(entity, "docs", ewhere);
        if (!docs.is_array()) throw ParseError(ewhere + "/docs", "must be a list");
        for (std::size_t i = 0; i < docs.size(); ++i) {
          const std::string where = fmt::format("{}/docs/{}", ewhere, i);
          snippets.push_back(parse_doc(docs[i], where, domain, entity_id, name));
          check(snippets.back(), where);
        }
      }
    }
  }
  try {
    return KnowledgeBase(std::move(snippets), std::move(names),
                         std::move(domains));
  } catch (const ValidationError& e) {
    rethrow_with_location(e, source);
    throw;
  }
}

KnowledgeBase load_knowledge_base(const std::filesystem::path& path) {
  return parse_knowledge_base(read_file(path), path.string());
}

std::vector<Dialogue> parse_dialogues(
    const std::string& logs_json, const std::optional<std::string>& labels_json,
    const KnowledgeBase* kb, const std::string& logs_source,
    const std::string& labels_source) {
  const Json logs = detail::parse_document(logs_json, logs_source);
  if (!logs.is_array()) {
    throw ParseError(logs_source + ":/", "logs file must be a JSON list");
  }
  std::vector<Dialogue> dialogues;
  std::map<std::string, std::size_t> by_id;
  for (std::size_t d = 0; d < logs.size(); ++d) {
    const std::string where = fmt::format("{}:/{}", logs_source, d);
    Dialogue dialogue;
    dialogue.dialogue_id = detail::require_id(logs[d], "dialogue_id", where);
    if (!by_id.emplace(dialogue.dialogue_id, d).second) {
      throw ParseError(where, fmt::format("duplicate dialogue_id '{}'",
                                          dialogue.dialogue_id));
    }
    const Json& turns = detail::require(logs[d], "turns", where);
    if (!turns.is_array()) throw ParseError(where + "/turns", "must be a list");
    for (std::size_t t = 0; t < turns.size(); ++t) {
      const std::string twhere = fmt::format("{}/turns/{}", where, t);
      Turn turn;
      const std::string speaker = detail::require_string(turns[t], "speaker", twhere);
      if (speaker == "U") {
        turn.speaker = Speaker::User;
      } else if (speaker == "S") {
        turn.speaker = Speaker::Agent;
      } else {
        throw ParseError(twhere, fmt::format("unknown speaker '{}'", speaker));
      }
      turn.text = detail::require_string(turns[t], "text", twhere);
      if (text::normalize(turn.text).empty()) {
        throw ParseError(twhere, "empty turn text");
      }
      turn.index = static_cast<int>(t + 1);
      dialogue.turns.push_back(std::move(turn));
    }
    dialogues.push_back(std::move(dialogue));
  }

  if (!labels_json) return dialogues;

  const Json labels = detail::parse_document(*labels_json, labels_source);
  if (!labels.is_array()) {
    throw ParseError(labels_source + ":/", "labels file must be a JSON list");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string where = fmt::format("{}:/{}", labels_source, i);
    const std::string id = detail::require_id(labels[i], "dialogue_id", where);
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw ParseError(where, fmt::format("dangling label: no dialogue '{}'", id));
    }
    Dialogue& dialogue = dialogues[it->second];
    if (dialogue.labels) {
      throw ParseError(where, fmt::format("duplicate labels for dialogue '{}'", id));
    }
    const Json& entries = detail::require(labels[i], "labels", where);
    if (!entries.is_array()) throw ParseError(where + "/labels", "must be a list");

    std::vector<TurnLabel> parsed;
    std::set<int> seen_turns;
    for (std::size_t j = 0; j < entries.size(); ++j) {
      const std::string lwhere = fmt::format("{}/labels/{}", where, j);
      const Json& e = entries[j];
      TurnLabel label;
      label.turn_index = detail::require_int(e, "turn", lwhere);
      label.target = detail::require_bool(e, "target", lwhere);
      if (label.turn_index < 1 ||
          static_cast<std::size_t>(label.turn_index) > dialogue.turns.size()) {
        throw ParseError(lwhere, fmt::format(
                                     "dangling label: turn {} outside dialogue "
                                     "'{}' of {} turns",
                                     label.turn_index, id, dialogue.turns.size()));
      }
      if (dialogue.turn(label.turn_index).speaker != Speaker::User) {
        throw ParseError(lwhere, fmt::format("label on non-user turn {}",
                                             label.turn_index));
      }
      if (!seen_turns.insert(label.turn_index).second) {
        throw ParseError(lwhere,
                         fmt::format("duplicate label for turn {}", label.turn_index));
      }
      if (auto k = e.find("knowledge"); k != e.end() && !k->is_null()) {
        if (!k->is_array()) throw ParseError(lwhere + "/knowledge", "must be a list");
        for (std::size_t r = 0; r < k->size(); ++r) {
          const std::string rwhere = fmt::format("{}/knowledge/{}", lwhere, r);
          KnowledgeKey key = detail::key_from_json((*k)[r], rwhere);
          if (kb && !kb->contains(key)) {
            throw ParseError(rwhere, fmt::format("unresolvable knowledge_ref {}",
                                                 key.to_string()));
          }
          label.knowledge.push_back(std::move(key));
        }
      }
      if (label.target && label.knowledge.empty()) {
        throw ParseError(lwhere, "target turn without knowledge references");
      }
      if (auto r = e.find("response"); r != e.end() && !r->is_null()) {
        label.response = detail::require_string(e, "response", lwhere);
      }
      parsed.push_back(std::move(label));
    }
    std::sort(parsed.begin(), parsed.end(),
              [](const auto& a, const auto& b) { return a.turn_index < b.turn_index; });
    dialogue.labels = std::move(parsed);
  }
  return dialogues;
}

std::vector<Dialogue> load_dialogues(
    const std::filesystem::path& logs_path,
    const std::optional<std::filesystem::path>& labels_path,
    const KnowledgeBase* kb) {
  std::optional<std::string> labels;
  if (labels_path) labels = read_file(*labels_path);
  return parse_dialogues(read_file(logs_path), labels, kb, logs_path.string(),
                         labels_path ? labels_path->string() : "<labels>");
}

// ---------------------------------------------------------------------------
// Writing

std::string knowledge_base_to_json(const KnowledgeBase& kb) {
  Json root = Json::object();
  for (const auto& domain : kb.domains()) {
    Json faqs = Json::array();
    for (std::size_t i : kb.domain_level(domain)) {
      const auto& s = kb.snippets()[i];
      faqs.push_back({{"doc_id", s.key.doc_id}, {"title", s.title}, {"body", s.body}});
    }
    Json entities = Json::object();
    // Entities in the order their first snippet appears, then doc-less ones.
    std::vector<EntityRef> order;
    for (const auto& s : kb.snippets()) {
      if (s.key.domain != domain || !s.key.entity_id) continue;
      EntityRef ref{domain, *s.key.entity_id};
      if (std::find(order.begin(), order.end(), ref) == order.end()) {
        order.push_back(ref);
      }
    }
    for (const auto& [ref, name] : kb.entities()) {
      if (ref.domain == domain &&
          std::find(order.begin(), order.end(), ref) == order.end()) {
        order.push_back(ref);
      }
    }
    for (const auto& ref : order) {
      Json docs = Json::array();
      for (std::size_t i : kb.entity_level(ref.domain, ref.entity_id)) {
        const auto& s = kb.snippets()[i];
        docs.push_back(
            {{"doc_id", s.key.doc_id}, {"title", s.title}, {"body", s.body}});
      }
      entities[ref.entity_id] = {
          {"name", kb.entity_name(ref.domain, ref.entity_id)}, {"docs", docs}};
    }
    root[domain] = {{"faqs", faqs}, {"entities", entities}};
  }
  return root.dump(2) + "\n";
}

std::string logs_to_json(std::span<const Dialogue> dialogues) {
  Json root = Json::array();
  for (const auto& d : dialogues) {
    Json turns = Json::array();
    for (const auto& t : d.turns) {
      turns.push_back({{"speaker", t.speaker == Speaker::User ? "U" : "S"},
                       {"text", t.text}});
    }
    root.push_back({{"dialogue_id", d.dialogue_id}, {"turns", turns}});
  }
  return root.dump(2) + "\n";
}

std::string labels_to_json(std::span<const Dialogue> dialogues) {
  Json root = Json::array();
  for (const auto& d : dialogues) {
    if (!d.labels) continue;
    Json entries = Json::array();
    for (const auto& l : *d.labels) {
      Json e = {{"turn", l.turn_index}, {"target", l.target}};
      Json refs = Json::array();
      for (const auto& k : l.knowledge) refs.push_back(detail::key_to_json(k));
      e["knowledge"] = refs;
      if (l.response) e["response"] = *l.response;
      entries.push_back(std::move(e));
    }
    root.push_back({{"dialogue_id", d.dialogue_id}, {"labels", entries}});
  }
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

DialogueContext build_context(const Dialogue& dialogue, int t, int window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  const Turn& current = dialogue.turn(t);
  if (current.speaker != Speaker::User) {
    throw std::invalid_argument(fmt::format(
        "turn {} of dialogue {} is an agent turn", t, dialogue.dialogue_id));
  }
  const int first = std::max(1, t - window + 1);
  DialogueContext ctx;
  ctx.window = window;
  ctx.turns.assign(dialogue.turns.begin() + (first - 1),
                   dialogue.turns.begin() + t);
  return ctx;
}

CorpusStats corpus_stats(const KnowledgeBase& kb,
                         std::span<const Dialogue> dialogues) {
  CorpusStats s;
  s.n_dialogues = dialogues.size();
  for (const auto& d : dialogues) {
    s.n_utterances += d.turns.size();
    if (!d.labels) continue;
    for (const auto& l : *d.labels) s.n_augmented_turns += l.target ? 1 : 0;
  }
  s.n_domain_snippets = kb.domain_snippet_count();
  s.n_entity_snippets = kb.entity_snippet_count();
  s.n_entities = kb.entities().size();
  return s;
}

}  // namespace ukad
