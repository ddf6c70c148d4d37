#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ukad {

// Address of one knowledge snippet. Domain-level snippets have no entity_id.
// Ordering is lexicographic on (domain, entity_id, doc_id) with domain-level
// keys sorting before entity-level keys of the same domain; rankings use this
// order to break score ties.
struct KnowledgeKey {
  std::string domain;
  std::optional<std::string> entity_id;
  std::string doc_id;

  bool is_domain_level() const noexcept { return !entity_id.has_value(); }
  std::string to_string() const;

  friend bool operator==(const KnowledgeKey&, const KnowledgeKey&) = default;
  friend auto operator<=>(const KnowledgeKey&, const KnowledgeKey&) = default;
};

struct KnowledgeSnippet {
  KnowledgeKey key;
  std::optional<std::string> entity_name;  // present iff key.entity_id is
  std::string title;                       // FAQ question
  std::string body;                        // FAQ answer

  friend bool operator==(const KnowledgeSnippet&,
                         const KnowledgeSnippet&) = default;
};

struct EntityRef {
  std::string domain;
  std::string entity_id;

  friend bool operator==(const EntityRef&, const EntityRef&) = default;
  friend auto operator<=>(const EntityRef&, const EntityRef&) = default;
};

// Immutable collection of snippets with per-domain and per-entity indexes.
// Entities and domains are registered even when they own no snippets.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  // Validates invariants: unique keys, non-blank title/body, entity_name
  // present exactly for entity-level snippets and consistent per entity.
  // `entity_names` lists entities (possibly without docs) to register;
  // `domains` lists domains (possibly empty) to register.
  explicit KnowledgeBase(std::vector<KnowledgeSnippet> snippets,
                         std::map<EntityRef, std::string> entity_names = {},
                         std::vector<std::string> domains = {});

  std::size_t size() const noexcept { return snippets_.size(); }
  bool empty() const noexcept { return snippets_.empty(); }
  std::span<const KnowledgeSnippet> snippets() const noexcept {
    return snippets_;
  }

  const KnowledgeSnippet* find(const KnowledgeKey& key) const;
  // Throws ValidationError when the key does not resolve.
  const KnowledgeSnippet& at(const KnowledgeKey& key) const;
  bool contains(const KnowledgeKey& key) const { return find(key) != nullptr; }

  bool has_domain(const std::string& domain) const;
  bool has_entity(const std::string& domain,
                  const std::string& entity_id) const;
  const std::string& entity_name(const std::string& domain,
                                 const std::string& entity_id) const;

  // Snippet positions in file order.
  const std::vector<std::size_t>& domain_level(const std::string& domain) const;
  const std::vector<std::size_t>& entity_level(
      const std::string& domain, const std::string& entity_id) const;

  const std::vector<std::string>& domains() const noexcept { return domains_; }
  const std::map<EntityRef, std::string>& entities() const noexcept {
    return entity_names_;
  }

  std::size_t domain_snippet_count() const noexcept;
  std::size_t entity_snippet_count() const noexcept;

  friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
    return a.snippets_ == b.snippets_ && a.domains_ == b.domains_ &&
           a.entity_names_ == b.entity_names_;
  }

 private:
  std::vector<KnowledgeSnippet> snippets_;
  std::map<KnowledgeKey, std::size_t> by_key_;
  std::vector<std::string> domains_;  // first-seen order
  std::map<std::string, std::vector<std::size_t>> by_domain_;
  std::map<EntityRef, std::vector<std::size_t>> by_entity_;
  std::map<EntityRef, std::string> entity_names_;
};

enum class Speaker { User, Agent };

struct Turn {
  Speaker speaker = Speaker::User;
  std::string text;
  int index = 0;  // 1-based position t within the dialogue

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct TurnLabel {
  int turn_index = 0;
  bool target = false;  // knowledge-seeking turn
  std::vector<KnowledgeKey> knowledge;
  std::optional<std::string> response;

  friend bool operator==(const TurnLabel&, const TurnLabel&) = default;
};

struct Dialogue {
  std::string dialogue_id;
  std::vector<Turn> turns;
  std::optional<std::vector<TurnLabel>> labels;

  const Turn& turn(int t) const;  // 1-based; throws std::out_of_range
  const TurnLabel* label_for(int t) const;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

// Identifies one turn across the corpus.
struct TurnKey {
  std::string dialogue_id;
  int turn = 0;

  friend bool operator==(const TurnKey&, const TurnKey&) = default;
  friend auto operator<=>(const TurnKey&, const TurnKey&) = default;
};

std::string to_string(const TurnKey& key);

struct DialogueContext {
  std::vector<Turn> turns;  // oldest first; last turn is the current user turn
  int window = 0;
};

inline constexpr int kDefaultWindow = 5;

struct CorpusStats {
  std::size_t n_dialogues = 0;
  std::size_t n_augmented_turns = 0;
  std::size_t n_utterances = 0;
  std::size_t n_domain_snippets = 0;
  std::size_t n_entity_snippets = 0;
  std::size_t n_entities = 0;

  CorpusStats& operator+=(const CorpusStats& other);
  friend CorpusStats operator+(CorpusStats a, const CorpusStats& b) {
    return a += b;
  }
  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

KnowledgeBase load_knowledge_base(const std::filesystem::path& path);
KnowledgeBase parse_knowledge_base(const std::string& json_text,
                                   const std::string& source = "<memory>");

// Labels, when given, are attached by dialogue_id. Passing `kb` additionally
// checks that every knowledge reference resolves.
std::vector<Dialogue> load_dialogues(
    const std::filesystem::path& logs_path,
    const std::optional<std::filesystem::path>& labels_path = std::nullopt,
    const KnowledgeBase* kb = nullptr);
std::vector<Dialogue> parse_dialogues(
    const std::string& logs_json, const std::optional<std::string>& labels_json,
    const KnowledgeBase* kb = nullptr, const std::string& logs_source = "<logs>",
    const std::string& labels_source = "<labels>");

std::string knowledge_base_to_json(const KnowledgeBase& kb);
std::string logs_to_json(std::span<const Dialogue> dialogues);
std::string labels_to_json(std::span<const Dialogue> dialogues);

// Last min(w, t) turns ending at user turn t.
DialogueContext build_context(const Dialogue& dialogue, int t,
                              int window = kDefaultWindow);

CorpusStats corpus_stats(const KnowledgeBase& kb,
                         std::span<const Dialogue> dialogues);

// Reads a whole file; throws DataError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace ukad
