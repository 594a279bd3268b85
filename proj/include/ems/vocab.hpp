#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "ems/common.hpp"
#include "ems/corpus.hpp"

namespace ems {

// Token inventory: [<pad>, <unk>, one <2xx> per language, content units].
// Content units are corpus words plus single codepoints; encoding uses
// greedy longest-match so unseen words decompose into known units.
class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;

  int d_vcb() const { return static_cast<int>(id_to_token_.size()); }
  const std::vector<std::string>& id_to_token() const { return id_to_token_; }
  const std::unordered_map<std::string, int>& token_to_id() const { return token_to_id_; }
  const std::unordered_map<std::string, int>& lang_token_ids() const { return lang_token_ids_; }

  /// Vocabulary id of `<2code>`; throws InvalidInput for unknown languages.
  int lang_id(const std::string& code) const;

  bool is_lang_id(int id) const;
  bool is_content_id(int id) const { return id >= first_content_id_; }

  /// Ids of all registered language tokens, ascending.
  std::vector<int> lang_ids_sorted() const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  friend Vocabulary build_vocab(const ParallelCorpus& corpus, int target_size);
  friend std::vector<int> encode_sentence(const Vocabulary& vocab, const std::string& text, int max_len);

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
  std::unordered_map<std::string, int> lang_token_ids_;  // code -> id
  std::unordered_map<std::string, int> content_to_id_;
  int first_content_id_ = 0;
  size_t max_unit_cps_ = 0;

  void index_content();
};

/// Build from normalized corpus text. Unit ranking is whole-word frequency
/// descending, ties broken lexicographically; deterministic.
Vocabulary build_vocab(const ParallelCorpus& corpus, int target_size);

/// Map normalized text to content-unit ids, greedy longest-match per word,
/// unk fallback per codepoint, truncated to max_len. Never emits pad or
/// language-token ids.
std::vector<int> encode_sentence(const Vocabulary& vocab, const std::string& text, int max_len = 120);

}  // namespace ems
