#include "ems/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace ems {

namespace {

constexpr const char* kPadToken = "<pad>";
constexpr const char* kUnkToken = "<unk>";

bool looks_like_lang_token(const std::string& t) {
  return t.size() >= 4 && t[0] == '<' && t[1] == '2' && t.back() == '>';
}

bool reserved_token(const std::string& t) {
  return t == kPadToken || t == kUnkToken || looks_like_lang_token(t);
}

}  // namespace

int Vocabulary::lang_id(const std::string& code) const {
  auto it = lang_token_ids_.find(code);
  if (it == lang_token_ids_.end()) throw InvalidInput("unknown language code: " + code);
  return it->second;
}

bool Vocabulary::is_lang_id(int id) const {
  return id >= 2 && id < first_content_id_;
}

std::vector<int> Vocabulary::lang_ids_sorted() const {
  std::vector<int> ids;
  ids.reserve(lang_token_ids_.size());
  for (const auto& [code, id] : lang_token_ids_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void Vocabulary::index_content() {
  token_to_id_.clear();
  content_to_id_.clear();
  max_unit_cps_ = 0;
  for (int id = 0; id < static_cast<int>(id_to_token_.size()); ++id) {
    const std::string& tok = id_to_token_[id];
    if (!token_to_id_.emplace(tok, id).second) {
      throw DataError("duplicate token in vocabulary: " + tok);
    }
    if (id >= first_content_id_) {
      content_to_id_.emplace(tok, id);
      max_unit_cps_ = std::max(max_unit_cps_, utf8_codepoints(tok).size());
    }
  }
}

Vocabulary build_vocab(const ParallelCorpus& corpus, int target_size) {
  // Word frequencies over both sides of every pair, normalized text.
  std::map<std::string, int64_t> counts;
  for (const auto& p : corpus.pairs) {
    for (const auto* text : {&p.src_text, &p.tgt_text}) {
      for (const auto& w : split_words(normalize(*text))) {
        ++counts[w];
        if (utf8_codepoints(w).size() > 1) {
          for (const auto& cp : utf8_codepoints(w)) {
            counts.try_emplace(cp, 0);  // coverage units, ranked by own word count
          }
        }
      }
    }
  }

  int n_special = 2 + static_cast<int>(corpus.language_set.size());
  if (target_size < n_special + 1) {
    throw ConfigError("vocab target_size " + std::to_string(target_size) + " too small; need at least " +
                      std::to_string(n_special + 1));
  }

  Vocabulary v;
  v.id_to_token_.push_back(kPadToken);
  v.id_to_token_.push_back(kUnkToken);
  for (const auto& code : corpus.language_set) {  // std::set: lexicographic
    int id = static_cast<int>(v.id_to_token_.size());
    v.id_to_token_.push_back("<2" + code + ">");
    v.lang_token_ids_[code] = id;
  }
  v.first_content_id_ = static_cast<int>(v.id_to_token_.size());

  std::vector<std::pair<std::string, int64_t>> units(counts.begin(), counts.end());
  std::stable_sort(units.begin(), units.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [tok, cnt] : units) {
    if (static_cast<int>(v.id_to_token_.size()) >= target_size) break;
    if (reserved_token(tok)) continue;
    v.id_to_token_.push_back(tok);
  }
  v.index_content();
  return v;
}

std::vector<int> encode_sentence(const Vocabulary& vocab, const std::string& text, int max_len) {
  if (max_len < 1) throw ConfigError("encode_sentence: max_len must be >= 1");
  std::vector<int> ids;
  for (const auto& word : split_words(text)) {
    if (static_cast<int>(ids.size()) >= max_len) break;
    auto whole = vocab.content_to_id_.find(word);
    if (whole != vocab.content_to_id_.end()) {
      ids.push_back(whole->second);
      continue;
    }
    // Greedy longest match over codepoint spans.
    std::vector<std::string> cps = utf8_codepoints(word);
    size_t pos = 0;
    while (pos < cps.size() && static_cast<int>(ids.size()) < max_len) {
      size_t max_span = std::min(cps.size() - pos, vocab.max_unit_cps_);
      bool matched = false;
      for (size_t span = max_span; span >= 1; --span) {
        std::string candidate;
        for (size_t k = 0; k < span; ++k) candidate += cps[pos + k];
        auto it = vocab.content_to_id_.find(candidate);
        if (it != vocab.content_to_id_.end()) {
          ids.push_back(it->second);
          pos += span;
          matched = true;
          break;
        }
      }
      if (!matched) {
        ids.push_back(Vocabulary::kUnkId);
        ++pos;
      }
    }
  }
  if (static_cast<int>(ids.size()) > max_len) ids.resize(max_len);
  return ids;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary file: " + path);
  out << "EMSVOCAB 1 " << d_vcb() << "\n";
  for (const auto& tok : id_to_token_) out << tok << "\n";
  if (!out) throw DataError("write failed: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty vocabulary file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::istringstream header(line);
  std::string magic;
  int version = 0, size = 0;
  header >> magic >> version >> size;
  if (magic != "EMSVOCAB" || version != 1 || size <= 0) {
    throw DataError("bad vocabulary header: " + line);
  }

  Vocabulary v;
  v.id_to_token_.reserve(size);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    v.id_to_token_.push_back(line);
    if (static_cast<int>(v.id_to_token_.size()) == size) break;
  }
  if (static_cast<int>(v.id_to_token_.size()) != size) {
    throw DataError("vocabulary file truncated: " + path);
  }
  if (v.id_to_token_[0] != kPadToken || v.id_to_token_[1] != kUnkToken) {
    throw DataError("vocabulary must start with " + std::string(kPadToken) + ", " + kUnkToken);
  }
  int id = 2;
  for (; id < size; ++id) {
    const std::string& tok = v.id_to_token_[id];
    if (!looks_like_lang_token(tok)) break;
    v.lang_token_ids_[tok.substr(2, tok.size() - 3)] = id;
  }
  v.first_content_id_ = id;
  v.index_content();
  return v;
}

}  // namespace ems
