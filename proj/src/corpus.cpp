#include "ems/corpus.hpp"

#include <fstream>
#include <sstream>

namespace ems {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Lowercase one codepoint. Covers ASCII, Latin-1 supplement and
// Latin Extended-A; everything else passes through unchanged.
uint32_t lower_codepoint(uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
  if (cp >= 0x0100 && cp <= 0x0177) {
    if (cp % 2 == 0) return cp + 1;
    return cp;
  }
  if (cp == 0x0178) return 0x00FF;              // Y with diaeresis
  if (cp == 0x0179 || cp == 0x017B || cp == 0x017D) return cp + 1;
  if (cp == 0x0130) return 'i';                 // dotted capital I, simplified
  return cp;
}

void append_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decode one UTF-8 codepoint at position i; advances i. Invalid sequences
// are consumed one byte at a time and returned as-is.
uint32_t next_codepoint(const std::string& s, size_t& i) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  size_t len = 1;
  uint32_t cp = c;
  if ((c & 0x80) == 0) {
    len = 1;
    cp = c;
  } else if ((c & 0xE0) == 0xC0) {
    len = 2;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    len = 3;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    len = 4;
    cp = c & 0x07;
  } else {
    ++i;
    return c;
  }
  if (i + len > s.size()) {
    ++i;
    return c;
  }
  for (size_t k = 1; k < len; ++k) {
    unsigned char cc = static_cast<unsigned char>(s[i + k]);
    if ((cc & 0xC0) != 0x80) {
      ++i;
      return c;
    }
    cp = (cp << 6) | (cc & 0x3F);
  }
  i += len;
  return cp;
}

}  // namespace

std::string normalize(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      pending_space = !out.empty();
      ++i;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    uint32_t cp = next_codepoint(text, i);
    append_utf8(out, lower_codepoint(cp));
  }
  return out;
}

std::vector<std::string> split_words(const std::string& normalized) {
  std::vector<std::string> words;
  size_t start = 0;
  while (start < normalized.size()) {
    size_t end = normalized.find(' ', start);
    if (end == std::string::npos) end = normalized.size();
    if (end > start) words.push_back(normalized.substr(start, end - start));
    start = end + 1;
  }
  return words;
}

std::vector<std::string> utf8_codepoints(const std::string& s) {
  std::vector<std::string> cps;
  size_t i = 0;
  while (i < s.size()) {
    size_t begin = i;
    next_codepoint(s, i);
    cps.push_back(s.substr(begin, i - begin));
  }
  return cps;
}

ParallelCorpus load_parallel_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);

  ParallelCorpus corpus;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (fields.size() != 4) {
      throw DataError("line " + std::to_string(line_no) + ": expected 4 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    SentencePair p{fields[0], fields[1], fields[2], fields[3]};
    if (p.src_lang.empty() || p.tgt_lang.empty()) {
      throw DataError("line " + std::to_string(line_no) + ": empty language code");
    }
    if (p.src_lang == p.tgt_lang) {
      throw DataError("line " + std::to_string(line_no) + ": src_lang equals tgt_lang (" + p.src_lang + ")");
    }
    if (normalize(p.src_text).empty() || normalize(p.tgt_text).empty()) {
      throw DataError("line " + std::to_string(line_no) + ": empty sentence after normalization");
    }
    corpus.language_set.insert(p.src_lang);
    corpus.language_set.insert(p.tgt_lang);
    corpus.pairs.push_back(std::move(p));
  }
  if (corpus.pairs.empty()) throw DataError("empty corpus: " + path);
  return corpus;
}

}  // namespace ems
