#pragma once

#include <set>
#include <string>
#include <vector>

#include "ems/common.hpp"

namespace ems {

struct SentencePair {
  std::string src_lang;
  std::string tgt_lang;
  std::string src_text;  // raw; normalization happens at encode time
  std::string tgt_text;
};

struct ParallelCorpus {
  std::vector<SentencePair> pairs;
  std::set<std::string> language_set;
};

/// Lowercase (ASCII + Latin-1 + Latin Extended-A), collapse whitespace runs
/// to single spaces, strip leading/trailing whitespace.
std::string normalize(const std::string& text);

/// Split normalized text on single spaces. Empty input -> empty vector.
std::vector<std::string> split_words(const std::string& normalized);

/// Split a UTF-8 string into codepoint substrings. Invalid bytes are kept
/// as single-byte units.
std::vector<std::string> utf8_codepoints(const std::string& s);

/// Load a 4-column TSV (src_lang, tgt_lang, src_text, tgt_text).
/// Lines starting with '#' and blank lines are skipped.
/// Throws DataError with a line number on malformed lines, and on files
/// that yield no usable pairs.
ParallelCorpus load_parallel_tsv(const std::string& path);

}  // namespace ems
