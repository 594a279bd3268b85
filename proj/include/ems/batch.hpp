#pragma once

#include <vector>

#include "ems/common.hpp"
#include "ems/corpus.hpp"
#include "ems/vocab.hpp"

namespace ems {

// Padded token-id matrices for both sides of a batch of sentence pairs.
// Rows are left-aligned; pad id fills the tail; masks mark real tokens.
struct Batch {
  MatI src_ids;
  MatI tgt_ids;
  MatI src_mask;
  MatI tgt_mask;
  std::vector<int> src_lang_ids;  // vocab id of <2src_lang> per row
  std::vector<int> tgt_lang_ids;
  int size = 0;

  /// True (unpadded) token ids of one row.
  std::vector<int> row_ids(bool src_side, int row) const;
};

/// Shuffle pairs with a deterministic PRNG and cut into batches of
/// batch_size (last one may be smaller). batch_size must be >= 2 because
/// the contrastive objective needs in-batch negatives.
std::vector<Batch> make_batches(const ParallelCorpus& corpus, const Vocabulary& vocab, int batch_size,
                                uint64_t seed, int max_len = 120);

}  // namespace ems
