#include "ems/batch.hpp"

#include <numeric>

namespace ems {

std::vector<int> Batch::row_ids(bool src_side, int row) const {
  const MatI& ids = src_side ? src_ids : tgt_ids;
  const MatI& mask = src_side ? src_mask : tgt_mask;
  std::vector<int> out;
  for (int j = 0; j < ids.cols(); ++j) {
    if (mask(row, j) == 0) break;
    out.push_back(ids(row, j));
  }
  return out;
}

namespace {

struct EncodedPair {
  std::vector<int> src;
  std::vector<int> tgt;
  int src_lang_id;
  int tgt_lang_id;
};

void fill_side(MatI& ids, MatI& mask, const std::vector<const std::vector<int>*>& rows) {
  int max_len = 0;
  for (const auto* r : rows) max_len = std::max(max_len, static_cast<int>(r->size()));
  int n = static_cast<int>(rows.size());
  ids = MatI::Constant(n, max_len, Vocabulary::kPadId);
  mask = MatI::Zero(n, max_len);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < static_cast<int>(rows[i]->size()); ++j) {
      ids(i, j) = (*rows[i])[j];
      mask(i, j) = 1;
    }
  }
}

}  // namespace

std::vector<Batch> make_batches(const ParallelCorpus& corpus, const Vocabulary& vocab, int batch_size,
                                uint64_t seed, int max_len) {
  if (corpus.pairs.empty()) throw InvalidInput("make_batches: empty corpus");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2 (in-batch negatives need at least 2 pairs)");

  std::vector<EncodedPair> encoded;
  encoded.reserve(corpus.pairs.size());
  for (const auto& p : corpus.pairs) {
    EncodedPair e;
    e.src = encode_sentence(vocab, normalize(p.src_text), max_len);
    e.tgt = encode_sentence(vocab, normalize(p.tgt_text), max_len);
    e.src_lang_id = vocab.lang_id(p.src_lang);
    e.tgt_lang_id = vocab.lang_id(p.tgt_lang);
    if (e.src.empty() || e.tgt.empty()) throw DataError("make_batches: pair encodes to empty id list");
    encoded.push_back(std::move(e));
  }

  std::vector<size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<Batch> batches;
  for (size_t start = 0; start < order.size(); start += batch_size) {
    size_t end = std::min(order.size(), start + batch_size);
    Batch b;
    b.size = static_cast<int>(end - start);
    std::vector<const std::vector<int>*> src_rows, tgt_rows;
    for (size_t k = start; k < end; ++k) {
      const EncodedPair& e = encoded[order[k]];
      src_rows.push_back(&e.src);
      tgt_rows.push_back(&e.tgt);
      b.src_lang_ids.push_back(e.src_lang_id);
      b.tgt_lang_ids.push_back(e.tgt_lang_id);
    }
    fill_side(b.src_ids, b.src_mask, src_rows);
    fill_side(b.tgt_ids, b.tgt_mask, tgt_rows);
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace ems
