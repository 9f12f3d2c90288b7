#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "wsdbias/corpus.hpp"

namespace wsdbias {

// Lemma-level one-directional (source -> target) lexical translation model.
// Each source position picks a target position j (or NULL) with posterior
// p(j|i) proportional to d(i,j) * t(tgt_j | src_i), where
// d(i,j) = exp(-tension * |i/m - j/n|) and NULL carries a fixed prior
// weight. Rows t(.|src) are renormalized every M-step.
struct AlignmentModel {
  double tension = 4.0;
  double null_prior = 0.08;
  int iterations = 0;

  std::vector<std::string> src_vocab;  // id -> lemma
  std::vector<std::string> tgt_vocab;  // id -> lemma; id 0 is the NULL word
  std::unordered_map<std::string, int> src_index;
  std::unordered_map<std::string, int> tgt_index;

  // probs[src_id]: tgt_id -> t(tgt | src); includes the NULL column.
  std::vector<std::map<int, double>> probs;

  std::vector<double> log_likelihood;  // one entry per EM iteration

  static constexpr int kNullId = 0;
  static constexpr const char* kNullLemma = "<null>";

  double prob(int src_id, int tgt_id) const;
  int src_id(const std::string& lemma) const;  // -1 if unknown
  int tgt_id(const std::string& lemma) const;

  void save(const std::string& path) const;
  static AlignmentModel load(const std::string& path);
};

struct AlignmentLinks {
  std::map<int, int> links;  // source position -> target position (partial)
};

struct AlignerOptions {
  int iterations = 5;
  double tension = 4.0;
  double null_prior = 0.08;
  int threads = 1;  // E-step shards; counts merge in shard order
};

// EM over lemmas. Throws Error on an empty corpus or iterations < 1.
AlignmentModel train_alignment_model(const std::vector<ParallelPair>& pairs,
                                     const AlignerOptions& options = {});

// Decodes argmax links. Out-of-vocabulary source lemmas stay unaligned;
// NULL must win strictly to leave a known lemma unaligned; ties between
// target positions break toward the smaller index.
AlignmentLinks align_pair(const AlignmentModel& model, const ParallelPair& pair);

AlignmentLinks align_tokens(const AlignmentModel& model,
                            const std::vector<std::string>& src_lemmas,
                            const std::vector<std::string>& tgt_lemmas);

// Pharaoh format: one line per pair of space-separated "i-j" links.
void write_alignments(const std::string& path,
                      const std::vector<AlignmentLinks>& all);
std::vector<AlignmentLinks> read_alignments(const std::string& path);

}  // namespace wsdbias
