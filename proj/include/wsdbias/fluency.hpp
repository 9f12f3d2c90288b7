#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace wsdbias {

// Interpolated trigram language model with absolute discounting.
// Levels: trigrams over raw counts, bigrams over Kneser-Ney continuation
// counts, unigrams over raw token counts interpolated with a uniform floor
// over the prediction vocabulary (which keeps every probability positive,
// including <unk>). Sentences are padded with two begin symbols and one end
// symbol; the end symbol is scored, the begin symbols are not.
struct NgramModel {
  static constexpr int kUnk = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;

  int order = 3;
  double discount = 0.75;
  int64_t min_count = 1;

  std::vector<std::string> vocab;  // id -> token; 0 <unk>, 1 <s>, 2 </s>
  std::unordered_map<std::string, int> index;

  std::map<std::array<int, 3>, int64_t> trigrams;

  // Aggregates derived from the trigram table (rebuilt on load).
  std::map<std::array<int, 2>, int64_t> ctx2_total;   // (u,v) -> sum_w c3
  std::map<std::array<int, 2>, int64_t> ctx2_types;   // (u,v) -> distinct w
  std::map<std::array<int, 2>, int64_t> cont2;        // (v,w) -> distinct u
  std::map<int, int64_t> cont2_ctx_total;             // v -> sum_w cont2
  std::map<int, int64_t> cont2_ctx_types;             // v -> distinct w
  std::map<int, int64_t> unigram_counts;              // token counts, real tokens
  int64_t unigram_total = 0;
  int64_t unigram_types = 0;

  int token_id(const std::string& token) const;  // unseen tokens map to <unk>
  std::size_t predict_vocab_size() const { return vocab.size() - 1; }  // no <s>

  // p(w | u, v); always positive, sums to 1 over the prediction vocabulary.
  double prob(int u, int v, int w) const;
  double prob(const std::string& u, const std::string& v,
              const std::string& w) const;

  void save(const std::string& path) const;
  static NgramModel load(const std::string& path);

 private:
  double prob_unigram(int w) const;
  double prob_bigram(int v, int w) const;
  void rebuild_aggregates();
  friend NgramModel train_kn_trigram(const std::vector<std::vector<std::string>>&,
                                     double, int64_t);
};

// Throws Error on an empty corpus or a discount outside (0,1).
NgramModel train_kn_trigram(const std::vector<std::vector<std::string>>& corpus,
                            double discount = 0.75, int64_t min_count = 1);

// exp of the negative mean log probability over the scored positions
// (each token plus the end symbol).
double perplexity(const NgramModel& model, const std::vector<std::string>& tokens);

// Total negative log probability of the scored positions (natural log);
// exp of this is the inverse joint sequence probability.
double sequence_neg_log_prob(const NgramModel& model,
                             const std::vector<std::string>& tokens);

}  // namespace wsdbias
