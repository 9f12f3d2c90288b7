#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wsdbias {

enum class Pos { Noun, Adj, Other };

Pos pos_from_string(std::string_view s);
std::string_view pos_to_string(Pos pos);

struct LemmaEntry {
  std::string lemma;
  Pos pos = Pos::Other;
};

// Surface form -> (lemma, coarse POS). Unknown surfaces fall back to the
// lowercased surface with POS Other. Keys and lemmas are stored lowercase.
class LemmaTable {
 public:
  void add(std::string_view surface, std::string_view lemma, Pos pos);

  // Lowercases the token, then looks it up.
  LemmaEntry lookup(std::string_view token) const;

  // POS of a lemma as recorded by the table entries mapping to it;
  // Other for lemmas the table never produces.
  Pos pos_of_lemma(std::string_view lemma) const;

  std::size_t size() const { return entries_.size(); }

  // TSV with columns: surface, lemma, pos (NOUN|ADJ|OTHER).
  static LemmaTable load(const std::string& path);

 private:
  std::unordered_map<std::string, LemmaEntry> entries_;
  std::unordered_map<std::string, Pos> lemma_pos_;
};

struct ParallelPair {
  int64_t id = 0;
  std::vector<std::string> src_tokens;
  std::vector<std::string> tgt_tokens;
  std::vector<std::string> src_lemmas;
  std::vector<std::string> tgt_lemmas;
};

// Splits on Unicode whitespace, then detaches leading/trailing punctuation
// code points into separate tokens. Case is preserved; internal punctuation
// (e.g. "John's") is kept. Throws Error on malformed UTF-8.
std::vector<std::string> tokenize(std::string_view text);

std::vector<std::string> lemmatize(const std::vector<std::string>& tokens,
                                   const LemmaTable& table);

// Drops pairs with an empty side or a length ratio strictly exceeding
// max_ratio. Order and ids are preserved.
std::vector<ParallelPair> clean_corpus(std::vector<ParallelPair> pairs,
                                       double max_ratio = 2.0);

// Line i of each file becomes pair i; ids assigned in file order from 0.
std::vector<ParallelPair> load_parallel(const std::string& src_path,
                                        const std::string& tgt_path,
                                        const LemmaTable& table = {});

}  // namespace wsdbias
