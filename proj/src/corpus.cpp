#include "wsdbias/corpus.hpp"

#include <algorithm>

#include "wsdbias/error.hpp"
#include "wsdbias/text.hpp"
#include "wsdbias/tsv.hpp"

namespace wsdbias {

Pos pos_from_string(std::string_view s) {
  if (s == "NOUN") return Pos::Noun;
  if (s == "ADJ") return Pos::Adj;
  if (s == "OTHER") return Pos::Other;
  fail("unknown POS tag: '" + std::string(s) + "' (expected NOUN, ADJ or OTHER)");
}

std::string_view pos_to_string(Pos pos) {
  switch (pos) {
    case Pos::Noun: return "NOUN";
    case Pos::Adj: return "ADJ";
    default: return "OTHER";
  }
}

void LemmaTable::add(std::string_view surface, std::string_view lemma, Pos pos) {
  std::string key = lowercase(surface);
  std::string lem = lowercase(lemma);
  lemma_pos_[lem] = pos;
  entries_[std::move(key)] = LemmaEntry{std::move(lem), pos};
}

LemmaEntry LemmaTable::lookup(std::string_view token) const {
  std::string key = lowercase(token);
  auto it = entries_.find(key);
  if (it != entries_.end()) return it->second;
  return LemmaEntry{std::move(key), Pos::Other};
}

Pos LemmaTable::pos_of_lemma(std::string_view lemma) const {
  auto it = lemma_pos_.find(std::string(lemma));
  return it == lemma_pos_.end() ? Pos::Other : it->second;
}

LemmaTable LemmaTable::load(const std::string& path) {
  LemmaTable table;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split_tab(lines[i]);
    if (cols.size() != 3)
      fail("lemma table " + path + " line " + std::to_string(i + 1) +
           ": expected 3 tab-separated columns, got " + std::to_string(cols.size()));
    table.add(cols[0], cols[1], pos_from_string(cols[2]));
  }
  return table;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::size_t bad = 0;
  if (!valid_utf8(text, &bad))
    fail("malformed UTF-8 at byte offset " + std::to_string(bad));

  std::vector<std::string> tokens;
  // Chunk boundaries at whitespace, then peel punctuation off both ends.
  std::size_t pos = 0;
  std::vector<std::pair<int32_t, std::string>> chunk;  // (code point, utf8)
  auto flush = [&] {
    if (chunk.empty()) return;
    std::size_t lo = 0, hi = chunk.size();
    while (lo < hi && is_punct_cp(chunk[lo].first)) {
      tokens.push_back(chunk[lo].second);
      ++lo;
    }
    std::size_t core_end = hi;
    while (core_end > lo && is_punct_cp(chunk[core_end - 1].first)) --core_end;
    if (core_end > lo) {
      std::string core;
      for (std::size_t i = lo; i < core_end; ++i) core += chunk[i].second;
      tokens.push_back(std::move(core));
    }
    for (std::size_t i = core_end; i < hi; ++i) tokens.push_back(chunk[i].second);
    chunk.clear();
  };
  while (pos < text.size()) {
    std::size_t start = pos;
    int32_t cp = utf8_next(text, pos);
    if (is_space_cp(cp)) {
      flush();
    } else {
      chunk.emplace_back(cp, std::string(text.substr(start, pos - start)));
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> lemmatize(const std::vector<std::string>& tokens,
                                   const LemmaTable& table) {
  std::vector<std::string> lemmas;
  lemmas.reserve(tokens.size());
  for (const auto& tok : tokens) lemmas.push_back(table.lookup(tok).lemma);
  return lemmas;
}

std::vector<ParallelPair> clean_corpus(std::vector<ParallelPair> pairs,
                                       double max_ratio) {
  if (max_ratio <= 0) fail("clean_corpus: max_ratio must be positive");
  std::vector<ParallelPair> kept;
  kept.reserve(pairs.size());
  for (auto& p : pairs) {
    std::size_t a = p.src_tokens.size(), b = p.tgt_tokens.size();
    if (a == 0 || b == 0) continue;
    double longer = static_cast<double>(std::max(a, b));
    double shorter = static_cast<double>(std::min(a, b));
    if (longer > max_ratio * shorter) continue;  // "exceeding", boundary kept
    kept.push_back(std::move(p));
  }
  return kept;
}

std::vector<ParallelPair> load_parallel(const std::string& src_path,
                                        const std::string& tgt_path,
                                        const LemmaTable& table) {
  auto src_lines = read_lines(src_path);
  auto tgt_lines = read_lines(tgt_path);
  if (src_lines.size() != tgt_lines.size())
    fail("line count mismatch: " + src_path + " has " +
         std::to_string(src_lines.size()) + " lines, " + tgt_path + " has " +
         std::to_string(tgt_lines.size()));

  std::vector<ParallelPair> pairs;
  pairs.reserve(src_lines.size());
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    std::size_t bad = 0;
    if (!valid_utf8(src_lines[i], &bad))
      fail(src_path + " line " + std::to_string(i + 1) +
           ": undecodable byte at offset " + std::to_string(bad));
    if (!valid_utf8(tgt_lines[i], &bad))
      fail(tgt_path + " line " + std::to_string(i + 1) +
           ": undecodable byte at offset " + std::to_string(bad));
    ParallelPair p;
    p.id = static_cast<int64_t>(i);
    p.src_tokens = tokenize(src_lines[i]);
    p.tgt_tokens = tokenize(tgt_lines[i]);
    p.src_lemmas = lemmatize(p.src_tokens, table);
    p.tgt_lemmas = lemmatize(p.tgt_tokens, table);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace wsdbias
