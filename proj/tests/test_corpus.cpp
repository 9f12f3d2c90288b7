#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "wsdbias/corpus.hpp"
#include "wsdbias/error.hpp"
#include "wsdbias/text.hpp"
#include "wsdbias/tsv.hpp"

using namespace wsdbias;

TEST_CASE("tokenize detaches edge punctuation") {
  CHECK(tokenize("A hot spring.") ==
        std::vector<std::string>{"A", "hot", "spring", "."});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("John's bat, fast!") ==
        std::vector<std::string>{"John's", "bat", ",", "fast", "!"});
}

TEST_CASE("tokenize handles stacked punctuation and unicode") {
  CHECK(tokenize("(hello)") == std::vector<std::string>{"(", "hello", ")"});
  CHECK(tokenize("wow!!") == std::vector<std::string>{"wow", "!", "!"});
  CHECK(tokenize("...") == std::vector<std::string>{".", ".", "."});
  CHECK(tokenize("heiße Quelle") ==
        std::vector<std::string>{"heiße", "Quelle"});
  CHECK(tokenize("“quote”") ==
        std::vector<std::string>{"“", "quote", "”"});
  CHECK(tokenize("  a  \t b ") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("tokenize rejects malformed utf-8") {
  std::string bad = "ab";
  bad.push_back(static_cast<char>(0xFF));
  CHECK_THROWS_AS(tokenize(bad), Error);
}

TEST_CASE("tokenize is idempotent through join") {
  std::mt19937_64 rng(7);
  const std::string alphabet = "ab XY.,!?'ä";  // includes multi-byte ä
  std::vector<std::string> pieces;
  {
    std::size_t pos = 0;
    std::string_view view = alphabet;
    while (pos < view.size()) {
      std::size_t start = pos;
      utf8_next(view, pos);
      pieces.push_back(std::string(view.substr(start, pos - start)));
    }
  }
  for (int round = 0; round < 200; ++round) {
    std::string text;
    std::size_t len = rng() % 24;
    for (std::size_t i = 0; i < len; ++i) text += pieces[rng() % pieces.size()];
    auto once = tokenize(text);
    auto again = tokenize(join(once, ' '));
    CHECK(again == once);
  }
}

TEST_CASE("lemmatize lowercases then looks up") {
  LemmaTable table;
  table.add("springs", "spring", Pos::Noun);
  table.add("hot", "hot", Pos::Adj);
  CHECK(lemmatize({"Springs"}, table) == std::vector<std::string>{"spring"});
  CHECK(lemmatize({"xyzzy"}, table) == std::vector<std::string>{"xyzzy"});
  CHECK(lemmatize({"Hot", "springs"}, table) ==
        std::vector<std::string>{"hot", "spring"});
}

TEST_CASE("lemmatize case-fold oracle and length preservation") {
  LemmaTable table;
  table.add("Bats", "bat", Pos::Noun);
  table.add("QUELLE", "quelle", Pos::Noun);
  std::vector<std::string> tokens = {"BATS", "bats", "Quelle", "Öl", "plain"};
  auto lemmas = lemmatize(tokens, table);
  REQUIRE(lemmas.size() == tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string folded = lowercase(tokens[i]);
    LemmaEntry expect = table.lookup(folded);
    CHECK(lemmas[i] == expect.lemma);
  }
  CHECK(lemmas[3] == "öl");  // Latin-1 fold
}

TEST_CASE("clean_corpus ratio boundary") {
  auto pair_with = [](int64_t id, std::size_t src_len, std::size_t tgt_len) {
    ParallelPair p;
    p.id = id;
    p.src_tokens.assign(src_len, "s");
    p.tgt_tokens.assign(tgt_len, "t");
    p.src_lemmas = p.src_tokens;
    p.tgt_lemmas = p.tgt_tokens;
    return p;
  };
  auto kept = clean_corpus({pair_with(0, 5, 10)}, 2.0);
  CHECK(kept.size() == 1);  // exactly 2 is not "exceeding"
  kept = clean_corpus({pair_with(0, 5, 11)}, 2.0);
  CHECK(kept.empty());
  kept = clean_corpus({pair_with(0, 0, 4)}, 2.0);
  CHECK(kept.empty());
}

TEST_CASE("clean_corpus matches a brute-force refilter on random pairs") {
  std::mt19937_64 rng(11);
  std::vector<ParallelPair> pairs;
  for (int i = 0; i < 100; ++i) {
    ParallelPair p;
    p.id = i;
    p.src_tokens.assign(rng() % 12, "s");
    p.tgt_tokens.assign(rng() % 12, "t");
    p.src_lemmas = p.src_tokens;
    p.tgt_lemmas = p.tgt_tokens;
    pairs.push_back(std::move(p));
  }
  auto kept = clean_corpus(pairs, 2.0);

  std::vector<int64_t> expected;
  for (const auto& p : pairs) {
    std::size_t a = p.src_tokens.size(), b = p.tgt_tokens.size();
    if (a == 0 || b == 0) continue;
    std::size_t lo = std::min(a, b), hi = std::max(a, b);
    if (static_cast<double>(hi) / static_cast<double>(lo) > 2.0) continue;
    expected.push_back(p.id);
  }
  std::vector<int64_t> got;
  for (const auto& p : kept) got.push_back(p.id);
  CHECK(got == expected);  // subsequence with ids preserved
}

TEST_CASE("load_parallel assigns ids and validates") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "wsdbias_corpus_test";
  fs::create_directories(dir);
  auto src = (dir / "a.src").string();
  auto tgt = (dir / "a.tgt").string();
  write_file(src, "A hot spring.\nsecond line\n");
  write_file(tgt, "Eine heiße Quelle.\nzweite Zeile\n");
  LemmaTable table;
  table.add("spring", "spring", Pos::Noun);
  auto pairs = load_parallel(src, tgt, table);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].id == 0);
  CHECK(pairs[1].id == 1);
  CHECK(pairs[0].src_tokens == std::vector<std::string>{"A", "hot", "spring", "."});
  CHECK(pairs[0].src_lemmas == std::vector<std::string>{"a", "hot", "spring", "."});
  CHECK(pairs[0].tgt_tokens.size() == pairs[0].tgt_lemmas.size());

  write_file(tgt, "only one line\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(load_parallel(src, tgt)),
                       doctest::Contains("line count mismatch"), Error);

  std::string bad = "ok line\nbad \xFF byte\n";
  write_file(tgt, bad);
  write_file(src, "one\ntwo\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(load_parallel(src, tgt)),
                       doctest::Contains("line 2"), Error);
  fs::remove_all(dir);
}

TEST_CASE("lemma table file round trip") {
  namespace fs = std::filesystem;
  auto path = (fs::temp_directory_path() / "wsdbias_lemmas_test.tsv").string();
  write_file(path, "Springs\tspring\tNOUN\nhotter\thot\tADJ\nthe\tthe\tOTHER\n");
  LemmaTable table = LemmaTable::load(path);
  CHECK(table.size() == 3);
  CHECK(table.lookup("SPRINGS").lemma == "spring");
  CHECK(table.lookup("SPRINGS").pos == Pos::Noun);
  CHECK(table.pos_of_lemma("hot") == Pos::Adj);
  CHECK(table.pos_of_lemma("unknown") == Pos::Other);
  write_file(path, "only_two\tcolumns\n");
  CHECK_THROWS_AS(LemmaTable::load(path), Error);
  fs::remove(path);
}
