#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "support/kn_oracle.hpp"
#include "wsdbias/error.hpp"
#include "wsdbias/fluency.hpp"
#include "wsdbias/tsv.hpp"

using namespace wsdbias;
using synth::KnOracle;

namespace {

std::vector<std::vector<std::string>> repeated(const std::vector<std::string>& s,
                                               std::size_t n) {
  return std::vector<std::vector<std::string>>(n, s);
}

}  // namespace

TEST_CASE("probabilities over the vocabulary sum to one") {
  std::vector<std::vector<std::string>> corpus = {
      {"the", "cat", "sat"},
      {"the", "dog", "sat", "down"},
      {"a", "cat", "ran"},
      {"the", "cat", "ran", "away"},
  };
  NgramModel model = train_kn_trigram(corpus);
  std::vector<std::pair<std::string, std::string>> contexts = {
      {"<s>", "<s>"}, {"<s>", "the"}, {"the", "cat"}, {"cat", "sat"},
      {"dog", "sat"}, {"unseen", "context"}, {"ran", "unseen"}, {"a", "cat"},
  };
  for (const auto& [u, v] : contexts) {
    double sum = 0;
    for (std::size_t w = 0; w < model.vocab.size(); ++w) {
      if (static_cast<int>(w) == NgramModel::kBos) continue;
      sum += model.prob(model.token_id(u), model.token_id(v), static_cast<int>(w));
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("no context yields a zero probability") {
  NgramModel model = train_kn_trigram({{"a", "b"}, {"b", "c"}});
  for (const auto& u : {"a", "b", "zzz", "<s>"})
    for (const auto& v : {"a", "c", "zzz"})
      for (const auto& w : {"a", "b", "c", "zzz", "</s>"})
        CHECK(model.prob(u, v, w) > 0.0);
  // A single unseen token still has finite perplexity through <unk>.
  double ppl = perplexity(model, {"qqq"});
  CHECK(std::isfinite(ppl));
  CHECK(ppl > 1.0);
}

TEST_CASE("repeated sentence scores below any permuted variant") {
  std::vector<std::string> sentence = {"time", "flies", "like", "an", "arrow"};
  auto corpus = repeated(sentence, 40);
  NgramModel model = train_kn_trigram(corpus);
  KnOracle oracle(corpus, 0.75, 1);

  double base = perplexity(model, sentence);
  CHECK(base == doctest::Approx(oracle.perplexity(sentence)).epsilon(1e-9));
  CHECK(base < 1.4);

  std::vector<std::vector<std::string>> permutations = {
      {"flies", "time", "like", "an", "arrow"},
      {"arrow", "an", "like", "flies", "time"},
      {"time", "like", "flies", "arrow", "an"},
  };
  for (const auto& perm : permutations) {
    double p = perplexity(model, perm);
    CHECK(p > base);
    CHECK(p == doctest::Approx(oracle.perplexity(perm)).epsilon(1e-9));
  }
}

TEST_CASE("unigram level of a two-word uniform corpus") {
  auto corpus = repeated({"a", "b"}, 100);
  NgramModel model = train_kn_trigram(corpus);
  // Raw-count unigram with absolute discounting: 0.5 minus the discount
  // share redistributed through the uniform floor (vocab a, b, </s>, <unk>).
  const double total = 200, types = 2, d = 0.75;
  double lambda = d * types / total;
  double pa = (100 - d) / total + lambda * 0.25;
  double punk = lambda * 0.25;
  KnOracle oracle(corpus, 0.75, 1);
  CHECK(oracle.p_uni("a") == doctest::Approx(pa).epsilon(1e-12));
  CHECK(oracle.p_uni("b") == doctest::Approx(pa).epsilon(1e-12));
  // Model and oracle agree through the full trigram path.
  for (const auto& w : {"a", "b", "</s>", "<unk>"})
    CHECK(model.prob("a", "b", w) ==
          doctest::Approx(oracle.p_tri("a", "b", w)).epsilon(1e-12));
  CHECK(pa == doctest::Approx(0.5).epsilon(0.02));
  CHECK(punk > 0);
}

TEST_CASE("perplexity equals the independent recomputation on 50 sentences") {
  std::mt19937_64 rng(99);
  std::vector<std::string> words = {"a", "b", "c", "d", "e", "f", "g"};
  std::vector<std::vector<std::string>> corpus;
  for (int i = 0; i < 50; ++i) {
    std::vector<std::string> s;
    std::size_t len = 1 + rng() % 9;
    for (std::size_t k = 0; k < len; ++k) s.push_back(words[rng() % words.size()]);
    corpus.push_back(std::move(s));
  }
  NgramModel model = train_kn_trigram(corpus);
  KnOracle oracle(corpus, 0.75, 1);
  for (const auto& s : corpus)
    CHECK(perplexity(model, s) == doctest::Approx(oracle.perplexity(s)).epsilon(1e-9));
  std::vector<std::string> unseen = {"c", "q", "a", "zzz"};
  CHECK(perplexity(model, unseen) ==
        doctest::Approx(oracle.perplexity(unseen)).epsilon(1e-9));
}

TEST_CASE("sequence log probability is consistent with perplexity") {
  NgramModel model = train_kn_trigram({{"a", "b", "c"}, {"b", "c"}, {"a", "c"}});
  std::vector<std::string> s = {"a", "b"};
  double nll = sequence_neg_log_prob(model, s);
  CHECK(nll > 0);
  // Scored positions: both tokens plus the end symbol.
  CHECK(perplexity(model, s) == doctest::Approx(std::exp(nll / 3.0)).epsilon(1e-12));
}

TEST_CASE("perplexity does not depend on internal id assignment") {
  // Reordering the training sentences permutes the vocabulary ids but not
  // the counts, so every score is unchanged.
  std::vector<std::vector<std::string>> corpus = {
      {"alpha", "beta", "gamma"},
      {"delta", "beta"},
      {"gamma", "alpha", "delta", "beta"},
  };
  std::vector<std::vector<std::string>> reversed(corpus.rbegin(), corpus.rend());
  NgramModel a = train_kn_trigram(corpus);
  NgramModel b = train_kn_trigram(reversed);
  CHECK(a.token_id("alpha") != b.token_id("alpha"));  // ids really moved
  for (const auto& s : corpus) CHECK(perplexity(a, s) == perplexity(b, s));
  std::vector<std::string> novel = {"beta", "novel", "gamma"};
  CHECK(perplexity(a, novel) == perplexity(b, novel));
}

TEST_CASE("adding a sentence never raises its own perplexity") {
  std::vector<std::vector<std::string>> base = {
      {"the", "cat", "sat"},
      {"a", "dog", "ran"},
      {"the", "dog", "sat"},
  };
  std::vector<std::string> target = {"the", "cat", "ran"};
  NgramModel before = train_kn_trigram(base);
  auto extended = base;
  extended.push_back(target);
  NgramModel after = train_kn_trigram(extended);
  CHECK(perplexity(after, target) <= perplexity(before, target));
}

TEST_CASE("min_count maps rare tokens to unk") {
  std::vector<std::vector<std::string>> corpus = {
      {"common", "common", "rare"}, {"common", "other"}, {"common", "other"}};
  NgramModel model = train_kn_trigram(corpus, 0.75, 2);
  CHECK(model.token_id("rare") == NgramModel::kUnk);
  CHECK(model.token_id("common") != NgramModel::kUnk);
  double sum = 0;
  for (std::size_t w = 0; w < model.vocab.size(); ++w) {
    if (static_cast<int>(w) == NgramModel::kBos) continue;
    sum += model.prob(model.token_id("common"), model.token_id("other"),
                      static_cast<int>(w));
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("binary round trip preserves scores") {
  std::vector<std::vector<std::string>> corpus = {
      {"x", "y", "z"}, {"x", "z"}, {"y", "x", "z", "w"}};
  NgramModel model = train_kn_trigram(corpus, 0.6, 1);
  namespace fs = std::filesystem;
  auto path = (fs::temp_directory_path() / "wsdbias_lm_test.bin").string();
  model.save(path);
  NgramModel loaded = NgramModel::load(path);
  CHECK(loaded.discount == model.discount);
  CHECK(loaded.vocab == model.vocab);
  for (const auto& s : corpus)
    CHECK(perplexity(loaded, s) == perplexity(model, s));
  std::string copy = path + ".bad";
  write_file(copy, "NOTALMFILE");
  CHECK_THROWS_AS(NgramModel::load(copy), Error);
  fs::remove(path);
  fs::remove(copy);
  CHECK_THROWS_AS(train_kn_trigram({}), Error);
  CHECK_THROWS_AS(train_kn_trigram(corpus, 1.5), Error);
}
