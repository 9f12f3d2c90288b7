#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "support/synthetic.hpp"
#include "wsdbias/aligner.hpp"
#include "wsdbias/bias.hpp"
#include "wsdbias/error.hpp"
#include "wsdbias/tsv.hpp"

using namespace wsdbias;

namespace {

ParallelPair make_pair(int64_t id, std::vector<std::string> src,
                       std::vector<std::string> tgt) {
  ParallelPair p;
  p.id = id;
  p.src_tokens = src;
  p.tgt_tokens = tgt;
  p.src_lemmas = std::move(src);
  p.tgt_lemmas = std::move(tgt);
  return p;
}

SenseLexicon spring_lexicon() {
  SenseLexicon lex;
  SenseCluster season;
  season.translations = {"frühling", "lenz"};
  SenseCluster water;
  water.translations = {"quelle", "brunnen"};
  lex.add("spring", {season, water});
  return lex;
}

AlignmentLinks links_of(std::map<int, int> m) {
  AlignmentLinks l;
  l.links = std::move(m);
  return l;
}

}  // namespace

TEST_CASE("extraction assigns the motivating example to the water cluster") {
  SenseLexicon lex = spring_lexicon();
  auto pair = make_pair(0, {"the", "hot", "spring", "flows"},
                        {"die", "heiße", "quelle", "fließt"});
  std::vector<AlignmentLinks> alignments = {
      links_of({{0, 0}, {1, 1}, {2, 2}, {3, 3}})};
  ExtractionReport report;
  auto annotated = extract_homograph_pairs({pair}, lex, alignments, &report);
  REQUIRE(annotated.size() == 1);
  CHECK(annotated[0].homograph == "spring");
  CHECK(annotated[0].src_position == 2);
  CHECK(annotated[0].tgt_position == 2);
  CHECK(annotated[0].cluster_id == lex.lookup_cluster("spring", "quelle").cluster_id);
  CHECK(report.annotated == 1);
}

TEST_CASE("extraction skips unknown, unaligned and ambiguous targets") {
  SenseLexicon lex;
  SenseCluster a, b;
  a.translations = {"eins", "beides"};
  b.translations = {"zwei", "beides"};
  lex.add("spring", {a, b});

  auto unknown = make_pair(0, {"x", "spring"}, {"x", "tisch"});
  auto unaligned = make_pair(1, {"y", "spring"}, {"y", "eins"});
  auto ambiguous = make_pair(2, {"z", "spring"}, {"z", "beides"});
  std::vector<AlignmentLinks> alignments = {links_of({{1, 1}}), links_of({{0, 0}}),
                                            links_of({{1, 1}})};
  ExtractionReport report;
  auto annotated =
      extract_homograph_pairs({unknown, unaligned, ambiguous}, lex, alignments,
                              &report);
  CHECK(annotated.empty());
  CHECK(report.skipped_unknown == 1);
  CHECK(report.skipped_unaligned == 1);
  CHECK(report.skipped_ambiguous == 1);
}

TEST_CASE("one pair may yield annotations for several homographs") {
  SenseLexicon lex = spring_lexicon();
  SenseCluster animal, club;
  animal.translations = {"fledermaus"};
  club.translations = {"schläger"};
  lex.add("bat", {animal, club});
  auto pair = make_pair(4, {"the", "bat", "near", "the", "spring"},
                        {"die", "fledermaus", "nahe", "der", "quelle"});
  auto annotated = extract_homograph_pairs(
      {pair}, lex, {links_of({{1, 1}, {4, 4}})});
  REQUIRE(annotated.size() == 2);
  CHECK(annotated[0].homograph == "bat");
  CHECK(annotated[1].homograph == "spring");
}

TEST_CASE("only the first occurrence of a homograph is annotated") {
  SenseLexicon lex = spring_lexicon();
  auto pair = make_pair(7, {"spring", "meets", "spring"},
                        {"frühling", "trifft", "quelle"});
  auto annotated = extract_homograph_pairs(
      {pair}, lex, {links_of({{0, 0}, {2, 2}})});
  REQUIRE(annotated.size() == 1);
  CHECK(annotated[0].src_position == 0);
}

TEST_CASE("extraction equals a brute-force re-derivation on synthetic pairs") {
  std::mt19937_64 rng(5);
  SenseLexicon lex = spring_lexicon();
  std::vector<ParallelPair> pairs;
  std::vector<AlignmentLinks> alignments;
  std::vector<std::string> tgt_pool = {"frühling", "quelle", "tisch", "lenz"};
  for (int i = 0; i < 50; ++i) {
    std::vector<std::string> src, tgt;
    std::size_t len = 3 + rng() % 4;
    for (std::size_t k = 0; k < len; ++k) {
      src.push_back(rng() % 3 == 0 ? "spring" : "w" + std::to_string(rng() % 5));
      tgt.push_back(tgt_pool[rng() % tgt_pool.size()]);
    }
    AlignmentLinks links;
    for (std::size_t k = 0; k < len; ++k)
      if (rng() % 4 != 0) links.links[static_cast<int>(k)] = static_cast<int>(rng() % len);
    pairs.push_back(make_pair(i, src, tgt));
    alignments.push_back(links);
  }
  auto got = extract_homograph_pairs(pairs, lex, alignments);

  // Independent re-derivation.
  std::vector<AnnotatedPair> expected;
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    const auto& p = pairs[pi];
    for (std::size_t i = 0; i < p.src_lemmas.size(); ++i) {
      if (p.src_lemmas[i] != "spring") continue;
      auto it = alignments[pi].links.find(static_cast<int>(i));
      if (it != alignments[pi].links.end()) {
        auto res = lex.lookup_cluster("spring", p.tgt_lemmas[it->second]);
        if (res.kind == ClusterMatch::Cluster)
          expected.push_back({p.id, "spring", static_cast<int>(i), res.cluster_id,
                              it->second});
      }
      break;  // first occurrence only
    }
  }
  REQUIRE(got.size() == expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].pair_id == expected[i].pair_id);
    CHECK(got[i].src_position == expected[i].src_position);
    CHECK(got[i].cluster_id == expected[i].cluster_id);
    CHECK(got[i].tgt_position == expected[i].tgt_position);
  }
}

TEST_CASE("attractor counts exclude the homograph and count tokens") {
  SenseLexicon lex = spring_lexicon();
  int water = lex.lookup_cluster("spring", "quelle").cluster_id;
  auto pair = make_pair(0, {"the", "hot", "spring", "flows"},
                        {"die", "heiße", "quelle", "fließt"});
  std::vector<AnnotatedPair> annotated = {{0, "spring", 2, water, 2}};
  auto tables = build_attractor_tables(annotated, {pair}, lex);
  REQUIRE(tables.count("spring"));
  const AttractorTable& t = tables.at("spring");
  CHECK(freq(t, "the", water) == 1);
  CHECK(freq(t, "hot", water) == 1);
  CHECK(freq(t, "flows", water) == 1);
  CHECK(freq(t, "spring", water) == 0);  // never its own attractor
  CHECK(t.cluster_totals.at(water) == 4);
  CHECK(t.word_totals.at("spring") == 1);
  CHECK(t.pair_counts.at(water) == 1);

  auto doubled = make_pair(1, {"hot", "hot", "spring"}, {"x", "y", "quelle"});
  auto tables2 = build_attractor_tables({{1, "spring", 2, water, 2}}, {doubled}, lex);
  CHECK(freq(tables2.at("spring"), "hot", water) == 2);
}

TEST_CASE("attractor tables equal a nested-loop recount") {
  std::mt19937_64 rng(21);
  SenseLexicon lex = spring_lexicon();
  int season = lex.lookup_cluster("spring", "frühling").cluster_id;
  int water = lex.lookup_cluster("spring", "quelle").cluster_id;
  std::vector<ParallelPair> pairs;
  std::vector<AnnotatedPair> annotated;
  for (int i = 0; i < 30; ++i) {
    std::vector<std::string> src;
    std::size_t len = 2 + rng() % 6;
    for (std::size_t k = 0; k < len; ++k)
      src.push_back("w" + std::to_string(rng() % 6));
    int pos = static_cast<int>(rng() % src.size());
    src[static_cast<std::size_t>(pos)] = "spring";
    pairs.push_back(make_pair(i, src, src));
    annotated.push_back({i, "spring", pos, rng() % 2 ? season : water, pos});
  }
  auto tables = build_attractor_tables(annotated, pairs, lex);
  const AttractorTable& t = tables.at("spring");

  std::map<std::pair<std::string, int>, int64_t> recount;
  std::map<int, int64_t> totals;
  std::map<std::string, int64_t> word_totals;
  for (const auto& a : annotated) {
    const auto& p = pairs[static_cast<std::size_t>(a.pair_id)];
    totals[a.cluster_id] += static_cast<int64_t>(p.src_lemmas.size());
    for (const auto& w : p.src_lemmas) {
      word_totals[w] += 1;
      if (w != "spring") recount[{w, a.cluster_id}] += 1;
    }
  }
  for (const auto& [key, count] : recount)
    CHECK(freq(t, key.first, key.second) == count);
  CHECK(t.cluster_totals.at(season) == totals[season]);
  CHECK(t.cluster_totals.at(water) == totals[water]);
  for (const auto& [w, c] : word_totals) CHECK(t.word_totals.at(w) == c);

  // Attractor mass never exceeds the cluster token total.
  for (int sc : t.cluster_ids) {
    int64_t sum = 0;
    for (const auto& [w, per_cluster] : t.counts) {
      auto it = per_cluster.find(sc);
      if (it != per_cluster.end()) sum += it->second;
    }
    CHECK(sum <= t.cluster_totals.at(sc));
  }

  // freq and ppmi vanish on exactly the same cells.
  for (const auto& [w, per_cluster] : t.counts) {
    for (int sc : t.cluster_ids) {
      bool zero_freq = freq(t, w, sc) == 0;
      bool zero_ppmi = ppmi(t, w, sc) == 0.0;
      if (zero_freq) CHECK(zero_ppmi);
      if (!zero_freq) CHECK(ppmi(t, w, sc, PpmiMode::Ratio) > 0.0);
    }
  }
}

TEST_CASE("ppmi hand-computed two-cluster case") {
  SenseLexicon lex = spring_lexicon();
  int season = lex.lookup_cluster("spring", "frühling").cluster_id;
  int water = lex.lookup_cluster("spring", "quelle").cluster_id;
  // Two pairs of four tokens each; "w" only occurs with the season cluster.
  auto p0 = make_pair(0, {"spring", "w", "a", "b"}, {"frühling", "x", "y", "z"});
  auto p1 = make_pair(1, {"spring", "c", "d", "e"}, {"quelle", "x", "y", "z"});
  std::vector<AnnotatedPair> annotated = {{0, "spring", 0, season, 0},
                                          {1, "spring", 0, water, 0}};
  auto tables = build_attractor_tables(annotated, {p0, p1}, lex);
  const AttractorTable& t = tables.at("spring");
  // P(w,season)=1/8, P(w)=1/8, P(season)=1/2 -> ratio 2 -> log2 = 1.
  CHECK(ppmi(t, "w", season) == doctest::Approx(1.0));
  CHECK(ppmi(t, "w", season, PpmiMode::Ratio) == doctest::Approx(2.0));
  CHECK(ppmi(t, "w", water) == 0.0);
  CHECK(freq(t, "w", season) == 1);
}

TEST_CASE("ppmi equals a brute-force probability oracle") {
  std::mt19937_64 rng(33);
  SenseLexicon lex = spring_lexicon();
  int season = lex.lookup_cluster("spring", "frühling").cluster_id;
  int water = lex.lookup_cluster("spring", "quelle").cluster_id;
  std::vector<ParallelPair> pairs;
  std::vector<AnnotatedPair> annotated;
  for (int i = 0; i < 40; ++i) {
    std::vector<std::string> src = {"spring"};
    std::size_t len = 1 + rng() % 7;
    for (std::size_t k = 0; k < len; ++k)
      src.push_back("w" + std::to_string(rng() % 8));
    pairs.push_back(make_pair(i, src, src));
    annotated.push_back({i, "spring", 0, rng() % 3 == 0 ? season : water, 0});
  }
  auto tables = build_attractor_tables(annotated, pairs, lex);
  const AttractorTable& t = tables.at("spring");

  double n = static_cast<double>(t.total_tokens());
  for (const auto& [w, per_cluster] : t.counts) {
    for (const auto& [sc, joint] : per_cluster) {
      double pwsc = static_cast<double>(joint) / n;
      double pw = static_cast<double>(t.word_totals.at(w)) / n;
      double psc = static_cast<double>(t.cluster_totals.at(sc)) / n;
      double expected = std::max(std::log2(pwsc / (pw * psc)), 0.0);
      CHECK(ppmi(t, w, sc) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

namespace {

AttractorTable literal_table() {
  AttractorTable t;
  t.homograph = "spring";
  t.cluster_ids = {0, 1};
  t.counts["t1"][0] = 2;
  t.counts["t4"][0] = 3;
  t.counts["t4"][1] = 1;
  t.cluster_totals[0] = 10;
  t.cluster_totals[1] = 10;
  t.word_totals["t1"] = 2;
  t.word_totals["t4"] = 4;
  t.pair_counts[0] = 2;
  t.pair_counts[1] = 2;
  return t;
}

}  // namespace

TEST_CASE("sentence_db averages over every position") {
  AttractorTable t = literal_table();
  std::vector<std::string> sentence = {"t1", "t2", "t3", "t4", "t5"};
  CHECK(sentence_db(t, sentence, 0, Measure::Freq) == doctest::Approx(1.0));
  CHECK(sentence_db(t, {"none", "here"}, 0, Measure::Freq) == 0.0);

  // Permutation invariance.
  std::vector<std::string> shuffled = {"t5", "t4", "t3", "t2", "t1"};
  CHECK(sentence_db(t, shuffled, 0, Measure::Freq) ==
        sentence_db(t, sentence, 0, Measure::Freq));

  // Appending a zero-bias token strictly decreases a positive value.
  std::vector<std::string> longer = sentence;
  longer.push_back("zero");
  CHECK(sentence_db(t, longer, 0, Measure::Freq) <
        sentence_db(t, sentence, 0, Measure::Freq));

  // Brute-force recomputation on random sentences.
  std::mt19937_64 rng(8);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::string> s;
    std::size_t len = 1 + rng() % 8;
    for (std::size_t k = 0; k < len; ++k)
      s.push_back("t" + std::to_string(rng() % 6));
    double sum = 0;
    for (const auto& w : s) sum += static_cast<double>(freq(t, w, 0));
    CHECK(sentence_db(t, s, 0, Measure::Freq) ==
          doctest::Approx(sum / static_cast<double>(len)));
  }
}

TEST_CASE("bias_profile maximizes over the wrong clusters") {
  AttractorTable t = literal_table();
  std::vector<std::string> sentence = {"t1", "t4", "x", "y"};
  // db(0) = (2+3)/4 = 1.25, db(1) = 1/4 = 0.25.
  BiasProfile prof = bias_profile(t, sentence, 0, Measure::Freq);
  CHECK(prof.db_correct == doctest::Approx(1.25));
  CHECK(prof.db_incorrect == doctest::Approx(0.25));
  CHECK(prof.db_diff == doctest::Approx(-1.0));
  CHECK(prof.argmax_incorrect_sc == 1);

  BiasProfile inv = bias_profile(t, sentence, 1, Measure::Freq);
  CHECK(inv.db_diff == doctest::Approx(1.0));
  CHECK(inv.argmax_incorrect_sc == 0);

  BiasProfile zero = bias_profile(t, {"none"}, 0, Measure::Freq);
  CHECK(zero.db_correct == 0.0);
  CHECK(zero.db_incorrect == 0.0);
  CHECK(zero.db_diff == 0.0);
}

TEST_CASE("bias_profile argmax matches an exhaustive scan on three clusters") {
  AttractorTable t;
  t.homograph = "h";
  t.cluster_ids = {0, 1, 2};
  std::mt19937_64 rng(77);
  for (int sc = 0; sc < 3; ++sc) {
    t.cluster_totals[sc] = 20;
    t.pair_counts[sc] = 2;
  }
  for (int w = 0; w < 10; ++w) {
    std::string word = "w" + std::to_string(w);
    int64_t total = 0;
    for (int sc = 0; sc < 3; ++sc) {
      int64_t c = static_cast<int64_t>(rng() % 4);
      if (c > 0) t.counts[word][sc] = c;
      total += c;
    }
    if (total > 0) t.word_totals[word] = total;
  }
  for (int round = 0; round < 60; ++round) {
    std::vector<std::string> s;
    std::size_t len = 2 + rng() % 6;
    for (std::size_t k = 0; k < len; ++k)
      s.push_back("w" + std::to_string(rng() % 10));
    int correct = static_cast<int>(rng() % 3);
    BiasProfile prof = bias_profile(t, s, correct, Measure::Freq);
    double best = -1;
    int best_sc = -1;
    for (int sc = 0; sc < 3; ++sc) {
      if (sc == correct) continue;
      double v = sentence_db(t, s, sc, Measure::Freq);
      if (v > best) {
        best = v;
        best_sc = sc;
      }
    }
    CHECK(prof.argmax_incorrect_sc == best_sc);
    CHECK(prof.db_incorrect == doctest::Approx(best));
  }
}

TEST_CASE("homograph rows stay zero across the synthetic world") {
  synth::WorldConfig cfg;
  cfg.train_pairs = 400;
  cfg.test_pairs = 10;
  synth::World world = synth::build_world(cfg);
  AlignerOptions opts;
  opts.iterations = 3;
  AlignmentModel model = train_alignment_model(world.train, opts);
  std::vector<AlignmentLinks> alignments;
  for (const auto& p : world.train) alignments.push_back(align_pair(model, p));
  auto annotated = extract_homograph_pairs(world.train, world.lexicon, alignments);
  CHECK(annotated.size() > 200);
  auto tables = build_attractor_tables(annotated, world.train, world.lexicon);
  for (const auto& [h, table] : tables)
    for (int sc : table.cluster_ids) CHECK(freq(table, h, sc) == 0);
}

TEST_CASE("table json round trip and attractor tsv export") {
  SenseLexicon lex = spring_lexicon();
  int water = lex.lookup_cluster("spring", "quelle").cluster_id;
  auto pair = make_pair(0, {"the", "hot", "spring", "hot"},
                        {"die", "heiße", "quelle", "heiße"});
  auto tables = build_attractor_tables({{0, "spring", 2, water, 2}}, {pair}, lex);

  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "wsdbias_bias_test";
  fs::create_directories(dir);
  auto json_path = (dir / "tables.json").string();
  save_tables(json_path, tables);
  auto loaded = load_tables(json_path);
  REQUIRE(loaded.count("spring"));
  CHECK(loaded.at("spring").counts == tables.at("spring").counts);
  CHECK(loaded.at("spring").cluster_totals == tables.at("spring").cluster_totals);
  CHECK(loaded.at("spring").word_totals == tables.at("spring").word_totals);
  CHECK(loaded.at("spring").pair_counts == tables.at("spring").pair_counts);
  CHECK(loaded.at("spring").cluster_ids == tables.at("spring").cluster_ids);

  auto tsv_path = (dir / "attractors.tsv").string();
  export_attractor_tsv(tsv_path, tables);
  auto lines = read_lines(tsv_path);
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] == "homograph\tcluster_id\tword\tcount\tppmi");
  // "hot" counts twice, so it sorts first within the cluster.
  auto first = split_tab(lines[1]);
  CHECK(first[2] == "hot");
  CHECK(first[3] == "2");

  auto ann_path = (dir / "annotated.tsv").string();
  std::vector<AnnotatedPair> annotated = {{0, "spring", 2, water, 2}};
  save_annotated(ann_path, annotated);
  auto back = load_annotated(ann_path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].pair_id == 0);
  CHECK(back[0].homograph == "spring");
  CHECK(back[0].src_position == 2);
  CHECK(back[0].cluster_id == water);
  fs::remove_all(dir);
}
