#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wsdbias/adversarial.hpp"
#include "wsdbias/bias.hpp"
#include "wsdbias/corpus.hpp"
#include "wsdbias/lexicon.hpp"

// Deterministic synthetic parallel world with planted homographs, sense
// clusters, cluster-specific attractor adjectives and a word-for-word
// bilingual dictionary. Used by the unit tests and the acceptance suite.
namespace synth {

struct WorldConfig {
  uint64_t seed = 20260808;
  std::size_t train_pairs = 5000;
  std::size_t test_pairs = 2600;
  std::size_t n_fillers = 60;
  std::size_t n_generic_nouns = 20;
  std::size_t n_generic_adjs = 10;
  std::size_t adjs_per_cluster = 10;
  double conflict_prob = 0.18;  // test sentences biased toward a wrong cluster
  double short_prob = 0.06;     // sentences below the 10-token test threshold
};

struct World {
  WorldConfig config;
  wsdbias::LemmaTable lemmas;
  wsdbias::SenseLexicon lexicon;
  std::vector<wsdbias::ParallelPair> train;
  std::vector<wsdbias::ParallelPair> test;
  std::map<std::string, std::string> dictionary;  // src lemma -> tgt lemma
  std::vector<std::string> homographs;
};

World build_world(WorldConfig config = {});

// Writes train.src/train.tgt/test.src/test.tgt/lemmas.tsv/lexicon.json.
void write_world_files(const World& world, const std::string& dir);

// Bias-following reference translator: renders every word through the
// dictionary and the homograph as the sense cluster with the highest
// FREQ-based sentence bias; a noise fraction picks a random cluster instead.
std::string translate_tokens(const World& world,
                             const std::vector<std::string>& src_lemmas,
                             int homograph_pos, const std::string& homograph,
                             const std::map<std::string, wsdbias::AttractorTable>& tables,
                             int forced_cluster /* -1 = follow bias */);

// One hypothesis line per pool entry.
std::vector<std::string> translate_pool(
    const World& world, const std::vector<wsdbias::AnnotatedPair>& pool,
    const std::vector<wsdbias::ParallelPair>& corpus,
    const std::map<std::string, wsdbias::AttractorTable>& tables, double noise,
    uint64_t seed);

// Seed and perturbed hypotheses, one line per sample row.
struct SampleHyps {
  std::vector<std::string> seed_lines;
  std::vector<std::string> sample_lines;
};
SampleHyps translate_samples(
    const World& world, const std::vector<wsdbias::AdversarialSample>& samples,
    const std::vector<wsdbias::ParallelPair>& corpus,
    const std::map<std::string, wsdbias::AttractorTable>& tables, double noise,
    uint64_t seed);

// Shuffled-order corpus over a bijective dictionary, for aligner checks.
std::vector<wsdbias::ParallelPair> bijective_corpus(
    std::size_t n_pairs, std::size_t vocab_size, uint64_t seed,
    std::map<std::string, std::string>* dictionary = nullptr);

}  // namespace synth
