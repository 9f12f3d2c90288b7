#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wsdbias/bias.hpp"
#include "wsdbias/wsd_eval.hpp"

namespace wsdbias {

// Suffix rule -er/-est plus the analytic markers and common irregulars.
bool is_comparative_or_superlative(std::string_view adj);

// Adjectives observed immediately preceding a noun, possibly through a chain
// of adjectives ending at it. Sense-scoped entries come from annotated
// training pairs (the homograph occurrence), noun-scoped entries from every
// training sentence. Comparative/superlative forms are never stored.
struct ModifierTable {
  std::map<std::string, std::map<int, std::set<std::string>>> sense_modifiers;
  std::map<std::string, std::set<std::string>> noun_modifiers;

  const std::set<std::string>* sense(const std::string& homograph, int sc) const;
  const std::set<std::string>* noun(const std::string& noun_lemma) const;
};

ModifierTable collect_modifier_table(const std::vector<ParallelPair>& training_pairs,
                                     const std::vector<AnnotatedPair>& annotated,
                                     const LemmaTable& lemmas);

enum class Perturbation { IH, RH, InH, RnH };

std::string_view perturbation_to_string(Perturbation p);
Perturbation perturbation_from_string(std::string_view s);

struct AdversarialSample {
  int64_t sample_id = 0;
  int64_t seed_pair_id = 0;
  std::string homograph;
  int seed_cluster_id = 0;
  int seed_src_position = 0;
  Perturbation perturbation = Perturbation::IH;
  std::string attractor;
  int adv_cluster_id = 0;
  int position = 0;            // token index of the insertion/replacement
  std::string replaced_token;  // empty for insertions
  std::vector<std::string> perturbed_tokens;
  double score_freq_diff = 0;  // freq(attractor, adv) - freq(attractor, seed)
  double ppl_seed = 0;
  double ppl_sample = 0;
};

// Index of the homograph token inside perturbed_tokens.
int homograph_position_in_sample(const AdversarialSample& s);

struct SeedSelectionReport {
  std::size_t considered = 0;
  std::size_t rejected_length = 0;
  std::size_t rejected_oracle = 0;
  std::size_t rejected_missing_oracle = 0;
  std::size_t rejected_bias = 0;
  std::size_t selected = 0;
};

// pair_id -> cluster_id -> context-sufficiency score.
using OracleScores = std::map<int64_t, std::map<int, double>>;

// Keeps pairs that (a) are at least min_len source tokens long, (b) whose
// oracle argmax cluster uniquely equals the reference cluster, and (c) whose
// FREQ-based db_incorrect is not in the top db_reject_fraction of the pool
// (ties at the cut are rejected). With no external oracle the reference-side
// default applies: the reference cluster scores 1 iff db_correct >=
// db_incorrect, everything else 0.
std::vector<AnnotatedPair> select_seeds(
    const std::vector<AnnotatedPair>& pool,
    const std::vector<ParallelPair>& pairs,
    const std::map<std::string, AttractorTable>& tables,
    const OracleScores* oracle = nullptr, double db_reject_fraction = 0.10,
    std::size_t min_len = 10, SeedSelectionReport* report = nullptr);

// All single-edit perturbations of one seed: for every adversarial cluster
// and admissible attractor adjective, IH/RH at the homograph (attractor must
// be a seed-sense modifier) and InH/RnH at other nouns (attractor must be a
// known modifier of that noun). Compound nouns are never touched, inserted
// attractors never land next to another adjective of the same noun, and
// replacements only apply to single-adjective chains.
std::vector<AdversarialSample> generate_samples(const AnnotatedPair& seed,
                                                const ParallelPair& pair,
                                                const AttractorTable& table,
                                                const ModifierTable& modifiers,
                                                const LemmaTable& lemmas);

using SentenceScorer = std::function<double(const std::vector<std::string>&)>;

// Retains samples whose per-token perplexity ratio against the seed sentence
// is at most max_ratio; fills ppl_seed / ppl_sample on every sample scored.
std::vector<AdversarialSample> perplexity_filter(
    std::vector<AdversarialSample> samples,
    const std::map<int64_t, std::vector<std::string>>& seed_tokens_by_pair,
    const SentenceScorer& scorer, double max_ratio = 1.2);

struct RankedAttractor {
  std::string lemma;
  double score;
};

// score(a) = DB(a, adv_sc) - DB(a, seed_sc), per word; descending, ties by lemma.
std::vector<RankedAttractor> rank_attractors(const AttractorTable& table,
                                             int seed_sc, int adv_sc,
                                             Measure measure,
                                             PpmiMode mode = PpmiMode::Log);

struct AdvChallenge {
  std::vector<AdversarialSample> samples;
  bool truncated = false;  // fewer than k were available
};

AdvChallenge build_adversarial_challenge_set(
    std::vector<AdversarialSample> samples, std::size_t k = 10000,
    std::size_t per_homograph_cap = 1000,
    const std::set<Perturbation>& allowed = {Perturbation::IH, Perturbation::RH});

struct AttackOutcome {
  int64_t sample_id = 0;
  Verdict seed_verdict = Verdict::Unaligned;
  Verdict sample_verdict = Verdict::Unaligned;
  int predicted_cluster = -1;
  bool success = false;
  bool invalid_seed = false;  // seed itself was not translated correctly
};

// Success iff the seed is Correct and the sample is an Error predicting
// exactly the sample's adversarial cluster.
AttackOutcome judge_attack(const WsdOutcome& seed_outcome,
                           const WsdOutcome& sample_outcome,
                           const AdversarialSample& sample);

struct JaccardMatrix {
  std::vector<std::string> models;
  std::vector<std::vector<double>> values;
  bool empty_pair_flag = false;  // an off-diagonal pair had two empty sets
};

// Pairwise Jaccard similarity of successful-attack id sets; needs >= 2 models.
JaccardMatrix transferability(
    const std::map<std::string, std::set<int64_t>>& success_sets);

void save_samples(const std::string& path,
                  const std::vector<AdversarialSample>& samples);
std::vector<AdversarialSample> load_samples(const std::string& path);

void save_attacks(const std::string& path,
                  const std::vector<AttackOutcome>& attacks,
                  const std::string& model_name);
// model_name -> successful sample ids (reads files written by save_attacks).
void load_attack_successes(const std::string& path,
                           std::map<std::string, std::set<int64_t>>& into);

void save_jaccard(const std::string& path, const JaccardMatrix& matrix);

OracleScores load_oracle_scores(const std::string& path);

void save_seed_report(const std::string& path, const SeedSelectionReport& r);

}  // namespace wsdbias
