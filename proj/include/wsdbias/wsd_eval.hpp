#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wsdbias/bias.hpp"
#include "wsdbias/stats.hpp"

namespace wsdbias {

enum class Verdict { Correct, Error, UnknownTranslation, Unaligned };

std::string_view verdict_to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

struct WsdOutcome {
  int64_t pair_id = 0;
  Verdict verdict = Verdict::UnknownTranslation;
  int cluster_id = -1;  // Correct: reference cluster; Error: predicted cluster
};

// extract_homograph_pairs plus the source-length >= min_len filter.
std::vector<AnnotatedPair> build_test_pool(
    const std::vector<ParallelPair>& heldout_pairs, const SenseLexicon& lexicon,
    const std::vector<AlignmentLinks>& alignments, std::size_t min_len = 10,
    ExtractionReport* report = nullptr);

// Classifies one hypothesis translation. A hypothesis lemma found in two or
// more clusters cannot be attributed to a single sense and is reported as
// UnknownTranslation.
WsdOutcome detect_wsd_error(const AnnotatedPair& annotated,
                            const std::vector<std::string>& hyp_lemmas,
                            const AlignmentLinks& src_to_hyp,
                            const SenseLexicon& lexicon);

enum class Selection { BiasTop, Random, RareSense };

struct ChallengeSet {
  std::string name;
  std::vector<int64_t> pair_ids;
  Selection selection = Selection::BiasTop;
  uint64_t seed = 0;  // meaningful for Random only
};

// Top-k pool pairs by FREQ-based db_diff, descending; ties to smaller id.
ChallengeSet build_bias_challenge_set(
    const std::vector<AnnotatedPair>& pool,
    const std::vector<ParallelPair>& pairs,
    const std::map<std::string, AttractorTable>& tables, std::size_t k);

// k pairs drawn without replacement with a fixed mt19937_64 stream; the
// resulting ids are emitted in ascending order.
ChallengeSet build_random_challenge_set(const std::vector<AnnotatedPair>& pool,
                                        std::size_t k, uint64_t seed);

// k pool pairs whose cluster has the fewest training pairs; ties to smaller id.
ChallengeSet build_rare_sense_set(
    const std::vector<AnnotatedPair>& pool,
    const std::map<std::string, AttractorTable>& tables, std::size_t k);

// |ids(a) and ids(b)| / |a|; requires equal sizes.
double set_overlap(const ChallengeSet& a, const ChallengeSet& b);

void save_challenge_set(const std::string& path, const ChallengeSet& set);

struct MeasureRow {
  std::string measure;
  bool degenerate = false;
  RbcResult rbc;
  MwuResult mwu;
};

struct CorrelationReport {
  std::size_t n_err = 0, n_ok = 0;
  std::size_t excluded_unknown = 0, excluded_unaligned = 0;
  bool thresholds_valid = false;
  EffectThresholds thresholds;
  std::vector<MeasureRow> rows;
};

// RBC and MWU between the Error and Correct groups for the seven measures
// FREQ_OK, PPMI_OK, FREQ_ERR, PPMI_ERR, FREQ_DIFF, PPMI_DIFF, LENGTH.
// outcomes is row-aligned with the pool (a sentence can contribute several
// pool rows, one per homograph).
CorrelationReport correlate_errors(
    const std::vector<AnnotatedPair>& pool,
    const std::vector<WsdOutcome>& outcomes,
    const std::map<std::string, AttractorTable>& tables,
    const std::vector<ParallelPair>& pairs, PpmiMode mode = PpmiMode::Log);

// TSV: measure, rbc, u, p, n_err, n_ok, small, medium, large.
void save_correlation_report(const std::string& path,
                             const CorrelationReport& report);

// TSV: pair_id, homograph, reference_cluster, predicted_cluster, verdict;
// one row per pool row, in pool order.
void save_outcomes(const std::string& path,
                   const std::vector<AnnotatedPair>& pool,
                   const std::vector<WsdOutcome>& outcomes);
std::vector<WsdOutcome> load_outcomes(const std::string& path);

}  // namespace wsdbias
