#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wsdbias/aligner.hpp"
#include "wsdbias/corpus.hpp"
#include "wsdbias/lexicon.hpp"

namespace wsdbias {

struct AnnotatedPair {
  int64_t pair_id = 0;
  std::string homograph;  // source lemma
  int src_position = 0;   // index of the homograph token
  int cluster_id = 0;     // sense cluster of the reference translation
  int tgt_position = 0;   // aligned target index
};

struct ExtractionReport {
  std::size_t pairs_scanned = 0;
  std::size_t candidates = 0;  // (pair, homograph) occurrences considered
  std::size_t annotated = 0;
  std::size_t skipped_unaligned = 0;
  std::size_t skipped_unknown = 0;
  std::size_t skipped_ambiguous = 0;
};

// One pair per lexicon homograph found on the source side (first occurrence
// only) whose aligned target lemma resolves to exactly one sense cluster.
std::vector<AnnotatedPair> extract_homograph_pairs(
    const std::vector<ParallelPair>& pairs, const SenseLexicon& lexicon,
    const std::vector<AlignmentLinks>& alignments,
    ExtractionReport* report = nullptr);

// Per-homograph co-occurrence statistics. The homograph lemma itself never
// appears in counts; word_totals and cluster_totals cover all tokens of the
// homograph's pairs, so sum_w counts(w, sc) <= cluster_totals(sc).
struct AttractorTable {
  std::string homograph;
  std::vector<int> cluster_ids;  // all clusters declared by the lexicon
  std::map<std::string, std::map<int, int64_t>> counts;  // word -> sc -> count
  std::map<int, int64_t> cluster_totals;  // sc -> token count of its pairs
  std::map<std::string, int64_t> word_totals;
  std::map<int, int64_t> pair_counts;  // sc -> number of training pairs

  int64_t total_tokens() const;  // N over all of this homograph's pairs
};

std::map<std::string, AttractorTable> build_attractor_tables(
    const std::vector<AnnotatedPair>& annotated,
    const std::vector<ParallelPair>& pairs, const SenseLexicon& lexicon);

enum class Measure { Freq, Ppmi };
enum class PpmiMode { Log, Ratio };

Measure measure_from_string(std::string_view s);
std::string_view measure_to_string(Measure m);

int64_t freq(const AttractorTable& table, const std::string& word, int sc);

// max(log2(P(w,sc) / (P(w) P(sc))), 0); 0 when counts(w,sc) == 0.
// PpmiMode::Ratio returns the raw probability ratio instead of its log.
double ppmi(const AttractorTable& table, const std::string& word, int sc,
            PpmiMode mode = PpmiMode::Log);

double db_value(const AttractorTable& table, const std::string& word, int sc,
                Measure measure, PpmiMode mode = PpmiMode::Log);

// Mean per-token bias over every position; non-attractors contribute 0.
double sentence_db(const AttractorTable& table,
                   const std::vector<std::string>& src_lemmas, int sc,
                   Measure measure, PpmiMode mode = PpmiMode::Log);

struct BiasProfile {
  double db_correct = 0;
  double db_incorrect = 0;
  double db_diff = 0;
  int argmax_incorrect_sc = -1;
};

// db_incorrect maximizes over the lexicon-declared clusters other than
// correct_sc; ties resolve to the smaller cluster id.
BiasProfile bias_profile(const AttractorTable& table,
                         const std::vector<std::string>& src_lemmas,
                         int correct_sc, Measure measure,
                         PpmiMode mode = PpmiMode::Log);

// TSV report: homograph, cluster_id, word, count, ppmi; count-descending
// within each (homograph, cluster).
void export_attractor_tsv(const std::string& path,
                          const std::map<std::string, AttractorTable>& tables,
                          PpmiMode mode = PpmiMode::Log);

void save_tables(const std::string& path,
                 const std::map<std::string, AttractorTable>& tables);
std::map<std::string, AttractorTable> load_tables(const std::string& path);

void save_annotated(const std::string& path,
                    const std::vector<AnnotatedPair>& annotated);
std::vector<AnnotatedPair> load_annotated(const std::string& path);

void save_extraction_report(const std::string& path, const ExtractionReport& r);

}  // namespace wsdbias
