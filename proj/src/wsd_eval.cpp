#include "wsdbias/wsd_eval.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "wsdbias/error.hpp"
#include "wsdbias/tsv.hpp"

namespace wsdbias {

std::string_view verdict_to_string(Verdict v) {
  switch (v) {
    case Verdict::Correct: return "correct";
    case Verdict::Error: return "error";
    case Verdict::UnknownTranslation: return "unknown_translation";
    default: return "unaligned";
  }
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "correct") return Verdict::Correct;
  if (s == "error") return Verdict::Error;
  if (s == "unknown_translation") return Verdict::UnknownTranslation;
  if (s == "unaligned") return Verdict::Unaligned;
  fail("unknown verdict: '" + std::string(s) + "'");
}

std::vector<AnnotatedPair> build_test_pool(
    const std::vector<ParallelPair>& heldout_pairs, const SenseLexicon& lexicon,
    const std::vector<AlignmentLinks>& alignments, std::size_t min_len,
    ExtractionReport* report) {
  std::unordered_map<int64_t, std::size_t> lengths;
  for (const auto& p : heldout_pairs) lengths[p.id] = p.src_tokens.size();
  auto annotated = extract_homograph_pairs(heldout_pairs, lexicon, alignments, report);
  std::vector<AnnotatedPair> pool;
  pool.reserve(annotated.size());
  for (auto& a : annotated)
    if (lengths[a.pair_id] >= min_len) pool.push_back(std::move(a));
  return pool;
}

WsdOutcome detect_wsd_error(const AnnotatedPair& annotated,
                            const std::vector<std::string>& hyp_lemmas,
                            const AlignmentLinks& src_to_hyp,
                            const SenseLexicon& lexicon) {
  WsdOutcome out;
  out.pair_id = annotated.pair_id;
  auto link = src_to_hyp.links.find(annotated.src_position);
  if (link == src_to_hyp.links.end() || link->second < 0 ||
      link->second >= static_cast<int>(hyp_lemmas.size())) {
    out.verdict = Verdict::Unaligned;
    return out;
  }
  const std::string& hyp = hyp_lemmas[static_cast<std::size_t>(link->second)];
  LookupResult res = lexicon.lookup_cluster(annotated.homograph, hyp);
  if (res.kind != ClusterMatch::Cluster) {
    out.verdict = Verdict::UnknownTranslation;
    return out;
  }
  if (res.cluster_id == annotated.cluster_id) {
    out.verdict = Verdict::Correct;
    out.cluster_id = res.cluster_id;
  } else {
    out.verdict = Verdict::Error;
    out.cluster_id = res.cluster_id;
  }
  return out;
}

namespace {

const AttractorTable& table_for(const std::map<std::string, AttractorTable>& tables,
                                const std::string& homograph) {
  auto it = tables.find(homograph);
  if (it == tables.end())
    fail("no attractor table for homograph '" + homograph + "'");
  return it->second;
}

std::unordered_map<int64_t, const ParallelPair*> index_pairs(
    const std::vector<ParallelPair>& pairs) {
  std::unordered_map<int64_t, const ParallelPair*> by_id;
  by_id.reserve(pairs.size());
  for (const auto& p : pairs) by_id[p.id] = &p;
  return by_id;
}

const ParallelPair& pair_for(
    const std::unordered_map<int64_t, const ParallelPair*>& by_id, int64_t id) {
  auto it = by_id.find(id);
  if (it == by_id.end())
    fail("pair id " + std::to_string(id) + " not found in corpus");
  return *it->second;
}

}  // namespace

ChallengeSet build_bias_challenge_set(
    const std::vector<AnnotatedPair>& pool,
    const std::vector<ParallelPair>& pairs,
    const std::map<std::string, AttractorTable>& tables, std::size_t k) {
  if (k > pool.size())
    fail("build_bias_challenge_set: k=" + std::to_string(k) + " exceeds pool size " +
         std::to_string(pool.size()));
  auto by_id = index_pairs(pairs);
  struct Scored {
    int64_t id;
    double score;
  };
  std::vector<Scored> scored;
  scored.reserve(pool.size());
  for (const auto& a : pool) {
    const auto& pair = pair_for(by_id, a.pair_id);
    BiasProfile prof = bias_profile(table_for(tables, a.homograph),
                                    pair.src_lemmas, a.cluster_id, Measure::Freq);
    scored.push_back({a.pair_id, prof.db_diff});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  ChallengeSet set;
  set.name = "bias_top";
  set.selection = Selection::BiasTop;
  for (std::size_t i = 0; i < k; ++i) set.pair_ids.push_back(scored[i].id);
  return set;
}

ChallengeSet build_random_challenge_set(const std::vector<AnnotatedPair>& pool,
                                        std::size_t k, uint64_t seed) {
  if (k > pool.size())
    fail("build_random_challenge_set: k exceeds pool size");
  std::vector<int64_t> ids;
  ids.reserve(pool.size());
  for (const auto& a : pool) ids.push_back(a.pair_id);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng() % (ids.size() - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  ChallengeSet set;
  set.name = "random";
  set.selection = Selection::Random;
  set.seed = seed;
  set.pair_ids = std::move(ids);
  return set;
}

ChallengeSet build_rare_sense_set(
    const std::vector<AnnotatedPair>& pool,
    const std::map<std::string, AttractorTable>& tables, std::size_t k) {
  if (k > pool.size()) fail("build_rare_sense_set: k exceeds pool size");
  struct Ranked {
    int64_t id;
    int64_t cluster_pairs;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(pool.size());
  for (const auto& a : pool) {
    const AttractorTable& table = table_for(tables, a.homograph);
    auto it = table.pair_counts.find(a.cluster_id);
    int64_t n = it == table.pair_counts.end() ? 0 : it->second;
    ranked.push_back({a.pair_id, n});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.cluster_pairs != b.cluster_pairs) return a.cluster_pairs < b.cluster_pairs;
    return a.id < b.id;
  });
  ChallengeSet set;
  set.name = "rare_sense";
  set.selection = Selection::RareSense;
  for (std::size_t i = 0; i < k; ++i) set.pair_ids.push_back(ranked[i].id);
  return set;
}

double set_overlap(const ChallengeSet& a, const ChallengeSet& b) {
  if (a.pair_ids.size() != b.pair_ids.size())
    fail("set_overlap: size mismatch (" + std::to_string(a.pair_ids.size()) +
         " vs " + std::to_string(b.pair_ids.size()) + ")");
  std::unordered_set<int64_t> in_a(a.pair_ids.begin(), a.pair_ids.end());
  std::size_t common = 0;
  for (int64_t id : b.pair_ids) common += in_a.count(id);
  return static_cast<double>(common) / static_cast<double>(a.pair_ids.size());
}

void save_challenge_set(const std::string& path, const ChallengeSet& set) {
  std::string out;
  for (int64_t id : set.pair_ids) out += std::to_string(id) + "\n";
  write_file(path, out);
}

CorrelationReport correlate_errors(
    const std::vector<AnnotatedPair>& pool,
    const std::vector<WsdOutcome>& outcomes,
    const std::map<std::string, AttractorTable>& tables,
    const std::vector<ParallelPair>& pairs, PpmiMode mode) {
  if (outcomes.size() != pool.size())
    fail("correlate_errors: " + std::to_string(outcomes.size()) +
         " outcomes for a pool of " + std::to_string(pool.size()));
  auto by_id = index_pairs(pairs);

  struct Scores {
    double values[7];
  };
  std::vector<Scores> err_rows, ok_rows;
  CorrelationReport report;
  for (std::size_t row = 0; row < pool.size(); ++row) {
    const AnnotatedPair& a = pool[row];
    const WsdOutcome& outcome = outcomes[row];
    if (outcome.verdict == Verdict::UnknownTranslation) {
      ++report.excluded_unknown;
      continue;
    }
    if (outcome.verdict == Verdict::Unaligned) {
      ++report.excluded_unaligned;
      continue;
    }
    const auto& pair = pair_for(by_id, a.pair_id);
    const AttractorTable& table = table_for(tables, a.homograph);
    BiasProfile freq_prof =
        bias_profile(table, pair.src_lemmas, a.cluster_id, Measure::Freq, mode);
    BiasProfile ppmi_prof =
        bias_profile(table, pair.src_lemmas, a.cluster_id, Measure::Ppmi, mode);
    Scores s{{freq_prof.db_correct, ppmi_prof.db_correct, freq_prof.db_incorrect,
              ppmi_prof.db_incorrect, freq_prof.db_diff, ppmi_prof.db_diff,
              static_cast<double>(pair.src_tokens.size())}};
    if (outcome.verdict == Verdict::Error)
      err_rows.push_back(s);
    else
      ok_rows.push_back(s);
  }

  report.n_err = err_rows.size();
  report.n_ok = ok_rows.size();
  static const char* kMeasures[7] = {"FREQ_OK",   "PPMI_OK",   "FREQ_ERR",
                                     "PPMI_ERR",  "FREQ_DIFF", "PPMI_DIFF",
                                     "LENGTH"};
  bool groups_ok = !err_rows.empty() && !ok_rows.empty();
  if (groups_ok) {
    double p1 = static_cast<double>(report.n_err) /
                static_cast<double>(report.n_err + report.n_ok);
    report.thresholds = adjusted_effect_thresholds(p1);
    report.thresholds_valid = true;
  }
  for (int m = 0; m < 7; ++m) {
    MeasureRow row;
    row.measure = kMeasures[m];
    if (!groups_ok) {
      row.degenerate = true;
      report.rows.push_back(std::move(row));
      continue;
    }
    std::vector<double> err_scores, ok_scores;
    err_scores.reserve(err_rows.size());
    ok_scores.reserve(ok_rows.size());
    for (const auto& s : err_rows) err_scores.push_back(s.values[m]);
    for (const auto& s : ok_rows) ok_scores.push_back(s.values[m]);
    try {
      row.rbc = rank_biserial(err_scores, ok_scores);
      row.mwu = mann_whitney_u(err_scores, ok_scores);
    } catch (const Error&) {
      row.degenerate = true;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void save_correlation_report(const std::string& path,
                             const CorrelationReport& report) {
  std::string out =
      "measure\trbc\tu\tp\tn_err\tn_ok\tsmall\tmedium\tlarge\n";
  for (const auto& row : report.rows) {
    out += row.measure;
    out += '\t';
    if (row.degenerate) {
      out += "degenerate\tdegenerate\tdegenerate";
    } else {
      out += fmt_g(row.rbc.rbc) + "\t" + fmt_g(row.mwu.u_stat) + "\t" +
             fmt_g(row.mwu.p_two_sided);
    }
    out += '\t' + std::to_string(report.n_err) + '\t' + std::to_string(report.n_ok);
    if (report.thresholds_valid) {
      for (double t : report.thresholds.thresholds) out += '\t' + fmt_g(t);
    } else {
      out += "\tdegenerate\tdegenerate\tdegenerate";
    }
    out += '\n';
  }
  out += "# excluded_unknown\t" + std::to_string(report.excluded_unknown) + "\n";
  out += "# excluded_unaligned\t" + std::to_string(report.excluded_unaligned) + "\n";
  write_file(path, out);
}

void save_outcomes(const std::string& path,
                   const std::vector<AnnotatedPair>& pool,
                   const std::vector<WsdOutcome>& outcomes) {
  if (outcomes.size() != pool.size())
    fail("save_outcomes: outcome/pool size mismatch");
  std::string out =
      "pair_id\thomograph\treference_cluster\tpredicted_cluster\tverdict\n";
  for (std::size_t row = 0; row < pool.size(); ++row) {
    const AnnotatedPair& a = pool[row];
    const WsdOutcome& o = outcomes[row];
    std::string predicted =
        (o.verdict == Verdict::Correct || o.verdict == Verdict::Error)
            ? std::to_string(o.cluster_id)
            : "-";
    out += std::to_string(a.pair_id) + "\t" + a.homograph + "\t" +
           std::to_string(a.cluster_id) + "\t" + predicted + "\t" +
           std::string(verdict_to_string(o.verdict)) + "\n";
  }
  write_file(path, out);
}

std::vector<WsdOutcome> load_outcomes(const std::string& path) {
  auto lines = read_lines(path);
  std::vector<WsdOutcome> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    auto cols = split_tab(lines[i]);
    if (cols.size() != 5)
      fail("outcomes file " + path + " line " + std::to_string(i + 1) +
           ": expected 5 columns");
    WsdOutcome o;
    o.pair_id = parse_i64(cols[0]);
    o.verdict = verdict_from_string(cols[4]);
    o.cluster_id = cols[3] == "-" ? -1 : static_cast<int>(parse_i64(cols[3]));
    out.push_back(o);
  }
  return out;
}

}  // namespace wsdbias
