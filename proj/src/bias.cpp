#include "wsdbias/bias.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "wsdbias/error.hpp"
#include "wsdbias/tsv.hpp"

namespace wsdbias {

std::vector<AnnotatedPair> extract_homograph_pairs(
    const std::vector<ParallelPair>& pairs, const SenseLexicon& lexicon,
    const std::vector<AlignmentLinks>& alignments, ExtractionReport* report) {
  if (alignments.size() != pairs.size())
    fail("extract_homograph_pairs: " + std::to_string(alignments.size()) +
         " alignments for " + std::to_string(pairs.size()) + " pairs");

  ExtractionReport local;
  std::vector<AnnotatedPair> out;
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    const auto& pair = pairs[pi];
    const auto& links = alignments[pi].links;
    ++local.pairs_scanned;
    std::map<std::string, int> first_occurrence;
    for (std::size_t i = 0; i < pair.src_lemmas.size(); ++i) {
      const std::string& lemma = pair.src_lemmas[i];
      if (!lexicon.contains(lemma)) continue;
      first_occurrence.emplace(lemma, static_cast<int>(i));
    }
    for (const auto& [homograph, pos] : first_occurrence) {
      ++local.candidates;
      auto link = links.find(pos);
      if (link == links.end()) {
        ++local.skipped_unaligned;
        continue;
      }
      int tgt_pos = link->second;
      if (tgt_pos < 0 || tgt_pos >= static_cast<int>(pair.tgt_lemmas.size())) {
        ++local.skipped_unaligned;
        continue;
      }
      LookupResult res = lexicon.lookup_cluster(
          homograph, pair.tgt_lemmas[static_cast<std::size_t>(tgt_pos)]);
      if (res.kind == ClusterMatch::Unknown) {
        ++local.skipped_unknown;
        continue;
      }
      if (res.kind == ClusterMatch::Ambiguous) {
        ++local.skipped_ambiguous;
        continue;
      }
      ++local.annotated;
      out.push_back({pair.id, homograph, pos, res.cluster_id, tgt_pos});
    }
  }
  if (report) *report = local;
  return out;
}

int64_t AttractorTable::total_tokens() const {
  int64_t n = 0;
  for (const auto& [sc, total] : cluster_totals) n += total;
  return n;
}

std::map<std::string, AttractorTable> build_attractor_tables(
    const std::vector<AnnotatedPair>& annotated,
    const std::vector<ParallelPair>& pairs, const SenseLexicon& lexicon) {
  std::unordered_map<int64_t, const ParallelPair*> by_id;
  by_id.reserve(pairs.size());
  for (const auto& p : pairs) by_id[p.id] = &p;

  std::map<std::string, AttractorTable> tables;
  for (const auto& ap : annotated) {
    auto pit = by_id.find(ap.pair_id);
    if (pit == by_id.end())
      fail("build_attractor_tables: pair id " + std::to_string(ap.pair_id) +
           " not in corpus");
    const ParallelPair& pair = *pit->second;

    auto [tit, inserted] = tables.emplace(ap.homograph, AttractorTable{});
    AttractorTable& table = tit->second;
    if (inserted) {
      table.homograph = ap.homograph;
      const HomographEntry* entry = lexicon.find(ap.homograph);
      if (!entry) fail("build_attractor_tables: homograph '" + ap.homograph +
                       "' missing from lexicon");
      for (const auto& c : entry->clusters) {
        table.cluster_ids.push_back(c.cluster_id);
        table.cluster_totals[c.cluster_id] = 0;
        table.pair_counts[c.cluster_id] = 0;
      }
    }

    table.pair_counts[ap.cluster_id] += 1;
    table.cluster_totals[ap.cluster_id] +=
        static_cast<int64_t>(pair.src_lemmas.size());
    for (const auto& w : pair.src_lemmas) {
      table.word_totals[w] += 1;
      if (w == ap.homograph) continue;  // not an attractor of its own senses
      table.counts[w][ap.cluster_id] += 1;
    }
  }
  return tables;
}

Measure measure_from_string(std::string_view s) {
  if (s == "FREQ" || s == "freq") return Measure::Freq;
  if (s == "PPMI" || s == "ppmi") return Measure::Ppmi;
  fail("unknown measure: '" + std::string(s) + "' (expected FREQ or PPMI)");
}

std::string_view measure_to_string(Measure m) {
  return m == Measure::Freq ? "FREQ" : "PPMI";
}

int64_t freq(const AttractorTable& table, const std::string& word, int sc) {
  auto wit = table.counts.find(word);
  if (wit == table.counts.end()) return 0;
  auto cit = wit->second.find(sc);
  return cit == wit->second.end() ? 0 : cit->second;
}

double ppmi(const AttractorTable& table, const std::string& word, int sc,
            PpmiMode mode) {
  int64_t joint = freq(table, word, sc);
  if (joint == 0) return 0.0;
  auto wit = table.word_totals.find(word);
  auto cit = table.cluster_totals.find(sc);
  if (wit == table.word_totals.end() || cit == table.cluster_totals.end())
    return 0.0;
  double n = static_cast<double>(table.total_tokens());
  double ratio = (static_cast<double>(joint) * n) /
                 (static_cast<double>(wit->second) * static_cast<double>(cit->second));
  if (mode == PpmiMode::Ratio) return std::max(ratio, 0.0);
  return std::max(std::log2(ratio), 0.0);
}

double db_value(const AttractorTable& table, const std::string& word, int sc,
                Measure measure, PpmiMode mode) {
  if (measure == Measure::Freq)
    return static_cast<double>(freq(table, word, sc));
  return ppmi(table, word, sc, mode);
}

double sentence_db(const AttractorTable& table,
                   const std::vector<std::string>& src_lemmas, int sc,
                   Measure measure, PpmiMode mode) {
  if (src_lemmas.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& w : src_lemmas) sum += db_value(table, w, sc, measure, mode);
  return sum / static_cast<double>(src_lemmas.size());
}

BiasProfile bias_profile(const AttractorTable& table,
                         const std::vector<std::string>& src_lemmas,
                         int correct_sc, Measure measure, PpmiMode mode) {
  if (table.cluster_ids.size() < 2)
    fail("bias_profile: homograph '" + table.homograph +
         "' has fewer than two clusters");
  BiasProfile prof;
  prof.db_correct = sentence_db(table, src_lemmas, correct_sc, measure, mode);
  bool first = true;
  for (int sc : table.cluster_ids) {
    if (sc == correct_sc) continue;
    double v = sentence_db(table, src_lemmas, sc, measure, mode);
    if (first || v > prof.db_incorrect) {  // ties keep the smaller cluster id
      prof.db_incorrect = v;
      prof.argmax_incorrect_sc = sc;
      first = false;
    }
  }
  prof.db_diff = prof.db_incorrect - prof.db_correct;
  return prof;
}

void export_attractor_tsv(const std::string& path,
                          const std::map<std::string, AttractorTable>& tables,
                          PpmiMode mode) {
  std::string out = "homograph\tcluster_id\tword\tcount\tppmi\n";
  for (const auto& [homograph, table] : tables) {
    struct Row {
      int sc;
      int64_t count;
      const std::string* word;
    };
    std::vector<Row> rows;
    for (const auto& [word, per_cluster] : table.counts)
      for (const auto& [sc, count] : per_cluster) rows.push_back({sc, count, &word});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (a.sc != b.sc) return a.sc < b.sc;
      if (a.count != b.count) return a.count > b.count;
      return *a.word < *b.word;
    });
    for (const auto& r : rows) {
      out += homograph;
      out += '\t';
      out += std::to_string(r.sc);
      out += '\t';
      out += *r.word;
      out += '\t';
      out += std::to_string(r.count);
      out += '\t';
      out += fmt_g(ppmi(table, *r.word, r.sc, mode));
      out += '\n';
    }
  }
  write_file(path, out);
}

void save_tables(const std::string& path,
                 const std::map<std::string, AttractorTable>& tables) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [homograph, table] : tables) {
    nlohmann::json jt;
    jt["cluster_ids"] = table.cluster_ids;
    nlohmann::json totals = nlohmann::json::object();
    for (const auto& [sc, v] : table.cluster_totals)
      totals[std::to_string(sc)] = v;
    jt["cluster_totals"] = totals;
    nlohmann::json pc = nlohmann::json::object();
    for (const auto& [sc, v] : table.pair_counts) pc[std::to_string(sc)] = v;
    jt["pair_counts"] = pc;
    nlohmann::json wt = nlohmann::json::object();
    for (const auto& [w, v] : table.word_totals) wt[w] = v;
    jt["word_totals"] = wt;
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [w, per_cluster] : table.counts) {
      nlohmann::json row = nlohmann::json::object();
      for (const auto& [sc, v] : per_cluster) row[std::to_string(sc)] = v;
      counts[w] = row;
    }
    jt["counts"] = counts;
    doc[homograph] = jt;
  }
  write_file(path, doc.dump(1, '\t') + "\n");
}

std::map<std::string, AttractorTable> load_tables(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open tables file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail("tables file " + path + ": invalid JSON: " + e.what());
  }
  std::map<std::string, AttractorTable> tables;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    AttractorTable t;
    t.homograph = it.key();
    const auto& jt = it.value();
    t.cluster_ids = jt.at("cluster_ids").get<std::vector<int>>();
    for (auto c = jt.at("cluster_totals").begin(); c != jt.at("cluster_totals").end(); ++c)
      t.cluster_totals[static_cast<int>(parse_i64(c.key()))] = c.value().get<int64_t>();
    for (auto c = jt.at("pair_counts").begin(); c != jt.at("pair_counts").end(); ++c)
      t.pair_counts[static_cast<int>(parse_i64(c.key()))] = c.value().get<int64_t>();
    for (auto c = jt.at("word_totals").begin(); c != jt.at("word_totals").end(); ++c)
      t.word_totals[c.key()] = c.value().get<int64_t>();
    for (auto w = jt.at("counts").begin(); w != jt.at("counts").end(); ++w)
      for (auto c = w.value().begin(); c != w.value().end(); ++c)
        t.counts[w.key()][static_cast<int>(parse_i64(c.key()))] =
            c.value().get<int64_t>();
    tables[it.key()] = std::move(t);
  }
  return tables;
}

void save_annotated(const std::string& path,
                    const std::vector<AnnotatedPair>& annotated) {
  std::string out = "pair_id\thomograph\tsrc_position\tcluster_id\ttgt_position\n";
  for (const auto& a : annotated) {
    out += std::to_string(a.pair_id) + "\t" + a.homograph + "\t" +
           std::to_string(a.src_position) + "\t" + std::to_string(a.cluster_id) +
           "\t" + std::to_string(a.tgt_position) + "\n";
  }
  write_file(path, out);
}

std::vector<AnnotatedPair> load_annotated(const std::string& path) {
  auto lines = read_lines(path);
  std::vector<AnnotatedPair> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {  // skip header
    if (lines[i].empty()) continue;
    auto cols = split_tab(lines[i]);
    if (cols.size() != 5)
      fail("annotated file " + path + " line " + std::to_string(i + 1) +
           ": expected 5 columns");
    AnnotatedPair a;
    a.pair_id = parse_i64(cols[0]);
    a.homograph = cols[1];
    a.src_position = static_cast<int>(parse_i64(cols[2]));
    a.cluster_id = static_cast<int>(parse_i64(cols[3]));
    a.tgt_position = static_cast<int>(parse_i64(cols[4]));
    out.push_back(std::move(a));
  }
  return out;
}

void save_extraction_report(const std::string& path, const ExtractionReport& r) {
  std::string out;
  out += "pairs_scanned\t" + std::to_string(r.pairs_scanned) + "\n";
  out += "candidates\t" + std::to_string(r.candidates) + "\n";
  out += "annotated\t" + std::to_string(r.annotated) + "\n";
  out += "skipped_unaligned\t" + std::to_string(r.skipped_unaligned) + "\n";
  out += "skipped_unknown\t" + std::to_string(r.skipped_unknown) + "\n";
  out += "skipped_ambiguous\t" + std::to_string(r.skipped_ambiguous) + "\n";
  write_file(path, out);
}

}  // namespace wsdbias
