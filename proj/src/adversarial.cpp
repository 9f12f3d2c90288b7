#include "wsdbias/adversarial.hpp"

#include <algorithm>
#include <unordered_map>

#include "wsdbias/error.hpp"
#include "wsdbias/text.hpp"
#include "wsdbias/tsv.hpp"

namespace wsdbias {

bool is_comparative_or_superlative(std::string_view adj) {
  static const std::set<std::string_view> kIrregular = {
      "more",  "most",  "less",  "least",   "better",   "best",
      "worse", "worst", "elder", "eldest",  "lesser",   "further",
      "furthest", "farther", "farthest"};
  if (kIrregular.count(adj)) return true;
  auto ends_with = [&](std::string_view suffix) {
    return adj.size() > suffix.size() &&
           adj.substr(adj.size() - suffix.size()) == suffix;
  };
  return ends_with("er") || ends_with("est");
}

const std::set<std::string>* ModifierTable::sense(const std::string& homograph,
                                                  int sc) const {
  auto hit = sense_modifiers.find(homograph);
  if (hit == sense_modifiers.end()) return nullptr;
  auto cit = hit->second.find(sc);
  return cit == hit->second.end() ? nullptr : &cit->second;
}

const std::set<std::string>* ModifierTable::noun(const std::string& lemma) const {
  auto it = noun_modifiers.find(lemma);
  return it == noun_modifiers.end() ? nullptr : &it->second;
}

namespace {

std::vector<Pos> token_pos(const ParallelPair& pair, const LemmaTable& lemmas) {
  std::vector<Pos> pos;
  pos.reserve(pair.src_tokens.size());
  for (const auto& tok : pair.src_tokens) pos.push_back(lemmas.lookup(tok).pos);
  return pos;
}

// Skips forms whose token or lemma carries a comparative/superlative shape.
bool excluded_adjective(const std::string& token, const std::string& lemma) {
  return is_comparative_or_superlative(lowercase(token)) ||
         is_comparative_or_superlative(lemma);
}

}  // namespace

ModifierTable collect_modifier_table(const std::vector<ParallelPair>& training_pairs,
                                     const std::vector<AnnotatedPair>& annotated,
                                     const LemmaTable& lemmas) {
  ModifierTable table;
  std::unordered_map<int64_t, const ParallelPair*> by_id;
  by_id.reserve(training_pairs.size());
  for (const auto& p : training_pairs) by_id[p.id] = &p;

  auto record_chain = [&](const ParallelPair& pair, const std::vector<Pos>& pos,
                          int noun_index, std::set<std::string>& into) {
    for (int j = noun_index - 1; j >= 0 && pos[static_cast<std::size_t>(j)] == Pos::Adj;
         --j) {
      const std::string& lemma = pair.src_lemmas[static_cast<std::size_t>(j)];
      if (!excluded_adjective(pair.src_tokens[static_cast<std::size_t>(j)], lemma))
        into.insert(lemma);
    }
  };

  for (const auto& pair : training_pairs) {
    std::vector<Pos> pos = token_pos(pair, lemmas);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (pos[i] != Pos::Noun) continue;
      auto& into = table.noun_modifiers[pair.src_lemmas[i]];
      record_chain(pair, pos, static_cast<int>(i), into);
      if (into.empty()) table.noun_modifiers.erase(pair.src_lemmas[i]);
    }
  }
  for (const auto& ap : annotated) {
    auto pit = by_id.find(ap.pair_id);
    if (pit == by_id.end())
      fail("collect_modifier_table: pair id " + std::to_string(ap.pair_id) +
           " not in training corpus");
    const ParallelPair& pair = *pit->second;
    std::vector<Pos> pos = token_pos(pair, lemmas);
    auto& into = table.sense_modifiers[ap.homograph][ap.cluster_id];
    record_chain(pair, pos, ap.src_position, into);
    if (into.empty()) {
      table.sense_modifiers[ap.homograph].erase(ap.cluster_id);
      if (table.sense_modifiers[ap.homograph].empty())
        table.sense_modifiers.erase(ap.homograph);
    }
  }
  return table;
}

std::string_view perturbation_to_string(Perturbation p) {
  switch (p) {
    case Perturbation::IH: return "IH";
    case Perturbation::RH: return "RH";
    case Perturbation::InH: return "InH";
    default: return "RnH";
  }
}

Perturbation perturbation_from_string(std::string_view s) {
  if (s == "IH") return Perturbation::IH;
  if (s == "RH") return Perturbation::RH;
  if (s == "InH") return Perturbation::InH;
  if (s == "RnH") return Perturbation::RnH;
  fail("unknown perturbation: '" + std::string(s) + "'");
}

int homograph_position_in_sample(const AdversarialSample& s) {
  bool insertion =
      s.perturbation == Perturbation::IH || s.perturbation == Perturbation::InH;
  if (insertion && s.position <= s.seed_src_position)
    return s.seed_src_position + 1;
  return s.seed_src_position;
}

std::vector<AnnotatedPair> select_seeds(
    const std::vector<AnnotatedPair>& pool,
    const std::vector<ParallelPair>& pairs,
    const std::map<std::string, AttractorTable>& tables,
    const OracleScores* oracle, double db_reject_fraction, std::size_t min_len,
    SeedSelectionReport* report) {
  if (db_reject_fraction < 0.0 || db_reject_fraction >= 1.0)
    fail("select_seeds: db_reject_fraction must lie in [0,1)");
  std::unordered_map<int64_t, const ParallelPair*> by_id;
  by_id.reserve(pairs.size());
  for (const auto& p : pairs) by_id[p.id] = &p;

  struct Row {
    const AnnotatedPair* seed;
    const ParallelPair* pair;
    BiasProfile freq_prof;
  };
  std::vector<Row> rows;
  rows.reserve(pool.size());
  for (const auto& a : pool) {
    auto pit = by_id.find(a.pair_id);
    if (pit == by_id.end())
      fail("select_seeds: pair id " + std::to_string(a.pair_id) + " not in corpus");
    auto tit = tables.find(a.homograph);
    if (tit == tables.end())
      fail("select_seeds: no attractor table for homograph '" + a.homograph + "'");
    Row row{&a, pit->second,
            bias_profile(tit->second, pit->second->src_lemmas, a.cluster_id,
                         Measure::Freq)};
    rows.push_back(std::move(row));
  }

  // The bias cut is computed over the whole pool; ties at the cut reject.
  std::size_t reject_count = static_cast<std::size_t>(
      db_reject_fraction * static_cast<double>(rows.size()));
  double threshold = 0.0;
  bool has_threshold = reject_count > 0;
  if (has_threshold) {
    std::vector<double> biases;
    biases.reserve(rows.size());
    for (const auto& r : rows) biases.push_back(r.freq_prof.db_incorrect);
    std::sort(biases.begin(), biases.end(), std::greater<double>());
    threshold = biases[reject_count - 1];
  }

  SeedSelectionReport local;
  std::vector<AnnotatedPair> selected;
  for (const auto& row : rows) {
    ++local.considered;
    if (row.pair->src_tokens.size() < min_len) {
      ++local.rejected_length;
      continue;
    }
    bool oracle_ok;
    if (oracle) {
      auto oit = oracle->find(row.seed->pair_id);
      if (oit == oracle->end()) {
        ++local.rejected_missing_oracle;
        continue;
      }
      // The reference cluster must be the unique argmax.
      double ref_score = 0.0;
      bool ref_found = false;
      double best_other = 0.0;
      bool other_found = false;
      for (const auto& [sc, score] : oit->second) {
        if (sc == row.seed->cluster_id) {
          ref_score = score;
          ref_found = true;
        } else if (!other_found || score > best_other) {
          best_other = score;
          other_found = true;
        }
      }
      oracle_ok = ref_found && (!other_found || ref_score > best_other);
    } else {
      oracle_ok = row.freq_prof.db_correct >= row.freq_prof.db_incorrect;
    }
    if (!oracle_ok) {
      ++local.rejected_oracle;
      continue;
    }
    if (has_threshold && row.freq_prof.db_incorrect >= threshold) {
      ++local.rejected_bias;
      continue;
    }
    ++local.selected;
    selected.push_back(*row.seed);
  }
  if (report) *report = local;
  return selected;
}

namespace {

struct SiteContext {
  std::vector<Pos> pos;
  int n = 0;

  bool is_noun(int i) const { return pos[static_cast<std::size_t>(i)] == Pos::Noun; }
  bool is_adj(int i) const { return pos[static_cast<std::size_t>(i)] == Pos::Adj; }
  bool in_compound(int i) const {
    return (i > 0 && is_noun(i - 1)) || (i + 1 < n && is_noun(i + 1));
  }
  bool preceded_by_adjective(int i) const { return i > 0 && is_adj(i - 1); }
  // Single-adjective chain directly before the noun at i.
  bool single_adj_chain(int i) const {
    return i > 0 && is_adj(i - 1) && (i < 2 || !is_adj(i - 2));
  }
};

std::vector<std::string> with_insertion(const std::vector<std::string>& tokens,
                                        int at, const std::string& value) {
  std::vector<std::string> out;
  out.reserve(tokens.size() + 1);
  out.insert(out.end(), tokens.begin(), tokens.begin() + at);
  out.push_back(value);
  out.insert(out.end(), tokens.begin() + at, tokens.end());
  return out;
}

std::vector<std::string> with_replacement(const std::vector<std::string>& tokens,
                                          int at, const std::string& value) {
  std::vector<std::string> out = tokens;
  out[static_cast<std::size_t>(at)] = value;
  return out;
}

}  // namespace

std::vector<AdversarialSample> generate_samples(const AnnotatedPair& seed,
                                                const ParallelPair& pair,
                                                const AttractorTable& table,
                                                const ModifierTable& modifiers,
                                                const LemmaTable& lemmas) {
  std::vector<AdversarialSample> out;
  SiteContext ctx;
  ctx.pos = token_pos(pair, lemmas);
  ctx.n = static_cast<int>(ctx.pos.size());
  int hpos = seed.src_position;
  if (hpos < 0 || hpos >= ctx.n)
    fail("generate_samples: homograph position out of range for pair " +
         std::to_string(pair.id));

  auto base_sample = [&](Perturbation type, const std::string& attractor,
                         int adv_sc, int position) {
    AdversarialSample s;
    s.seed_pair_id = seed.pair_id;
    s.homograph = seed.homograph;
    s.seed_cluster_id = seed.cluster_id;
    s.seed_src_position = hpos;
    s.perturbation = type;
    s.attractor = attractor;
    s.adv_cluster_id = adv_sc;
    s.position = position;
    s.score_freq_diff = static_cast<double>(freq(table, attractor, adv_sc)) -
                        static_cast<double>(freq(table, attractor, seed.cluster_id));
    return s;
  };

  const std::set<std::string>* seed_sense_modifiers =
      modifiers.sense(seed.homograph, seed.cluster_id);

  bool homograph_compound = ctx.in_compound(hpos);
  bool ih_site_ok = !homograph_compound && !ctx.preceded_by_adjective(hpos);
  bool rh_site_ok = !homograph_compound && ctx.single_adj_chain(hpos);

  for (int adv_sc : table.cluster_ids) {
    if (adv_sc == seed.cluster_id) continue;

    if (seed_sense_modifiers && (ih_site_ok || rh_site_ok)) {
      for (const auto& attractor : *seed_sense_modifiers) {
        if (freq(table, attractor, adv_sc) <= 0) continue;
        if (ih_site_ok) {
          AdversarialSample s = base_sample(Perturbation::IH, attractor, adv_sc, hpos);
          s.perturbed_tokens = with_insertion(pair.src_tokens, hpos, attractor);
          out.push_back(std::move(s));
        }
        if (rh_site_ok) {
          const std::string& replaced = pair.src_tokens[static_cast<std::size_t>(hpos - 1)];
          if (pair.src_lemmas[static_cast<std::size_t>(hpos - 1)] != attractor) {
            AdversarialSample s =
                base_sample(Perturbation::RH, attractor, adv_sc, hpos - 1);
            s.replaced_token = replaced;
            s.perturbed_tokens = with_replacement(pair.src_tokens, hpos - 1, attractor);
            out.push_back(std::move(s));
          }
        }
      }
    }

    for (int q = 0; q < ctx.n; ++q) {
      if (q == hpos || !ctx.is_noun(q)) continue;
      if (pair.src_lemmas[static_cast<std::size_t>(q)] == seed.homograph) continue;
      if (ctx.in_compound(q)) continue;
      const std::set<std::string>* noun_mods =
          modifiers.noun(pair.src_lemmas[static_cast<std::size_t>(q)]);
      if (!noun_mods) continue;
      bool inh_ok = !ctx.preceded_by_adjective(q);
      bool rnh_ok = ctx.single_adj_chain(q);
      if (!inh_ok && !rnh_ok) continue;
      for (const auto& attractor : *noun_mods) {
        if (freq(table, attractor, adv_sc) <= 0) continue;
        if (inh_ok) {
          AdversarialSample s = base_sample(Perturbation::InH, attractor, adv_sc, q);
          s.perturbed_tokens = with_insertion(pair.src_tokens, q, attractor);
          out.push_back(std::move(s));
        }
        if (rnh_ok) {
          const std::string& replaced = pair.src_tokens[static_cast<std::size_t>(q - 1)];
          if (pair.src_lemmas[static_cast<std::size_t>(q - 1)] != attractor) {
            AdversarialSample s =
                base_sample(Perturbation::RnH, attractor, adv_sc, q - 1);
            s.replaced_token = replaced;
            s.perturbed_tokens = with_replacement(pair.src_tokens, q - 1, attractor);
            out.push_back(std::move(s));
          }
        }
      }
    }
  }
  return out;
}

std::vector<AdversarialSample> perplexity_filter(
    std::vector<AdversarialSample> samples,
    const std::map<int64_t, std::vector<std::string>>& seed_tokens_by_pair,
    const SentenceScorer& scorer, double max_ratio) {
  std::map<int64_t, double> seed_ppl;
  std::vector<AdversarialSample> kept;
  kept.reserve(samples.size());
  for (auto& s : samples) {
    auto sit = seed_tokens_by_pair.find(s.seed_pair_id);
    if (sit == seed_tokens_by_pair.end())
      fail("perplexity_filter: no seed tokens for pair " +
           std::to_string(s.seed_pair_id));
    auto [pit, inserted] = seed_ppl.emplace(s.seed_pair_id, 0.0);
    if (inserted) pit->second = scorer(sit->second);
    s.ppl_seed = pit->second;
    s.ppl_sample = scorer(s.perturbed_tokens);
    if (s.ppl_sample <= max_ratio * s.ppl_seed)  // "more than 20%" is strict
      kept.push_back(std::move(s));
  }
  return kept;
}

std::vector<RankedAttractor> rank_attractors(const AttractorTable& table,
                                             int seed_sc, int adv_sc,
                                             Measure measure, PpmiMode mode) {
  std::vector<RankedAttractor> ranked;
  for (const auto& [word, per_cluster] : table.counts) {
    bool relevant = per_cluster.count(adv_sc) || per_cluster.count(seed_sc);
    if (!relevant) continue;
    double score = db_value(table, word, adv_sc, measure, mode) -
                   db_value(table, word, seed_sc, measure, mode);
    ranked.push_back({word, score});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedAttractor& a, const RankedAttractor& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.lemma < b.lemma;
            });
  return ranked;
}

AdvChallenge build_adversarial_challenge_set(
    std::vector<AdversarialSample> samples, std::size_t k,
    std::size_t per_homograph_cap, const std::set<Perturbation>& allowed) {
  std::vector<AdversarialSample> eligible;
  eligible.reserve(samples.size());
  for (auto& s : samples)
    if (allowed.count(s.perturbation)) eligible.push_back(std::move(s));
  std::sort(eligible.begin(), eligible.end(),
            [](const AdversarialSample& a, const AdversarialSample& b) {
              if (a.score_freq_diff != b.score_freq_diff)
                return a.score_freq_diff > b.score_freq_diff;
              return a.sample_id < b.sample_id;
            });
  AdvChallenge out;
  std::map<std::string, std::size_t> per_homograph;
  for (auto& s : eligible) {
    if (out.samples.size() >= k) break;
    auto& used = per_homograph[s.homograph];
    if (used >= per_homograph_cap) continue;
    ++used;
    out.samples.push_back(std::move(s));
  }
  out.truncated = out.samples.size() < k;
  return out;
}

AttackOutcome judge_attack(const WsdOutcome& seed_outcome,
                           const WsdOutcome& sample_outcome,
                           const AdversarialSample& sample) {
  AttackOutcome out;
  out.sample_id = sample.sample_id;
  out.seed_verdict = seed_outcome.verdict;
  out.sample_verdict = sample_outcome.verdict;
  if (sample_outcome.verdict == Verdict::Error)
    out.predicted_cluster = sample_outcome.cluster_id;
  out.invalid_seed = seed_outcome.verdict != Verdict::Correct;
  out.success = seed_outcome.verdict == Verdict::Correct &&
                sample_outcome.verdict == Verdict::Error &&
                sample_outcome.cluster_id == sample.adv_cluster_id;
  return out;
}

JaccardMatrix transferability(
    const std::map<std::string, std::set<int64_t>>& success_sets) {
  if (success_sets.size() < 2)
    fail("transferability: need at least two models");
  JaccardMatrix m;
  for (const auto& [name, ids] : success_sets) m.models.push_back(name);
  std::size_t n = m.models.size();
  m.values.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = success_sets.at(m.models[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        m.values[i][j] = 1.0;
        continue;
      }
      const auto& b = success_sets.at(m.models[j]);
      std::size_t common = 0;
      for (int64_t id : a) common += b.count(id);
      std::size_t unions = a.size() + b.size() - common;
      if (unions == 0) {
        m.values[i][j] = 0.0;
        m.empty_pair_flag = true;
      } else {
        m.values[i][j] =
            static_cast<double>(common) / static_cast<double>(unions);
      }
    }
  }
  return m;
}

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

void save_samples(const std::string& path,
                  const std::vector<AdversarialSample>& samples) {
  std::string out =
      "sample_id\tseed_pair_id\thomograph\tseed_cluster_id\tseed_src_position\t"
      "perturbation\tattractor\tadv_cluster_id\tposition\treplaced_token\t"
      "score_freq_diff\tppl_seed\tppl_sample\tsentence\n";
  for (const auto& s : samples) {
    out += std::to_string(s.sample_id) + "\t" + std::to_string(s.seed_pair_id) +
           "\t" + s.homograph + "\t" + std::to_string(s.seed_cluster_id) + "\t" +
           std::to_string(s.seed_src_position) + "\t" +
           std::string(perturbation_to_string(s.perturbation)) + "\t" +
           s.attractor + "\t" + std::to_string(s.adv_cluster_id) + "\t" +
           std::to_string(s.position) + "\t" +
           (s.replaced_token.empty() ? "-" : s.replaced_token) + "\t" +
           fmt_g(s.score_freq_diff) + "\t" + fmt_g(s.ppl_seed) + "\t" +
           fmt_g(s.ppl_sample) + "\t" + join_tokens(s.perturbed_tokens) + "\n";
  }
  write_file(path, out);
}

std::vector<AdversarialSample> load_samples(const std::string& path) {
  auto lines = read_lines(path);
  std::vector<AdversarialSample> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split_tab(lines[i]);
    if (cols.size() != 14)
      fail("samples file " + path + " line " + std::to_string(i + 1) +
           ": expected 14 columns, got " + std::to_string(cols.size()));
    AdversarialSample s;
    s.sample_id = parse_i64(cols[0]);
    s.seed_pair_id = parse_i64(cols[1]);
    s.homograph = cols[2];
    s.seed_cluster_id = static_cast<int>(parse_i64(cols[3]));
    s.seed_src_position = static_cast<int>(parse_i64(cols[4]));
    s.perturbation = perturbation_from_string(cols[5]);
    s.attractor = cols[6];
    s.adv_cluster_id = static_cast<int>(parse_i64(cols[7]));
    s.position = static_cast<int>(parse_i64(cols[8]));
    s.replaced_token = cols[9] == "-" ? "" : cols[9];
    s.score_freq_diff = parse_f64(cols[10]);
    s.ppl_seed = parse_f64(cols[11]);
    s.ppl_sample = parse_f64(cols[12]);
    std::size_t start = 0;
    const std::string& sent = cols[13];
    while (start < sent.size()) {
      std::size_t sp = sent.find(' ', start);
      if (sp == std::string::npos) {
        s.perturbed_tokens.push_back(sent.substr(start));
        break;
      }
      if (sp > start) s.perturbed_tokens.push_back(sent.substr(start, sp - start));
      start = sp + 1;
    }
    out.push_back(std::move(s));
  }
  return out;
}

void save_attacks(const std::string& path,
                  const std::vector<AttackOutcome>& attacks,
                  const std::string& model_name) {
  std::string out =
      "sample_id\tseed_verdict\tsample_verdict\tsuccess\tmodel\tinvalid_seed\n";
  for (const auto& a : attacks) {
    out += std::to_string(a.sample_id) + "\t" +
           std::string(verdict_to_string(a.seed_verdict)) + "\t" +
           std::string(verdict_to_string(a.sample_verdict)) + "\t" +
           (a.success ? "1" : "0") + "\t" + model_name + "\t" +
           (a.invalid_seed ? "1" : "0") + "\n";
  }
  write_file(path, out);
}

void load_attack_successes(const std::string& path,
                           std::map<std::string, std::set<int64_t>>& into) {
  auto lines = read_lines(path);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split_tab(lines[i]);
    if (cols.size() != 6)
      fail("attack report " + path + " line " + std::to_string(i + 1) +
           ": expected 6 columns");
    auto& set = into[cols[4]];
    if (cols[3] == "1") set.insert(parse_i64(cols[0]));
  }
}

void save_jaccard(const std::string& path, const JaccardMatrix& matrix) {
  std::string out = "model";
  for (const auto& name : matrix.models) out += "\t" + name;
  out += "\n";
  for (std::size_t i = 0; i < matrix.models.size(); ++i) {
    out += matrix.models[i];
    for (std::size_t j = 0; j < matrix.models.size(); ++j)
      out += "\t" + fmt_g(matrix.values[i][j]);
    out += "\n";
  }
  write_file(path, out);
}

OracleScores load_oracle_scores(const std::string& path) {
  auto lines = read_lines(path);
  OracleScores scores;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split_tab(lines[i]);
    if (cols.size() != 3)
      fail("oracle scores " + path + " line " + std::to_string(i + 1) +
           ": expected 3 columns (pair_id, cluster_id, score)");
    scores[parse_i64(cols[0])][static_cast<int>(parse_i64(cols[1]))] =
        parse_f64(cols[2]);
  }
  return scores;
}

void save_seed_report(const std::string& path, const SeedSelectionReport& r) {
  std::string out;
  out += "considered\t" + std::to_string(r.considered) + "\n";
  out += "rejected_length\t" + std::to_string(r.rejected_length) + "\n";
  out += "rejected_oracle\t" + std::to_string(r.rejected_oracle) + "\n";
  out += "rejected_missing_oracle\t" + std::to_string(r.rejected_missing_oracle) + "\n";
  out += "rejected_bias\t" + std::to_string(r.rejected_bias) + "\n";
  out += "selected\t" + std::to_string(r.selected) + "\n";
  write_file(path, out);
}

}  // namespace wsdbias
