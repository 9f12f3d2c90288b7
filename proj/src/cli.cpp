#include "wsdbias/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wsdbias/adversarial.hpp"
#include "wsdbias/aligner.hpp"
#include "wsdbias/bias.hpp"
#include "wsdbias/corpus.hpp"
#include "wsdbias/error.hpp"
#include "wsdbias/fluency.hpp"
#include "wsdbias/lexicon.hpp"
#include "wsdbias/tsv.hpp"
#include "wsdbias/wsd_eval.hpp"

namespace fs = std::filesystem;

namespace wsdbias {

namespace {

struct RunConfig {
  // Paths.
  std::string src, tgt, lemmas, lexicon, alignments, model, tables, pool, hyp;
  std::string seed_hyp, sample_hyp, lm, samples, oracle, corpus;
  std::string train_src, train_tgt, train_annotated;
  std::string out_dir;
  std::vector<std::string> attacks;
  std::string model_name = "model";

  // Numeric knobs.
  std::size_t min_len = 10;
  double db_reject_fraction = 0.10;
  double ppl_ratio = 1.2;
  std::size_t challenge_k = 3000;
  std::size_t adv_k = 10000;
  std::size_t per_homograph_cap = 1000;
  int em_iterations = 5;
  double tension = 4.0;
  double null_prior = 0.08;
  double discount = 0.75;
  int64_t lm_min_count = 1;
  double max_ratio = 2.0;

  std::string measure = "FREQ";
  std::string ppmi_mode = "log";
  std::string ppl_mode = "token";  // token: per-token ppl; sentence: joint prob
  std::string selection = "bias";
  std::string allowed = "IH,RH";
  uint64_t seed = 0;
  int threads = 1;
  bool deterministic = false;
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail("config file " + path + ": invalid JSON: " + e.what());
  }
  auto str = [&](const char* key, std::string& into) {
    if (doc.contains(key)) into = doc[key].get<std::string>();
  };
  str("src", cfg.src);
  str("tgt", cfg.tgt);
  str("lemmas", cfg.lemmas);
  str("lexicon", cfg.lexicon);
  str("alignments", cfg.alignments);
  str("model", cfg.model);
  str("tables", cfg.tables);
  str("pool", cfg.pool);
  str("hyp", cfg.hyp);
  str("seed_hyp", cfg.seed_hyp);
  str("sample_hyp", cfg.sample_hyp);
  str("lm", cfg.lm);
  str("samples", cfg.samples);
  str("oracle", cfg.oracle);
  str("corpus", cfg.corpus);
  str("train_src", cfg.train_src);
  str("train_tgt", cfg.train_tgt);
  str("train_annotated", cfg.train_annotated);
  str("out_dir", cfg.out_dir);
  str("model_name", cfg.model_name);
  str("measure", cfg.measure);
  str("ppmi_mode", cfg.ppmi_mode);
  str("ppl_mode", cfg.ppl_mode);
  str("selection", cfg.selection);
  str("allowed", cfg.allowed);
  if (doc.contains("min_len")) cfg.min_len = doc["min_len"].get<std::size_t>();
  if (doc.contains("db_reject_fraction"))
    cfg.db_reject_fraction = doc["db_reject_fraction"].get<double>();
  if (doc.contains("ppl_ratio")) cfg.ppl_ratio = doc["ppl_ratio"].get<double>();
  if (doc.contains("challenge_k")) cfg.challenge_k = doc["challenge_k"].get<std::size_t>();
  if (doc.contains("adv_k")) cfg.adv_k = doc["adv_k"].get<std::size_t>();
  if (doc.contains("per_homograph_cap"))
    cfg.per_homograph_cap = doc["per_homograph_cap"].get<std::size_t>();
  if (doc.contains("em_iterations")) cfg.em_iterations = doc["em_iterations"].get<int>();
  if (doc.contains("tension")) cfg.tension = doc["tension"].get<double>();
  if (doc.contains("null_prior")) cfg.null_prior = doc["null_prior"].get<double>();
  if (doc.contains("discount")) cfg.discount = doc["discount"].get<double>();
  if (doc.contains("lm_min_count")) cfg.lm_min_count = doc["lm_min_count"].get<int64_t>();
  if (doc.contains("max_ratio")) cfg.max_ratio = doc["max_ratio"].get<double>();
  if (doc.contains("seed")) cfg.seed = doc["seed"].get<uint64_t>();
  if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();
  if (doc.contains("deterministic")) cfg.deterministic = doc["deterministic"].get<bool>();
}

nlohmann::json config_json(const RunConfig& cfg, const std::string& command) {
  nlohmann::json doc;
  doc["command"] = command;
  doc["src"] = cfg.src;
  doc["tgt"] = cfg.tgt;
  doc["lemmas"] = cfg.lemmas;
  doc["lexicon"] = cfg.lexicon;
  doc["alignments"] = cfg.alignments;
  doc["model"] = cfg.model;
  doc["tables"] = cfg.tables;
  doc["pool"] = cfg.pool;
  doc["hyp"] = cfg.hyp;
  doc["seed_hyp"] = cfg.seed_hyp;
  doc["sample_hyp"] = cfg.sample_hyp;
  doc["lm"] = cfg.lm;
  doc["samples"] = cfg.samples;
  doc["oracle"] = cfg.oracle;
  doc["corpus"] = cfg.corpus;
  doc["train_src"] = cfg.train_src;
  doc["train_tgt"] = cfg.train_tgt;
  doc["train_annotated"] = cfg.train_annotated;
  doc["out_dir"] = cfg.out_dir;
  doc["attacks"] = cfg.attacks;
  doc["model_name"] = cfg.model_name;
  doc["min_len"] = cfg.min_len;
  doc["db_reject_fraction"] = cfg.db_reject_fraction;
  doc["ppl_ratio"] = cfg.ppl_ratio;
  doc["challenge_k"] = cfg.challenge_k;
  doc["adv_k"] = cfg.adv_k;
  doc["per_homograph_cap"] = cfg.per_homograph_cap;
  doc["em_iterations"] = cfg.em_iterations;
  doc["tension"] = cfg.tension;
  doc["null_prior"] = cfg.null_prior;
  doc["discount"] = cfg.discount;
  doc["lm_min_count"] = cfg.lm_min_count;
  doc["max_ratio"] = cfg.max_ratio;
  doc["measure"] = cfg.measure;
  doc["ppmi_mode"] = cfg.ppmi_mode;
  doc["ppl_mode"] = cfg.ppl_mode;
  doc["selection"] = cfg.selection;
  doc["allowed"] = cfg.allowed;
  doc["seed"] = cfg.seed;
  doc["threads"] = cfg.threads;
  doc["deterministic"] = cfg.deterministic;
  return doc;
}

class Run {
 public:
  Run(const RunConfig& cfg, const std::string& command) : cfg_(cfg) {
    if (cfg.out_dir.empty()) fail("missing --out-dir");
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) fail("cannot create output directory " + cfg.out_dir + ": " + ec.message());
    write_file(path("config.json"), config_json(cfg, command).dump(1, '\t') + "\n");
  }

  std::string path(const std::string& name) const {
    return (fs::path(cfg_.out_dir) / name).string();
  }

  void input(const std::string& role, const std::string& file_path) {
    if (file_path.empty()) return;
    inputs_.emplace_back(role, file_path);
  }

  // Digest manifest for provenance; written once all inputs are known.
  void finish() {
    std::string out = "role\tpath\tbytes\tfnv1a64\n";
    for (const auto& [role, p] : inputs_) {
      std::error_code ec;
      auto bytes = fs::file_size(p, ec);
      out += role + "\t" + p + "\t" +
             (ec ? "-" : std::to_string(bytes)) + "\t" + hex64(fnv1a64_file(p)) + "\n";
    }
    write_file(path("manifest.tsv"), out);
  }

 private:
  const RunConfig& cfg_;
  std::vector<std::pair<std::string, std::string>> inputs_;
};

LemmaTable load_lemmas_opt(const std::string& path) {
  return path.empty() ? LemmaTable{} : LemmaTable::load(path);
}

std::vector<ParallelPair> load_corpus(const RunConfig& cfg, const std::string& src,
                                      const std::string& tgt,
                                      const LemmaTable& lemmas) {
  auto pairs = load_parallel(src, tgt, lemmas);
  if (cfg.max_ratio > 0) pairs = clean_corpus(std::move(pairs), cfg.max_ratio);
  return pairs;
}

PpmiMode ppmi_mode_of(const RunConfig& cfg) {
  if (cfg.ppmi_mode == "log") return PpmiMode::Log;
  if (cfg.ppmi_mode == "ratio") return PpmiMode::Ratio;
  fail("unknown ppmi_mode '" + cfg.ppmi_mode + "' (expected log or ratio)");
}

std::set<Perturbation> parse_allowed(const std::string& allowed) {
  std::set<Perturbation> out;
  std::size_t start = 0;
  while (start <= allowed.size()) {
    std::size_t comma = allowed.find(',', start);
    std::string tok = comma == std::string::npos
                          ? allowed.substr(start)
                          : allowed.substr(start, comma - start);
    if (!tok.empty()) out.insert(perturbation_from_string(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) fail("--allowed must name at least one perturbation type");
  return out;
}

// Classifies every pool row against a line-aligned hypothesis file.
std::vector<WsdOutcome> classify_pool(const std::vector<AnnotatedPair>& pool,
                                      const std::vector<ParallelPair>& corpus,
                                      const std::string& hyp_path,
                                      const AlignmentModel& model,
                                      const SenseLexicon& lexicon,
                                      const LemmaTable& lemmas) {
  auto hyp_lines = read_lines(hyp_path);
  if (hyp_lines.size() != pool.size())
    fail("hypotheses file " + hyp_path + " has " + std::to_string(hyp_lines.size()) +
         " lines for a pool of " + std::to_string(pool.size()));
  std::unordered_map<int64_t, const ParallelPair*> by_id;
  for (const auto& p : corpus) by_id[p.id] = &p;
  std::vector<WsdOutcome> outcomes;
  outcomes.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto pit = by_id.find(pool[i].pair_id);
    if (pit == by_id.end())
      fail("pool pair " + std::to_string(pool[i].pair_id) + " not in corpus");
    auto hyp_tokens = tokenize(hyp_lines[i]);
    auto hyp_lemmas = lemmatize(hyp_tokens, lemmas);
    AlignmentLinks links = align_tokens(model, pit->second->src_lemmas, hyp_lemmas);
    outcomes.push_back(detect_wsd_error(pool[i], hyp_lemmas, links, lexicon));
  }
  return outcomes;
}

void cmd_align_train(const RunConfig& cfg) {
  Run run(cfg, "align-train");
  run.input("src", cfg.src);
  run.input("tgt", cfg.tgt);
  run.input("lemmas", cfg.lemmas);
  LemmaTable lemmas = load_lemmas_opt(cfg.lemmas);
  auto pairs = load_corpus(cfg, cfg.src, cfg.tgt, lemmas);
  AlignerOptions opts;
  opts.iterations = cfg.em_iterations;
  opts.tension = cfg.tension;
  opts.null_prior = cfg.null_prior;
  opts.threads = cfg.deterministic ? 1 : cfg.threads;
  AlignmentModel model = train_alignment_model(pairs, opts);
  model.save(run.path("model.tsv"));
  run.finish();
}

void cmd_align_decode(const RunConfig& cfg) {
  Run run(cfg, "align-decode");
  run.input("model", cfg.model);
  run.input("src", cfg.src);
  run.input("tgt", cfg.tgt);
  run.input("lemmas", cfg.lemmas);
  LemmaTable lemmas = load_lemmas_opt(cfg.lemmas);
  AlignmentModel model = AlignmentModel::load(cfg.model);
  auto pairs = load_corpus(cfg, cfg.src, cfg.tgt, lemmas);
  std::vector<AlignmentLinks> all;
  all.reserve(pairs.size());
  for (const auto& p : pairs) all.push_back(align_pair(model, p));
  write_alignments(run.path("alignments.txt"), all);
  run.finish();
}

void cmd_extract(const RunConfig& cfg) {
  Run run(cfg, "extract");
  run.input("src", cfg.src);
  run.input("tgt", cfg.tgt);
  run.input("lemmas", cfg.lemmas);
  run.input("lexicon", cfg.lexicon);
  run.input("alignments", cfg.alignments);
  LemmaTable lemmas = load_lemmas_opt(cfg.lemmas);
  SenseLexicon lexicon = SenseLexicon::load(cfg.lexicon, &lemmas);
  auto pairs = load_corpus(cfg, cfg.src, cfg.tgt, lemmas);
  auto alignments = read_alignments(cfg.alignments);
  ExtractionReport report;
  auto annotated =
      build_test_pool(pairs, lexicon, alignments, cfg.min_len, &report);
  save_annotated(run.path("annotated.tsv"), annotated);
  save_extraction_report(run.path("extract_report.tsv"), report);
  run.finish();
}

void cmd_attractors(const RunConfig& cfg) {
  Run run(cfg, "attractors");
  run.input("src", cfg.src);
  run.input("tgt", cfg.tgt);
  run.input("lemmas", cfg.lemmas);
  run.input("lexicon", cfg.lexicon);
  run.input("annotated", cfg.pool);
  LemmaTable lemmas = load_lemmas_opt(cfg.lemmas);
  SenseLexicon lexicon = SenseLexicon::load(cfg.lexicon, &lemmas);
  auto pairs = load_corpus(cfg, cfg.src, cfg.tgt, lemmas);
  auto annotated = load_annotated(cfg.pool);
  auto tables = build_attractor_tables(annotated, pairs, lexicon);
  export_attractor_tsv(run.path("attractors.tsv"), tables, ppmi_mode_of(cfg));
  save_tables(run.path("tables.json"), tables);
  run.finish();
}

void cmd_score(const RunConfig& cfg) {
  Run run(cfg, "score");
  run.input("pool", cfg.pool);
  run.input("src", cfg.src);
  run.input("tgt", cfg.tgt);
  run.input("lemmas", cfg.lemmas);
  run.input("tables", cfg.tables);
  LemmaTable lemmas = load_lemmas_opt(cfg.lemmas);
  auto pairs = load_corpus(cfg, cfg.src, cfg.tgt, lemmas);
  auto pool = load_annotated(cfg.pool);
  auto tables = load_tables(cfg.tables);
  Measure measure = measure_from_string(cfg.measure);
  PpmiMode mode = ppmi_mode_of(cfg);
  std::unordered_map<int64_t, const ParallelPair*> by_id;
  for (const auto& p : pairs) by_id[p.id] = &p;
  std::string out =
      "pair_id\thomograph\treference_cluster\tdb_correct\tdb_incorrect\t"
      "db_diff\targmax_incorrect\n";
  for (const auto& a : pool) {
    auto pit = by_id.find(a.pair_id);
    if (pit == by_id.end())
      fail("pool pair " + std::to_string(a.pair_id) + " not in corpus");
    auto tit = tables.find(a.homograph);
    if (tit == tables.end())
      fail("no attractor table for homograph '" + a.homograph + "'");
    BiasProfile prof = bias_profile(tit->second, pit->second->src_lemmas,
                                    a.cluster_id, measure, mode);
    out += std::to_string(a.pair_id) + "\t" + a.homograph + "\t" +
           std::to_string(a.cluster_id) + "\t" + fmt_g(prof.db_correct) + "\t" +
           fmt_g(prof.db_incorrect) + "\t" + fmt_g(prof.db_diff) + "\t" +
           std::to_string(prof.argmax_incorrect_sc) + "\n";
  }
  write_file(run.path("scores.tsv"), out);
  run.finish();
}

void cmd_challenge(const RunConfig& cfg) {
  Run run(cfg, "challenge");
  run.input("pool", cfg.pool);
  run.input("src", cfg.src);
  run.input("tgt", cfg.tgt);
  run.input("lemmas", cfg.lemmas);
  run.input("tables", cfg.tables);
  if (cfg.challenge_k == 0) fail("--k must be positive");
  auto pool = load_annotated(cfg.pool);
  ChallengeSet set;
  if (cfg.selection == "random") {
    set = build_random_challenge_set(pool, cfg.challenge_k, cfg.seed);
  } else {
    LemmaTable lemmas = load_lemmas_opt(cfg.lemmas);
    auto tables = load_tables(cfg.tables);
    if (cfg.selection == "bias") {
      auto pairs = load_corpus(cfg, cfg.src, cfg.tgt, lemmas);
      set = build_bias_challenge_set(pool, pairs, tables, cfg.challenge_k);
    } else if (cfg.selection == "rare") {
      set = build_rare_sense_set(pool, tables, cfg.challenge_k);
    } else {
      fail("unknown selection '" + cfg.selection + "' (expected bias, random or rare)");
    }
  }
  save_challenge_set(run.path("challenge.tsv"), set);
  std::string report = "name\t" + set.name + "\nsize\t" +
                       std::to_string(set.pair_ids.size()) + "\nseed\t" +
                       std::to_string(set.seed) + "\n";
  write_file(run.path("challenge_report.tsv"), report);
  run.finish();
}

void cmd_correlate(const RunConfig& cfg) {
  Run run(cfg, "correlate");
  run.input("pool", cfg.pool);
  run.input("src", cfg.src);
  run.input("tgt", cfg.tgt);
  run.input("lemmas", cfg.lemmas);
  run.input("lexicon", cfg.lexicon);
  run.input("tables", cfg.tables);
  run.input("hyp", cfg.hyp);
  run.input("model", cfg.model);
  LemmaTable lemmas = load_lemmas_opt(cfg.lemmas);
  SenseLexicon lexicon = SenseLexicon::load(cfg.lexicon, &lemmas);
  auto pairs = load_corpus(cfg, cfg.src, cfg.tgt, lemmas);
  auto pool = load_annotated(cfg.pool);
  auto tables = load_tables(cfg.tables);
  AlignmentModel model = AlignmentModel::load(cfg.model);
  auto outcomes = classify_pool(pool, pairs, cfg.hyp, model, lexicon, lemmas);
  save_outcomes(run.path("outcomes.tsv"), pool, outcomes);
  CorrelationReport report =
      correlate_errors(pool, outcomes, tables, pairs, ppmi_mode_of(cfg));
  save_correlation_report(run.path("report.tsv"), report);
  run.finish();
}

void cmd_lm_train(const RunConfig& cfg) {
  Run run(cfg, "lm-train");
  run.input("corpus", cfg.corpus);
  auto lines = read_lines(cfg.corpus);
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(lines.size());
  for (const auto& line : lines) sentences.push_back(tokenize(line));
  NgramModel lm = train_kn_trigram(sentences, cfg.discount, cfg.lm_min_count);
  lm.save(run.path("lm.bin"));
  run.finish();
}

void cmd_adv_generate(const RunConfig& cfg) {
  Run run(cfg, "adv-generate");
  run.input("pool", cfg.pool);
  run.input("src", cfg.src);
  run.input("tgt", cfg.tgt);
  run.input("lemmas", cfg.lemmas);
  run.input("lexicon", cfg.lexicon);
  run.input("tables", cfg.tables);
  run.input("train_src", cfg.train_src);
  run.input("train_tgt", cfg.train_tgt);
  run.input("train_annotated", cfg.train_annotated);
  run.input("oracle", cfg.oracle);
  LemmaTable lemmas = load_lemmas_opt(cfg.lemmas);
  auto pairs = load_corpus(cfg, cfg.src, cfg.tgt, lemmas);
  auto pool = load_annotated(cfg.pool);
  auto tables = load_tables(cfg.tables);
  auto train_pairs = load_corpus(cfg, cfg.train_src, cfg.train_tgt, lemmas);
  auto train_annotated = load_annotated(cfg.train_annotated);
  ModifierTable modifiers =
      collect_modifier_table(train_pairs, train_annotated, lemmas);

  OracleScores oracle;
  bool have_oracle = !cfg.oracle.empty();
  if (have_oracle) oracle = load_oracle_scores(cfg.oracle);
  SeedSelectionReport seed_report;
  auto seeds = select_seeds(pool, pairs, tables, have_oracle ? &oracle : nullptr,
                            cfg.db_reject_fraction, cfg.min_len, &seed_report);
  save_seed_report(run.path("seed_report.tsv"), seed_report);

  std::unordered_map<int64_t, const ParallelPair*> by_id;
  for (const auto& p : pairs) by_id[p.id] = &p;
  std::vector<AdversarialSample> samples;
  int64_t next_id = 0;
  for (const auto& seed : seeds) {
    auto tit = tables.find(seed.homograph);
    if (tit == tables.end()) continue;
    auto generated = generate_samples(seed, *by_id.at(seed.pair_id), tit->second,
                                      modifiers, lemmas);
    for (auto& s : generated) {
      s.sample_id = next_id++;
      samples.push_back(std::move(s));
    }
  }
  save_samples(run.path("samples.tsv"), samples);
  run.finish();
}

void cmd_adv_filter(const RunConfig& cfg) {
  Run run(cfg, "adv-filter");
  run.input("samples", cfg.samples);
  run.input("src", cfg.src);
  run.input("tgt", cfg.tgt);
  run.input("lemmas", cfg.lemmas);
  run.input("lm", cfg.lm);
  if (cfg.ppl_ratio <= 0) fail("--ppl-ratio must be positive");
  bool sentence_mode;
  if (cfg.ppl_mode == "token")
    sentence_mode = false;
  else if (cfg.ppl_mode == "sentence")
    sentence_mode = true;
  else
    fail("unknown ppl_mode '" + cfg.ppl_mode + "' (expected token or sentence)");
  LemmaTable lemmas = load_lemmas_opt(cfg.lemmas);
  auto pairs = load_corpus(cfg, cfg.src, cfg.tgt, lemmas);
  auto samples = load_samples(cfg.samples);
  NgramModel lm = NgramModel::load(cfg.lm);
  std::map<int64_t, std::vector<std::string>> seed_tokens;
  for (const auto& p : pairs) seed_tokens[p.id] = p.src_tokens;
  auto kept = perplexity_filter(
      std::move(samples), seed_tokens,
      [&lm, sentence_mode](const std::vector<std::string>& tokens) {
        return sentence_mode ? std::exp(sequence_neg_log_prob(lm, tokens))
                             : perplexity(lm, tokens);
      },
      cfg.ppl_ratio);
  save_samples(run.path("filtered.tsv"), kept);
  run.finish();
}

void cmd_adv_challenge(const RunConfig& cfg) {
  Run run(cfg, "adv-challenge");
  run.input("samples", cfg.samples);
  if (cfg.adv_k == 0) fail("--k must be positive");
  if (cfg.per_homograph_cap == 0) fail("--cap must be positive");
  auto samples = load_samples(cfg.samples);
  AdvChallenge challenge = build_adversarial_challenge_set(
      std::move(samples), cfg.adv_k, cfg.per_homograph_cap,
      parse_allowed(cfg.allowed));
  save_samples(run.path("adv_challenge.tsv"), challenge.samples);
  std::string report = "requested_k\t" + std::to_string(cfg.adv_k) +
                       "\nselected\t" + std::to_string(challenge.samples.size()) +
                       "\ntruncated\t" + (challenge.truncated ? "1" : "0") + "\n";
  write_file(run.path("adv_challenge_report.tsv"), report);
  run.finish();
}

void cmd_adv_judge(const RunConfig& cfg) {
  Run run(cfg, "adv-judge");
  run.input("samples", cfg.samples);
  run.input("src", cfg.src);
  run.input("tgt", cfg.tgt);
  run.input("lemmas", cfg.lemmas);
  run.input("lexicon", cfg.lexicon);
  run.input("model", cfg.model);
  run.input("seed_hyp", cfg.seed_hyp);
  run.input("sample_hyp", cfg.sample_hyp);
  LemmaTable lemmas = load_lemmas_opt(cfg.lemmas);
  SenseLexicon lexicon = SenseLexicon::load(cfg.lexicon, &lemmas);
  auto pairs = load_corpus(cfg, cfg.src, cfg.tgt, lemmas);
  auto samples = load_samples(cfg.samples);
  AlignmentModel model = AlignmentModel::load(cfg.model);
  auto seed_lines = read_lines(cfg.seed_hyp);
  auto sample_lines = read_lines(cfg.sample_hyp);
  if (seed_lines.size() != samples.size() || sample_lines.size() != samples.size())
    fail("hypothesis files must be line-aligned with the samples file (" +
         std::to_string(samples.size()) + " rows; got " +
         std::to_string(seed_lines.size()) + " seed and " +
         std::to_string(sample_lines.size()) + " sample lines)");
  std::unordered_map<int64_t, const ParallelPair*> by_id;
  for (const auto& p : pairs) by_id[p.id] = &p;

  std::vector<AttackOutcome> attacks;
  attacks.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    auto pit = by_id.find(s.seed_pair_id);
    if (pit == by_id.end())
      fail("sample " + std::to_string(s.sample_id) + ": seed pair " +
           std::to_string(s.seed_pair_id) + " not in corpus");
    const ParallelPair& seed_pair = *pit->second;

    AnnotatedPair seed_ann{s.seed_pair_id, s.homograph, s.seed_src_position,
                           s.seed_cluster_id, -1};
    auto seed_hyp_tokens = tokenize(seed_lines[i]);
    auto seed_hyp_lemmas = lemmatize(seed_hyp_tokens, lemmas);
    WsdOutcome seed_outcome = detect_wsd_error(
        seed_ann, seed_hyp_lemmas,
        align_tokens(model, seed_pair.src_lemmas, seed_hyp_lemmas), lexicon);

    AnnotatedPair sample_ann{s.seed_pair_id, s.homograph,
                             homograph_position_in_sample(s), s.seed_cluster_id, -1};
    auto sample_hyp_tokens = tokenize(sample_lines[i]);
    auto sample_hyp_lemmas = lemmatize(sample_hyp_tokens, lemmas);
    auto perturbed_lemmas = lemmatize(s.perturbed_tokens, lemmas);
    WsdOutcome sample_outcome = detect_wsd_error(
        sample_ann, sample_hyp_lemmas,
        align_tokens(model, perturbed_lemmas, sample_hyp_lemmas), lexicon);

    attacks.push_back(judge_attack(seed_outcome, sample_outcome, s));
  }
  save_attacks(run.path("attacks.tsv"), attacks, cfg.model_name);
  run.finish();
}

void cmd_transfer(const RunConfig& cfg) {
  Run run(cfg, "transfer");
  if (cfg.attacks.size() < 2) fail("transfer needs at least two --attacks files");
  std::map<std::string, std::set<int64_t>> successes;
  for (std::size_t i = 0; i < cfg.attacks.size(); ++i) {
    run.input("attacks" + std::to_string(i), cfg.attacks[i]);
    load_attack_successes(cfg.attacks[i], successes);
  }
  JaccardMatrix matrix = transferability(successes);
  save_jaccard(run.path("jaccard.tsv"), matrix);
  std::string report = "models\t" + std::to_string(matrix.models.size()) +
                       "\nempty_pair_flag\t" + (matrix.empty_pair_flag ? "1" : "0") +
                       "\n";
  write_file(run.path("transfer_report.tsv"), report);
  run.finish();
}

}  // namespace

int run_command(const std::vector<std::string>& argv) {
  RunConfig cfg;
  // The config file seeds defaults; explicit flags win.
  for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
    if (argv[i] == "--config") {
      try {
        apply_config_file(cfg, argv[i + 1]);
      } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
    }
  }

  CLI::App app{"wsdbias: disambiguation-bias analysis for parallel corpora"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file with defaults");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out-dir", cfg.out_dir, "output directory")->required();
    cmd->add_option("--max-ratio", cfg.max_ratio,
                    "drop pairs whose length ratio exceeds this (0 disables)")
        ->envname("WSDBIAS_MAX_RATIO");
    cmd->add_option("--config", config_path, "JSON config file with defaults");
  };
  auto add_corpus = [&](CLI::App* cmd, bool with_lemmas = true) {
    cmd->add_option("--src", cfg.src, "source-side corpus file")->required();
    cmd->add_option("--tgt", cfg.tgt, "target-side corpus file")->required();
    if (with_lemmas)
      cmd->add_option("--lemmas", cfg.lemmas, "lemma table TSV (surface, lemma, pos)");
  };

  auto* align_train = app.add_subcommand("align-train", "train the alignment model");
  add_common(align_train);
  add_corpus(align_train);
  align_train->add_option("--iterations", cfg.em_iterations, "EM iterations")
      ->envname("WSDBIAS_ITERATIONS");
  align_train->add_option("--tension", cfg.tension, "diagonal tension (0 disables)")
      ->envname("WSDBIAS_TENSION");
  align_train->add_option("--null-prior", cfg.null_prior, "NULL link prior weight");
  align_train->add_option("--threads", cfg.threads, "E-step shards")
      ->envname("WSDBIAS_THREADS");
  align_train->add_flag("--deterministic", cfg.deterministic,
                        "single-shard E-step for bit-reproducible runs");
  align_train->callback([&] { cmd_align_train(cfg); });

  auto* align_decode = app.add_subcommand("align-decode", "decode Pharaoh alignments");
  add_common(align_decode);
  add_corpus(align_decode);
  align_decode->add_option("--model", cfg.model, "alignment model file")->required();
  align_decode->callback([&] { cmd_align_decode(cfg); });

  auto* extract = app.add_subcommand("extract", "extract homograph-annotated pairs");
  add_common(extract);
  add_corpus(extract);
  extract->add_option("--lexicon", cfg.lexicon, "sense lexicon JSON")->required();
  extract->add_option("--alignments", cfg.alignments, "Pharaoh alignments file")
      ->required();
  extract->add_option("--min-len", cfg.min_len, "minimum source length")
      ->envname("WSDBIAS_MIN_LEN")
      ->default_val(std::size_t{0});
  extract->callback([&] { cmd_extract(cfg); });

  auto* attractors = app.add_subcommand("attractors", "build attractor tables");
  add_common(attractors);
  add_corpus(attractors);
  attractors->add_option("--lexicon", cfg.lexicon, "sense lexicon JSON")->required();
  attractors->add_option("--annotated", cfg.pool, "annotated pairs TSV")->required();
  attractors->callback([&] { cmd_attractors(cfg); });

  auto* score = app.add_subcommand("score", "bias profiles for a test pool");
  add_common(score);
  add_corpus(score);
  score->add_option("--pool", cfg.pool, "test pool TSV")->required();
  score->add_option("--tables", cfg.tables, "attractor tables JSON")->required();
  score->add_option("--measure", cfg.measure, "FREQ or PPMI")
      ->envname("WSDBIAS_MEASURE");
  score->add_option("--ppmi-mode", cfg.ppmi_mode, "log or ratio")
      ->envname("WSDBIAS_PPMI_MODE");
  score->callback([&] { cmd_score(cfg); });

  auto* challenge = app.add_subcommand("challenge", "build a challenge set");
  add_common(challenge);
  add_corpus(challenge);
  challenge->add_option("--pool", cfg.pool, "test pool TSV")->required();
  challenge->add_option("--tables", cfg.tables, "attractor tables JSON");
  challenge->add_option("--k", cfg.challenge_k, "set size");
  challenge->add_option("--selection", cfg.selection, "bias, random or rare");
  challenge->add_option("--seed", cfg.seed, "random selection seed")
      ->envname("WSDBIAS_SEED");
  challenge->callback([&] { cmd_challenge(cfg); });

  auto* correlate = app.add_subcommand("correlate", "bias/error correlation report");
  add_common(correlate);
  add_corpus(correlate);
  correlate->add_option("--pool", cfg.pool, "test pool TSV")->required();
  correlate->add_option("--lexicon", cfg.lexicon, "sense lexicon JSON")->required();
  correlate->add_option("--tables", cfg.tables, "attractor tables JSON")->required();
  correlate->add_option("--hyp", cfg.hyp, "hypotheses, line-aligned with the pool")
      ->required();
  correlate->add_option("--model", cfg.model, "alignment model file")->required();
  correlate->add_option("--ppmi-mode", cfg.ppmi_mode, "log or ratio");
  correlate->callback([&] { cmd_correlate(cfg); });

  auto* lm_train = app.add_subcommand("lm-train", "train the fluency language model");
  add_common(lm_train);
  lm_train->add_option("--corpus", cfg.corpus, "text corpus, one sentence per line")
      ->required();
  lm_train->add_option("--discount", cfg.discount, "absolute discount")
      ->envname("WSDBIAS_DISCOUNT");
  lm_train->add_option("--min-count", cfg.lm_min_count, "OOV threshold");
  lm_train->callback([&] { cmd_lm_train(cfg); });

  auto* adv_generate = app.add_subcommand("adv-generate", "generate adversarial samples");
  add_common(adv_generate);
  add_corpus(adv_generate);
  adv_generate->add_option("--pool", cfg.pool, "test pool TSV")->required();
  adv_generate->add_option("--lexicon", cfg.lexicon, "sense lexicon JSON")->required();
  adv_generate->add_option("--tables", cfg.tables, "attractor tables JSON")->required();
  adv_generate->add_option("--train-src", cfg.train_src, "training source corpus")
      ->required();
  adv_generate->add_option("--train-tgt", cfg.train_tgt, "training target corpus")
      ->required();
  adv_generate
      ->add_option("--train-annotated", cfg.train_annotated,
                   "annotated training pairs TSV")
      ->required();
  adv_generate->add_option("--oracle", cfg.oracle,
                           "context-sufficiency oracle TSV (pair_id, cluster_id, score)");
  adv_generate->add_option("--reject-fraction", cfg.db_reject_fraction,
                           "seed-pool bias rejection fraction");
  adv_generate->add_option("--min-len", cfg.min_len, "minimum seed length")
      ->envname("WSDBIAS_MIN_LEN");
  adv_generate->callback([&] { cmd_adv_generate(cfg); });

  auto* adv_filter = app.add_subcommand("adv-filter", "perplexity-filter samples");
  add_common(adv_filter);
  add_corpus(adv_filter);
  adv_filter->add_option("--samples", cfg.samples, "samples TSV")->required();
  adv_filter->add_option("--lm", cfg.lm, "fluency language model")->required();
  adv_filter->add_option("--ppl-ratio", cfg.ppl_ratio, "maximum perplexity ratio")
      ->envname("WSDBIAS_PPL_RATIO");
  adv_filter->add_option("--ppl-mode", cfg.ppl_mode,
                         "token (per-token perplexity) or sentence (joint probability)");
  adv_filter->callback([&] { cmd_adv_filter(cfg); });

  auto* adv_challenge = app.add_subcommand("adv-challenge",
                                           "top-bias adversarial challenge set");
  add_common(adv_challenge);
  adv_challenge->add_option("--samples", cfg.samples, "filtered samples TSV")
      ->required();
  adv_challenge->add_option("--k", cfg.adv_k, "set size");
  adv_challenge->add_option("--cap", cfg.per_homograph_cap, "per-homograph cap");
  adv_challenge->add_option("--allowed", cfg.allowed,
                            "comma-separated perturbation types");
  adv_challenge->callback([&] { cmd_adv_challenge(cfg); });

  auto* adv_judge = app.add_subcommand("adv-judge", "judge attack outcomes");
  add_common(adv_judge);
  add_corpus(adv_judge);
  adv_judge->add_option("--samples", cfg.samples, "samples TSV")->required();
  adv_judge->add_option("--lexicon", cfg.lexicon, "sense lexicon JSON")->required();
  adv_judge->add_option("--model", cfg.model, "alignment model file")->required();
  adv_judge->add_option("--seed-hyp", cfg.seed_hyp,
                        "seed hypotheses, line-aligned with samples")
      ->required();
  adv_judge->add_option("--sample-hyp", cfg.sample_hyp,
                        "sample hypotheses, line-aligned with samples")
      ->required();
  adv_judge->add_option("--model-name", cfg.model_name, "victim model name");
  adv_judge->callback([&] { cmd_adv_judge(cfg); });

  auto* transfer = app.add_subcommand("transfer", "attack transferability matrix");
  add_common(transfer);
  transfer->add_option("--attacks", cfg.attacks, "attack report TSVs (two or more)")
      ->required()
      ->expected(-2);
  transfer->callback([&] { cmd_transfer(cfg); });

  try {
    std::vector<std::string> args(argv.rbegin(), argv.rend());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, std::cout, std::cerr);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace wsdbias
