#include "wsdbias/aligner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "wsdbias/error.hpp"
#include "wsdbias/tsv.hpp"

namespace wsdbias {

double AlignmentModel::prob(int src, int tgt) const {
  if (src < 0 || src >= static_cast<int>(probs.size())) return 0.0;
  const auto& row = probs[static_cast<std::size_t>(src)];
  auto it = row.find(tgt);
  return it == row.end() ? 0.0 : it->second;
}

int AlignmentModel::src_id(const std::string& lemma) const {
  auto it = src_index.find(lemma);
  return it == src_index.end() ? -1 : it->second;
}

int AlignmentModel::tgt_id(const std::string& lemma) const {
  auto it = tgt_index.find(lemma);
  return it == tgt_index.end() ? -1 : it->second;
}

namespace {

struct IdCorpus {
  std::vector<std::vector<int>> src, tgt;
};

double diag_weight(double tension, std::size_t i, std::size_t m, std::size_t j,
                   std::size_t n) {
  if (tension == 0.0) return 1.0;
  double a = static_cast<double>(i) / static_cast<double>(m);
  double b = static_cast<double>(j) / static_cast<double>(n);
  return std::exp(-tension * std::fabs(a - b));
}

// Expected counts for a contiguous range of pairs. counts rows follow the
// same (src id -> tgt id) layout as the model.
struct ShardResult {
  std::vector<std::map<int, double>> counts;
  double log_likelihood = 0.0;
};

void accumulate_shard(const IdCorpus& corpus, std::size_t begin, std::size_t end,
                      const std::vector<std::map<int, double>>& probs,
                      double tension, double null_prior, ShardResult& out) {
  out.counts.assign(probs.size(), {});
  out.log_likelihood = 0.0;
  for (std::size_t p = begin; p < end; ++p) {
    const auto& src = corpus.src[p];
    const auto& tgt = corpus.tgt[p];
    std::size_t m = src.size(), n = tgt.size();
    if (m == 0 || n == 0) continue;
    for (std::size_t i = 0; i < m; ++i) {
      int s = src[i];
      const auto& row = probs[static_cast<std::size_t>(s)];
      double null_score = null_prior * row.at(AlignmentModel::kNullId);
      double norm = null_score;
      double weight_sum = null_prior;
      for (std::size_t j = 0; j < n; ++j) {
        double w = diag_weight(tension, i, m, j, n);
        weight_sum += w;
        auto it = row.find(tgt[j]);
        if (it != row.end()) norm += w * it->second;
      }
      if (norm <= 0.0) continue;  // cannot happen after uniform init
      out.log_likelihood += std::log(norm) - std::log(weight_sum);
      auto& crow = out.counts[static_cast<std::size_t>(s)];
      crow[AlignmentModel::kNullId] += null_score / norm;
      for (std::size_t j = 0; j < n; ++j) {
        double w = diag_weight(tension, i, m, j, n);
        auto it = row.find(tgt[j]);
        if (it != row.end()) crow[tgt[j]] += w * it->second / norm;
      }
    }
  }
}

}  // namespace

AlignmentModel train_alignment_model(const std::vector<ParallelPair>& pairs,
                                     const AlignerOptions& options) {
  if (pairs.empty()) fail("train_alignment_model: empty corpus");
  if (options.iterations < 1) fail("train_alignment_model: iterations must be >= 1");
  if (options.null_prior <= 0) fail("train_alignment_model: null prior must be > 0");

  AlignmentModel model;
  model.tension = options.tension;
  model.null_prior = options.null_prior;
  model.iterations = options.iterations;
  model.tgt_vocab.push_back(AlignmentModel::kNullLemma);
  model.tgt_index[AlignmentModel::kNullLemma] = AlignmentModel::kNullId;

  IdCorpus corpus;
  corpus.src.reserve(pairs.size());
  corpus.tgt.reserve(pairs.size());
  auto intern = [](std::vector<std::string>& vocab,
                   std::unordered_map<std::string, int>& index,
                   const std::string& lemma) {
    auto [it, inserted] = index.emplace(lemma, static_cast<int>(vocab.size()));
    if (inserted) vocab.push_back(lemma);
    return it->second;
  };
  for (const auto& p : pairs) {
    std::vector<int> s, t;
    s.reserve(p.src_lemmas.size());
    t.reserve(p.tgt_lemmas.size());
    for (const auto& l : p.src_lemmas)
      s.push_back(intern(model.src_vocab, model.src_index, l));
    for (const auto& l : p.tgt_lemmas)
      t.push_back(intern(model.tgt_vocab, model.tgt_index, l));
    corpus.src.push_back(std::move(s));
    corpus.tgt.push_back(std::move(t));
  }

  // Rows cover NULL plus co-occurring target lemmas, uniformly initialized.
  model.probs.assign(model.src_vocab.size(), {});
  for (std::size_t p = 0; p < corpus.src.size(); ++p) {
    for (int s : corpus.src[p]) {
      auto& row = model.probs[static_cast<std::size_t>(s)];
      row.emplace(AlignmentModel::kNullId, 0.0);
      for (int t : corpus.tgt[p]) row.emplace(t, 0.0);
    }
  }
  for (auto& row : model.probs) {
    if (row.empty()) continue;
    double u = 1.0 / static_cast<double>(row.size());
    for (auto& [t, v] : row) v = u;
  }

  int threads = std::max(1, options.threads);
  std::size_t n_pairs = corpus.src.size();
  threads = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(threads), n_pairs));

  for (int iter = 0; iter < options.iterations; ++iter) {
    std::vector<ShardResult> shards(static_cast<std::size_t>(threads));
    if (threads == 1) {
      accumulate_shard(corpus, 0, n_pairs, model.probs, model.tension,
                       model.null_prior, shards[0]);
    } else {
      std::vector<std::thread> workers;
      std::size_t per = (n_pairs + static_cast<std::size_t>(threads) - 1) /
                        static_cast<std::size_t>(threads);
      for (int t = 0; t < threads; ++t) {
        std::size_t begin = static_cast<std::size_t>(t) * per;
        std::size_t end = std::min(n_pairs, begin + per);
        workers.emplace_back([&, begin, end, t] {
          accumulate_shard(corpus, begin, end, model.probs, model.tension,
                           model.null_prior, shards[static_cast<std::size_t>(t)]);
        });
      }
      for (auto& w : workers) w.join();
    }

    // Merge in shard order, then renormalize rows.
    double ll = 0.0;
    std::vector<std::map<int, double>> merged(model.probs.size());
    for (const auto& shard : shards) {
      ll += shard.log_likelihood;
      for (std::size_t s = 0; s < shard.counts.size(); ++s)
        for (const auto& [t, c] : shard.counts[s]) merged[s][t] += c;
    }
    model.log_likelihood.push_back(ll);
    for (std::size_t s = 0; s < merged.size(); ++s) {
      double total = 0.0;
      for (const auto& [t, c] : merged[s]) total += c;
      if (total <= 0.0) continue;  // lemma only in empty-sided pairs
      auto& row = model.probs[s];
      for (auto& [t, v] : row) {
        auto it = merged[s].find(t);
        v = it == merged[s].end() ? 0.0 : it->second / total;
      }
    }
  }
  return model;
}

AlignmentLinks align_tokens(const AlignmentModel& model,
                            const std::vector<std::string>& src_lemmas,
                            const std::vector<std::string>& tgt_lemmas) {
  AlignmentLinks out;
  std::size_t m = src_lemmas.size(), n = tgt_lemmas.size();
  if (m == 0 || n == 0) return out;
  std::vector<int> tgt_ids(n);
  for (std::size_t j = 0; j < n; ++j) tgt_ids[j] = model.tgt_id(tgt_lemmas[j]);
  for (std::size_t i = 0; i < m; ++i) {
    int s = model.src_id(src_lemmas[i]);
    if (s < 0) continue;  // no evidence for out-of-vocabulary lemmas
    double null_score = model.null_prior * model.prob(s, AlignmentModel::kNullId);
    double best = -1.0;
    int best_j = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (tgt_ids[j] < 0) continue;
      double score =
          diag_weight(model.tension, i, m, j, n) * model.prob(s, tgt_ids[j]);
      if (score > best) {  // strict: ties keep the smaller j
        best = score;
        best_j = static_cast<int>(j);
      }
    }
    if (best_j >= 0 && null_score <= best)
      out.links[static_cast<int>(i)] = best_j;
  }
  return out;
}

AlignmentLinks align_pair(const AlignmentModel& model, const ParallelPair& pair) {
  return align_tokens(model, pair.src_lemmas, pair.tgt_lemmas);
}

void AlignmentModel::save(const std::string& path) const {
  std::string out = "wsdbias-align-model\t1\n";
  out += "tension\t" + fmt_full(tension) + "\n";
  out += "null_prior\t" + fmt_full(null_prior) + "\n";
  out += "iterations\t" + std::to_string(iterations) + "\n";
  std::string ll;
  for (std::size_t i = 0; i < log_likelihood.size(); ++i) {
    if (i) ll += ' ';
    ll += fmt_full(log_likelihood[i]);
  }
  out += "log_likelihood\t" + ll + "\n";
  out += "rows\n";
  for (std::size_t s = 0; s < probs.size(); ++s) {
    for (const auto& [t, v] : probs[s]) {
      out += src_vocab[s];
      out += '\t';
      out += tgt_vocab[static_cast<std::size_t>(t)];
      out += '\t';
      out += fmt_full(v);
      out += '\n';
    }
  }
  write_file(path, out);
}

AlignmentModel AlignmentModel::load(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.empty() || split_tab(lines[0])[0] != "wsdbias-align-model")
    fail("not an alignment model file: " + path);
  AlignmentModel model;
  model.tgt_vocab.push_back(kNullLemma);
  model.tgt_index[kNullLemma] = kNullId;
  std::size_t i = 1;
  for (; i < lines.size() && lines[i] != "rows"; ++i) {
    auto cols = split_tab(lines[i]);
    if (cols.size() != 2) fail("bad header line in " + path + ": " + lines[i]);
    if (cols[0] == "tension") model.tension = parse_f64(cols[1]);
    else if (cols[0] == "null_prior") model.null_prior = parse_f64(cols[1]);
    else if (cols[0] == "iterations") model.iterations = static_cast<int>(parse_i64(cols[1]));
    else if (cols[0] == "log_likelihood") {
      model.log_likelihood.clear();
      std::size_t start = 0;
      const std::string& s = cols[1];
      while (start < s.size()) {
        std::size_t sp = s.find(' ', start);
        std::string tok = sp == std::string::npos ? s.substr(start)
                                                  : s.substr(start, sp - start);
        if (!tok.empty()) model.log_likelihood.push_back(parse_f64(tok));
        if (sp == std::string::npos) break;
        start = sp + 1;
      }
    } else {
      fail("unknown header key in " + path + ": " + cols[0]);
    }
  }
  if (i >= lines.size()) fail("missing 'rows' section in " + path);
  auto intern = [](std::vector<std::string>& vocab,
                   std::unordered_map<std::string, int>& index,
                   const std::string& lemma) {
    auto [it, inserted] = index.emplace(lemma, static_cast<int>(vocab.size()));
    if (inserted) vocab.push_back(lemma);
    return it->second;
  };
  for (++i; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split_tab(lines[i]);
    if (cols.size() != 3) fail("bad model row in " + path + ": " + lines[i]);
    int s = intern(model.src_vocab, model.src_index, cols[0]);
    int t = intern(model.tgt_vocab, model.tgt_index, cols[1]);
    if (static_cast<std::size_t>(s) >= model.probs.size())
      model.probs.resize(static_cast<std::size_t>(s) + 1);
    model.probs[static_cast<std::size_t>(s)][t] = parse_f64(cols[2]);
  }
  return model;
}

void write_alignments(const std::string& path,
                      const std::vector<AlignmentLinks>& all) {
  std::string out;
  for (const auto& links : all) {
    bool first = true;
    for (const auto& [i, j] : links.links) {
      if (!first) out += ' ';
      first = false;
      out += std::to_string(i) + "-" + std::to_string(j);
    }
    out += '\n';
  }
  write_file(path, out);
}

std::vector<AlignmentLinks> read_alignments(const std::string& path) {
  auto lines = read_lines(path);
  std::vector<AlignmentLinks> all;
  all.reserve(lines.size());
  for (std::size_t li = 0; li < lines.size(); ++li) {
    AlignmentLinks links;
    const std::string& line = lines[li];
    std::size_t pos = 0;
    while (pos < line.size()) {
      std::size_t sp = line.find(' ', pos);
      std::string tok =
          sp == std::string::npos ? line.substr(pos) : line.substr(pos, sp - pos);
      if (!tok.empty()) {
        std::size_t dash = tok.find('-');
        if (dash == std::string::npos)
          fail("bad alignment token '" + tok + "' on line " + std::to_string(li + 1));
        links.links[static_cast<int>(parse_i64(tok.substr(0, dash)))] =
            static_cast<int>(parse_i64(tok.substr(dash + 1)));
      }
      if (sp == std::string::npos) break;
      pos = sp + 1;
    }
    all.push_back(std::move(links));
  }
  return all;
}

}  // namespace wsdbias
