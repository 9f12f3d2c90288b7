#include "wsdbias/fluency.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "wsdbias/error.hpp"

namespace wsdbias {

int NgramModel::token_id(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? kUnk : it->second;
}

void NgramModel::rebuild_aggregates() {
  ctx2_total.clear();
  ctx2_types.clear();
  cont2.clear();
  cont2_ctx_total.clear();
  cont2_ctx_types.clear();
  for (const auto& [key, count] : trigrams) {
    std::array<int, 2> ctx{key[0], key[1]};
    ctx2_total[ctx] += count;
    ctx2_types[ctx] += 1;
    cont2[{key[1], key[2]}] += 1;  // one distinct left context per entry
  }
  for (const auto& [vw, n_left] : cont2) {
    cont2_ctx_total[vw[0]] += n_left;
    cont2_ctx_types[vw[0]] += 1;
  }
  unigram_total = 0;
  unigram_types = 0;
  for (const auto& [w, c] : unigram_counts) {
    unigram_total += c;
    if (c > 0) ++unigram_types;
  }
}

double NgramModel::prob_unigram(int w) const {
  double uniform = 1.0 / static_cast<double>(predict_vocab_size());
  if (unigram_total <= 0) return uniform;
  auto it = unigram_counts.find(w);
  double c = it == unigram_counts.end() ? 0.0 : static_cast<double>(it->second);
  double total = static_cast<double>(unigram_total);
  double lambda = discount * static_cast<double>(unigram_types) / total;
  return std::max(c - discount, 0.0) / total + lambda * uniform;
}

double NgramModel::prob_bigram(int v, int w) const {
  auto tot = cont2_ctx_total.find(v);
  if (tot == cont2_ctx_total.end() || tot->second <= 0) return prob_unigram(w);
  double total = static_cast<double>(tot->second);
  auto it = cont2.find({v, w});
  double c = it == cont2.end() ? 0.0 : static_cast<double>(it->second);
  double types = static_cast<double>(cont2_ctx_types.at(v));
  double lambda = discount * types / total;
  return std::max(c - discount, 0.0) / total + lambda * prob_unigram(w);
}

double NgramModel::prob(int u, int v, int w) const {
  auto tot = ctx2_total.find({u, v});
  if (tot == ctx2_total.end() || tot->second <= 0) return prob_bigram(v, w);
  double total = static_cast<double>(tot->second);
  auto it = trigrams.find({u, v, w});
  double c = it == trigrams.end() ? 0.0 : static_cast<double>(it->second);
  double types = static_cast<double>(ctx2_types.at({u, v}));
  double lambda = discount * types / total;
  return std::max(c - discount, 0.0) / total + lambda * prob_bigram(v, w);
}

double NgramModel::prob(const std::string& u, const std::string& v,
                        const std::string& w) const {
  return prob(token_id(u), token_id(v), token_id(w));
}

NgramModel train_kn_trigram(const std::vector<std::vector<std::string>>& corpus,
                            double discount, int64_t min_count) {
  if (corpus.empty()) fail("train_kn_trigram: empty corpus");
  if (!(discount > 0.0 && discount < 1.0))
    fail("train_kn_trigram: discount must lie in (0,1)");

  NgramModel model;
  model.discount = discount;
  model.min_count = min_count;
  model.vocab = {"<unk>", "<s>", "</s>"};
  model.index = {{"<unk>", 0}, {"<s>", 1}, {"</s>", 2}};

  std::unordered_map<std::string, int64_t> raw;
  for (const auto& sent : corpus)
    for (const auto& tok : sent) ++raw[tok];
  // Deterministic id assignment: first-appearance order.
  for (const auto& sent : corpus) {
    for (const auto& tok : sent) {
      if (raw[tok] < min_count) continue;
      if (!model.index.count(tok)) {
        model.index[tok] = static_cast<int>(model.vocab.size());
        model.vocab.push_back(tok);
      }
    }
  }

  for (const auto& sent : corpus) {
    std::vector<int> padded;
    padded.reserve(sent.size() + 3);
    padded.push_back(NgramModel::kBos);
    padded.push_back(NgramModel::kBos);
    for (const auto& tok : sent) padded.push_back(model.token_id(tok));
    padded.push_back(NgramModel::kEos);
    for (std::size_t i = 0; i + 2 < padded.size(); ++i)
      ++model.trigrams[{padded[i], padded[i + 1], padded[i + 2]}];
    for (std::size_t i = 2; i < padded.size() - 1; ++i)
      ++model.unigram_counts[padded[i]];  // real tokens only, no pads
  }
  model.rebuild_aggregates();
  return model;
}

namespace {

double neg_log_prob_sum(const NgramModel& model,
                        const std::vector<std::string>& tokens,
                        std::size_t& scored) {
  std::vector<int> padded;
  padded.reserve(tokens.size() + 3);
  padded.push_back(NgramModel::kBos);
  padded.push_back(NgramModel::kBos);
  for (const auto& tok : tokens) padded.push_back(model.token_id(tok));
  padded.push_back(NgramModel::kEos);

  double log_sum = 0.0;
  scored = padded.size() - 2;
  for (std::size_t i = 2; i < padded.size(); ++i)
    log_sum += std::log(model.prob(padded[i - 2], padded[i - 1], padded[i]));
  return -log_sum;
}

}  // namespace

double perplexity(const NgramModel& model, const std::vector<std::string>& tokens) {
  std::size_t scored = 0;
  double nll = neg_log_prob_sum(model, tokens, scored);
  return std::exp(nll / static_cast<double>(scored));
}

double sequence_neg_log_prob(const NgramModel& model,
                             const std::vector<std::string>& tokens) {
  std::size_t scored = 0;
  return neg_log_prob_sum(model, tokens, scored);
}

namespace {

constexpr char kMagic[8] = {'W', 'S', 'D', 'K', 'N', 'L', 'M', '1'};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& data, std::size_t& pos) {
  if (pos + sizeof(T) > data.size()) fail("language model file truncated");
  T v;
  std::memcpy(&v, data.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void NgramModel::save(const std::string& path) const {
  std::string out(kMagic, sizeof(kMagic));
  put<int32_t>(out, order);
  put<double>(out, discount);
  put<int64_t>(out, min_count);
  put<int64_t>(out, static_cast<int64_t>(vocab.size()));
  for (const auto& tok : vocab) {
    put<int32_t>(out, static_cast<int32_t>(tok.size()));
    out += tok;
  }
  put<int64_t>(out, static_cast<int64_t>(unigram_counts.size()));
  for (const auto& [w, c] : unigram_counts) {
    put<int32_t>(out, w);
    put<int64_t>(out, c);
  }
  put<int64_t>(out, static_cast<int64_t>(trigrams.size()));
  for (const auto& [key, c] : trigrams) {
    put<int32_t>(out, key[0]);
    put<int32_t>(out, key[1]);
    put<int32_t>(out, key[2]);
    put<int64_t>(out, c);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail("cannot write language model: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail("write failed: " + path);
}

NgramModel NgramModel::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail("cannot open language model: " + path);
  std::string data((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  if (data.size() < sizeof(kMagic) ||
      std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
    fail("not a language model file: " + path);
  std::size_t pos = sizeof(kMagic);
  NgramModel model;
  model.order = get<int32_t>(data, pos);
  model.discount = get<double>(data, pos);
  model.min_count = get<int64_t>(data, pos);
  int64_t vocab_size = get<int64_t>(data, pos);
  model.vocab.clear();
  model.index.clear();
  for (int64_t i = 0; i < vocab_size; ++i) {
    int32_t len = get<int32_t>(data, pos);
    if (pos + static_cast<std::size_t>(len) > data.size())
      fail("language model file truncated");
    std::string tok = data.substr(pos, static_cast<std::size_t>(len));
    pos += static_cast<std::size_t>(len);
    model.index[tok] = static_cast<int>(model.vocab.size());
    model.vocab.push_back(std::move(tok));
  }
  int64_t n_uni = get<int64_t>(data, pos);
  for (int64_t i = 0; i < n_uni; ++i) {
    int32_t w = get<int32_t>(data, pos);
    model.unigram_counts[w] = get<int64_t>(data, pos);
  }
  int64_t n_tri = get<int64_t>(data, pos);
  for (int64_t i = 0; i < n_tri; ++i) {
    int32_t a = get<int32_t>(data, pos);
    int32_t b = get<int32_t>(data, pos);
    int32_t c = get<int32_t>(data, pos);
    model.trigrams[{a, b, c}] = get<int64_t>(data, pos);
  }
  model.rebuild_aggregates();
  return model;
}

}  // namespace wsdbias
