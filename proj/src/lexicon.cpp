#include "wsdbias/lexicon.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "wsdbias/error.hpp"
#include "wsdbias/text.hpp"

namespace wsdbias {

std::string normalize_definition(std::string_view def) {
  std::string out;
  bool in_space = true;  // trims leading whitespace
  std::size_t pos = 0;
  while (pos < def.size()) {
    std::size_t start = pos;
    int32_t cp = utf8_next(def, pos);
    if (cp < 0) {
      out.push_back(def[start]);
      in_space = false;
      continue;
    }
    if (is_space_cp(cp)) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    utf8_append(out, cp);
  }
  return out;
}

namespace {

std::size_t shared_translations(const SenseCluster& a, const SenseCluster& b) {
  const auto& small = a.translations.size() <= b.translations.size() ? a : b;
  const auto& large = a.translations.size() <= b.translations.size() ? b : a;
  std::size_t n = 0;
  for (const auto& t : small.translations) n += large.translations.count(t);
  return n;
}

bool shares_definition(const SenseCluster& a, const SenseCluster& b) {
  const auto& small = a.definitions.size() <= b.definitions.size() ? a : b;
  const auto& large = a.definitions.size() <= b.definitions.size() ? b : a;
  for (const auto& d : small.definitions)
    if (large.definitions.count(d)) return true;
  return false;
}

bool should_merge(const SenseCluster& a, const SenseCluster& b) {
  return shared_translations(a, b) >= 3 || shares_definition(a, b);
}

}  // namespace

std::vector<SenseCluster> merge_sense_clusters(std::vector<SenseCluster> raw) {
  for (auto& c : raw) {
    std::set<std::string> defs;
    for (const auto& d : c.definitions) {
      std::string norm = normalize_definition(d);
      if (!norm.empty()) defs.insert(std::move(norm));
    }
    c.definitions = std::move(defs);
  }
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i + 1 < raw.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < raw.size() && !merged; ++j) {
        if (should_merge(raw[i], raw[j])) {
          raw[i].translations.insert(raw[j].translations.begin(),
                                     raw[j].translations.end());
          raw[i].definitions.insert(raw[j].definitions.begin(),
                                    raw[j].definitions.end());
          raw.erase(raw.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
        }
      }
    }
  }
  for (std::size_t i = 0; i < raw.size(); ++i)
    raw[i].cluster_id = static_cast<int>(i);
  return raw;
}

void SenseLexicon::add(std::string homograph, std::vector<SenseCluster> clusters) {
  if (clusters.size() < 2) {
    ++dropped_single_cluster_;
    return;
  }
  HomographEntry entry;
  std::map<std::string, int> seen;  // translation -> number of clusters
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    clusters[i].cluster_id = static_cast<int>(i);
    if (clusters[i].translations.empty())
      fail("lexicon: homograph '" + homograph + "' cluster " +
           std::to_string(i) + " has no translations");
    for (const auto& t : clusters[i].translations) ++seen[t];
  }
  for (const auto& [t, n] : seen)
    if (n >= 2) entry.ambiguous_translations.insert(t);
  entry.clusters = std::move(clusters);
  entries_[std::move(homograph)] = std::move(entry);
}

SenseLexicon SenseLexicon::load(const std::string& path, const LemmaTable* lemmas,
                                bool merge_clusters) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open lexicon: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail("lexicon " + path + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) fail("lexicon " + path + ": top level must be an object");

  SenseLexicon lex;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    std::string homograph = lowercase(it.key());
    if (lemmas) homograph = lemmas->lookup(homograph).lemma;
    if (!it.value().is_array())
      fail("lexicon: homograph '" + homograph + "' must map to an array of clusters");
    std::vector<SenseCluster> clusters;
    for (const auto& jc : it.value()) {
      SenseCluster c;
      if (!jc.contains("translations") || !jc["translations"].is_array())
        fail("lexicon: homograph '" + homograph +
             "' cluster missing 'translations' array");
      for (const auto& jt : jc["translations"]) {
        std::string t = lowercase(jt.get<std::string>());
        if (lemmas) t = lemmas->lookup(t).lemma;
        if (!t.empty()) c.translations.insert(std::move(t));
      }
      if (jc.contains("definitions")) {
        for (const auto& jd : jc["definitions"]) {
          std::string d = normalize_definition(jd.get<std::string>());
          if (!d.empty()) c.definitions.insert(std::move(d));
        }
      }
      clusters.push_back(std::move(c));
    }
    if (merge_clusters) clusters = merge_sense_clusters(std::move(clusters));
    lex.add(std::move(homograph), std::move(clusters));
  }
  return lex;
}

const HomographEntry* SenseLexicon::find(const std::string& homograph) const {
  auto it = entries_.find(homograph);
  return it == entries_.end() ? nullptr : &it->second;
}

LookupResult SenseLexicon::lookup_cluster(const std::string& homograph,
                                          const std::string& target) const {
  const HomographEntry* entry = find(homograph);
  if (!entry) fail("lookup_cluster: unknown homograph '" + homograph + "'");
  if (entry->ambiguous_translations.count(target))
    return {ClusterMatch::Ambiguous, -1};
  for (const auto& c : entry->clusters)
    if (c.translations.count(target)) return {ClusterMatch::Cluster, c.cluster_id};
  return {ClusterMatch::Unknown, -1};
}

}  // namespace wsdbias
