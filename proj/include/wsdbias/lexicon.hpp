#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "wsdbias/corpus.hpp"

namespace wsdbias {

struct SenseCluster {
  int cluster_id = 0;  // unique per homograph
  std::set<std::string> translations;  // lemmatized, lowercase
  std::set<std::string> definitions;   // whitespace-normalized
};

struct HomographEntry {
  std::vector<SenseCluster> clusters;
  // Translations appearing in two or more clusters of this homograph;
  // pairs using them are ignored downstream.
  std::set<std::string> ambiguous_translations;
};

enum class ClusterMatch { Cluster, Ambiguous, Unknown };

struct LookupResult {
  ClusterMatch kind = ClusterMatch::Unknown;
  int cluster_id = -1;  // valid only when kind == Cluster
};

// Repeatedly merges any two clusters sharing >= 3 translations or >= 1
// definition (exact equality after whitespace normalization), always taking
// the smallest qualifying (i, j) index pair first, until a fixpoint.
// Resulting cluster_ids are relabeled by position.
std::vector<SenseCluster> merge_sense_clusters(std::vector<SenseCluster> raw);

std::string normalize_definition(std::string_view def);

class SenseLexicon {
 public:
  // Lexicon file: JSON object mapping homograph -> array of clusters, each
  // with "translations" (array) and optional "definitions" (array).
  // Homographs ending up with fewer than two clusters are dropped.
  static SenseLexicon load(const std::string& path,
                           const LemmaTable* lemmas = nullptr,
                           bool merge_clusters = false);

  const HomographEntry* find(const std::string& homograph) const;
  bool contains(const std::string& homograph) const { return find(homograph) != nullptr; }

  // Throws Error for an unknown homograph.
  LookupResult lookup_cluster(const std::string& homograph,
                              const std::string& target) const;

  const std::map<std::string, HomographEntry>& entries() const { return entries_; }
  std::size_t dropped_single_cluster() const { return dropped_single_cluster_; }

  void add(std::string homograph, std::vector<SenseCluster> clusters);

 private:
  std::map<std::string, HomographEntry> entries_;
  std::size_t dropped_single_cluster_ = 0;
};

}  // namespace wsdbias
