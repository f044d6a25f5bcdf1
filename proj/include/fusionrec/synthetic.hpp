#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusionrec/catalog.hpp"

namespace fusionrec::synthetic {

// Planted cluster structure for desk-scale experiments. Every item has a
// genre cluster and a text cluster; for "pure" items they coincide, for
// "mixed" items they differ. A user from cluster u rates an item 5 when both
// clusters are u, 4 when exactly one is, and 1-2 otherwise, so a signal that
// sees only genres or only descriptions cannot separate 4s from 5s.
struct Config {
  std::size_t source_items = 600;
  std::size_t target_items = 600;
  std::size_t users = 240;
  double mixed_fraction = 0.4;
  std::size_t keywords_per_description = 8;
  std::size_t filler_per_description = 12;
  std::size_t liked_sources_per_user = 2;
  std::size_t rated_targets_per_user = 12;
  std::uint64_t seed = 7;
};

inline constexpr std::size_t kClusters = 8;

struct Dataset {
  Catalog source;
  Catalog target;
  std::vector<Rating> ratings;
  // Parallel to source/target items.
  std::vector<std::size_t> source_genre_cluster, source_text_cluster;
  std::vector<std::size_t> target_genre_cluster, target_text_cluster;
};

/// Genre tokens of one cluster.
const std::vector<std::string>& cluster_genres(std::size_t cluster);
/// Description keywords of one cluster.
const std::vector<std::string>& cluster_keywords(std::size_t cluster);

Dataset generate(const Config& config);

}  // namespace fusionrec::synthetic
