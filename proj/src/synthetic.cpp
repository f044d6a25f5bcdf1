#include "fusionrec/synthetic.hpp"

#include <algorithm>

#include "fusionrec/rng.hpp"

namespace fusionrec::synthetic {

namespace {

const std::vector<std::vector<std::string>>& genre_table() {
  static const std::vector<std::vector<std::string>> table{
      {"sci-fi", "space-opera", "cyberpunk"},
      {"horror", "slasher", "supernatural"},
      {"romance", "romantic-drama", "love-story"},
      {"western", "frontier", "outlaw"},
      {"mystery", "detective", "whodunit"},
      {"fantasy", "sword-and-sorcery", "epic-fantasy"},
      {"comedy", "satire", "parody"},
      {"war", "military", "battlefield"},
  };
  return table;
}

const std::vector<std::vector<std::string>>& keyword_table() {
  static const std::vector<std::vector<std::string>> table{
      {"starship", "galaxy", "android", "orbit", "alien", "laser", "planet", "colony",
       "robot", "wormhole", "cosmos", "hyperdrive", "asteroid", "spacesuit", "nebula"},
      {"haunted", "ghost", "blood", "curse", "demon", "scream", "crypt", "nightmare",
       "possessed", "corpse", "shadow", "ritual", "monster", "graveyard", "terror"},
      {"love", "heart", "wedding", "kiss", "passion", "lovers", "affair", "sweetheart",
       "courtship", "longing", "embrace", "devotion", "romance", "bride", "letters"},
      {"cowboy", "ranch", "saloon", "sheriff", "desert", "horse", "gunslinger", "cattle",
       "prairie", "bandit", "frontier", "revolver", "stagecoach", "canyon", "posse"},
      {"murder", "clue", "detective", "suspect", "alibi", "inspector", "evidence", "motive",
       "witness", "victim", "poison", "riddle", "investigation", "secret", "confession"},
      {"dragon", "wizard", "kingdom", "sword", "quest", "elf", "sorcery", "prophecy",
       "castle", "enchanted", "realm", "spell", "throne", "dwarf", "amulet"},
      {"hilarious", "prank", "awkward", "jokes", "mishap", "quirky", "slapstick", "witty",
       "roommate", "blunder", "chaos", "banter", "laughs", "farce", "misfit"},
      {"soldier", "battle", "army", "trench", "general", "invasion", "regiment", "bomber",
       "frontline", "sergeant", "platoon", "siege", "artillery", "veteran", "resistance"},
  };
  return table;
}

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = [] {
    static const char* syllables[] = {"ka", "lo", "mi", "ren", "tu", "sa", "vel", "dor",
                                      "pi", "ne", "sho", "ra", "gu", "ta", "bel", "fo"};
    std::vector<std::string> out;
    for (const char* a : syllables)
      for (const char* b : syllables) out.push_back(std::string(a) + b);
    return out;  // 256 neutral tokens
  }();
  return words;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(rng.below(v.size()))];
}

std::size_t other_cluster(Rng& rng, std::size_t c) {
  return (c + 1 + static_cast<std::size_t>(rng.below(kClusters - 1))) % kClusters;
}

Item make_item(Rng& rng, const Config& cfg, Domain domain, std::size_t serial,
               std::size_t genre_cluster, std::size_t text_cluster) {
  Item item;
  item.domain = domain;
  const char* prefix = domain == Domain::Source ? "m" : "b";
  item.id = prefix + std::to_string(serial);
  item.title = std::string(domain == Domain::Source ? "Movie " : "Book ") + std::to_string(serial);

  auto genres = cluster_genres(genre_cluster);
  rng.shuffle(std::span(genres));
  genres.resize(2);
  item.genres = genres;

  std::vector<std::string> words;
  for (std::size_t k = 0; k < cfg.keywords_per_description; ++k)
    words.push_back(pick(rng, cluster_keywords(text_cluster)));
  for (std::size_t k = 0; k < cfg.filler_per_description; ++k) words.push_back(pick(rng, filler_words()));
  rng.shuffle(std::span(words));
  for (std::size_t k = 0; k < words.size(); ++k) {
    if (k) item.description.push_back(' ');
    item.description += words[k];
  }
  item.description.push_back('.');
  return item;
}

}  // namespace

const std::vector<std::string>& cluster_genres(std::size_t cluster) {
  return genre_table().at(cluster);
}

const std::vector<std::string>& cluster_keywords(std::size_t cluster) {
  return keyword_table().at(cluster);
}

Dataset generate(const Config& cfg) {
  Rng rng(cfg.seed);
  Dataset ds;

  auto build = [&](Domain domain, std::size_t count, Catalog& catalog,
                   std::vector<std::size_t>& gcs, std::vector<std::size_t>& tcs) {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t gc = i % kClusters;
      std::size_t tc = gc;
      if (domain == Domain::Target && rng.uniform() < cfg.mixed_fraction) tc = other_cluster(rng, gc);
      catalog.items.push_back(make_item(rng, cfg, domain, i, gc, tc));
      gcs.push_back(gc);
      tcs.push_back(tc);
    }
  };
  build(Domain::Source, cfg.source_items, ds.source, ds.source_genre_cluster, ds.source_text_cluster);
  build(Domain::Target, cfg.target_items, ds.target, ds.target_genre_cluster, ds.target_text_cluster);

  // Candidates per cluster: pure source items; target items touching the cluster.
  std::vector<std::vector<std::size_t>> pure_sources(kClusters), related_targets(kClusters),
      unrelated_targets(kClusters);
  for (std::size_t i = 0; i < cfg.source_items; ++i)
    if (ds.source_genre_cluster[i] == ds.source_text_cluster[i])
      pure_sources[ds.source_genre_cluster[i]].push_back(i);
  for (std::size_t i = 0; i < cfg.target_items; ++i) {
    for (std::size_t c = 0; c < kClusters; ++c) {
      const bool related = ds.target_genre_cluster[i] == c || ds.target_text_cluster[i] == c;
      (related ? related_targets : unrelated_targets)[c].push_back(i);
    }
  }

  for (std::size_t u = 0; u < cfg.users; ++u) {
    const std::size_t home = u % kClusters;
    const std::string user_id = "u" + std::to_string(u);
    auto sources = pure_sources[home];
    rng.shuffle(std::span(sources));
    for (std::size_t k = 0; k < std::min(cfg.liked_sources_per_user, sources.size()); ++k)
      ds.ratings.push_back({user_id, ds.source.items[sources[k]].id, Domain::Source, 5.0});

    auto related = related_targets[home];
    rng.shuffle(std::span(related));
    const std::size_t liked = std::min(cfg.rated_targets_per_user, related.size());
    for (std::size_t k = 0; k < liked; ++k) {
      const auto t = related[k];
      const int affinity = (ds.target_genre_cluster[t] == home) + (ds.target_text_cluster[t] == home);
      ds.ratings.push_back({user_id, ds.target.items[t].id, Domain::Target, affinity == 2 ? 5.0 : 4.0});
    }
    // A few disliked items; they are filtered out by the liked-item rule.
    for (std::size_t k = 0; k < 3 && !unrelated_targets[home].empty(); ++k) {
      const auto t = pick(rng, unrelated_targets[home]);
      ds.ratings.push_back({user_id, ds.target.items[t].id, Domain::Target, 1.0 + static_cast<double>(rng.below(2))});
    }
  }
  return ds;
}

}  // namespace fusionrec::synthetic
