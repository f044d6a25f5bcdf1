#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fusionrec {

enum class Domain { Source, Target };

std::string_view to_string(Domain d);
std::optional<Domain> parse_domain(std::string_view s);

struct Item {
  std::string id;
  std::string title;
  std::string description;
  std::vector<std::string> genres;
  Domain domain = Domain::Source;

  bool operator==(const Item&) const = default;
};

struct Rating {
  std::string user_id;
  std::string item_id;
  Domain domain = Domain::Source;
  double rating = 0.0;

  bool operator==(const Rating&) const = default;
};

struct Catalog {
  std::vector<Item> items;

  std::map<Domain, std::size_t> domain_counts() const;
  /// Items of one domain, in original order.
  Catalog of(Domain d) const;
  bool operator==(const Catalog&) const = default;
};

// Id -> position lookup for one domain of a catalog.
class ItemLookup {
 public:
  ItemLookup() = default;
  explicit ItemLookup(const std::vector<Item>& items);
  const Item* find(std::string_view id) const;
  std::optional<std::size_t> position(std::string_view id) const;

 private:
  const std::vector<Item>* items_ = nullptr;
  std::unordered_map<std::string, std::size_t> pos_;
};

enum class CatalogFormat { Jsonl, Csv };

enum class RecordProblem { Malformed, RatingOutOfRange };

struct MalformedRecord {
  std::size_t line = 0;  // 1-based
  RecordProblem problem = RecordProblem::Malformed;
  std::string reason;
};

struct CatalogLoadResult {
  Catalog catalog;
  std::vector<MalformedRecord> malformed;
  std::size_t rows = 0;
};

struct RatingsLoadResult {
  std::vector<Rating> ratings;
  std::vector<MalformedRecord> rejected;
  std::size_t rows = 0;
};

/// Lowercases, trims, and joins internal whitespace runs with '-'.
std::string normalize_genre(std::string_view genre);

// Rows that fail to parse are collected. The load fails with MalformedInput
// only when more than max(1, rows/10) of the rows are bad.
CatalogLoadResult parse_catalog(std::string_view content, CatalogFormat format);
CatalogLoadResult load_catalog(const std::string& path, CatalogFormat format);

RatingsLoadResult parse_ratings(std::string_view content);
RatingsLoadResult load_ratings(const std::string& path);

struct CleanReport {
  std::size_t items_in = 0;
  std::size_t items_out = 0;
  std::size_t dropped_missing = 0;
  std::size_t dropped_duplicate = 0;
};

// Drops items with blank description or no genres, then removes duplicates
// by (domain, id) and by (domain, lowercased trimmed title), keeping the
// first occurrence. Non-Latin text is kept as is.
Catalog clean(const Catalog& catalog, CleanReport* report = nullptr);

std::string serialize_catalog(const Catalog& catalog, CatalogFormat format = CatalogFormat::Jsonl);
void save_catalog(const Catalog& catalog, const std::string& path,
                  CatalogFormat format = CatalogFormat::Jsonl);

std::string serialize_ratings(const std::vector<Rating>& ratings);

}  // namespace fusionrec
