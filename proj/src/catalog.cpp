#include "fusionrec/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "fusionrec/binary_io.hpp"
#include "fusionrec/errors.hpp"
#include "fusionrec/text.hpp"

namespace fusionrec {

using nlohmann::json;

std::string_view to_string(Domain d) { return d == Domain::Source ? "source" : "target"; }

std::optional<Domain> parse_domain(std::string_view s) {
  if (s == "source") return Domain::Source;
  if (s == "target") return Domain::Target;
  return std::nullopt;
}

std::map<Domain, std::size_t> Catalog::domain_counts() const {
  std::map<Domain, std::size_t> counts{{Domain::Source, 0}, {Domain::Target, 0}};
  for (const auto& item : items) ++counts[item.domain];
  return counts;
}

Catalog Catalog::of(Domain d) const {
  Catalog out;
  for (const auto& item : items)
    if (item.domain == d) out.items.push_back(item);
  return out;
}

ItemLookup::ItemLookup(const std::vector<Item>& items) : items_(&items) {
  pos_.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) pos_.emplace(items[i].id, i);
}

const Item* ItemLookup::find(std::string_view id) const {
  auto p = position(id);
  return p ? &(*items_)[*p] : nullptr;
}

std::optional<std::size_t> ItemLookup::position(std::string_view id) const {
  auto it = pos_.find(std::string(id));
  if (it == pos_.end()) return std::nullopt;
  return it->second;
}

std::string normalize_genre(std::string_view genre) {
  const std::string lower = text::lowercase(text::trim(genre));
  std::string out;
  bool pending_space = false;
  for (char c : lower) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back('-');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

namespace {

std::vector<std::string> normalize_genres(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& g : raw) {
    auto n = normalize_genre(g);
    if (n.empty() || !seen.insert(n).second) continue;
    out.push_back(std::move(n));
  }
  return out;
}

// Throws std::invalid_argument with a human-readable reason.
Item item_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  auto str_field = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
    if (!it->is_string()) throw std::invalid_argument(std::string("field '") + key + "' is not a string");
    return it->get<std::string>();
  };
  Item item;
  item.id = str_field("id");
  if (item.id.empty()) throw std::invalid_argument("empty id");
  item.title = str_field("title");
  item.description = str_field("description");
  auto g = j.find("genres");
  if (g == j.end()) throw std::invalid_argument("missing field 'genres'");
  if (!g->is_array()) throw std::invalid_argument("field 'genres' is not an array");
  std::vector<std::string> raw;
  for (const auto& e : *g) {
    if (!e.is_string()) throw std::invalid_argument("genre entry is not a string");
    raw.push_back(e.get<std::string>());
  }
  item.genres = normalize_genres(raw);
  auto d = parse_domain(str_field("domain"));
  if (!d) throw std::invalid_argument("domain must be 'source' or 'target'");
  item.domain = *d;
  return item;
}

void check_tolerance(std::size_t bad, std::size_t rows, const char* what) {
  const std::size_t allowed = std::max<std::size_t>(1, rows / 10);
  if (bad > allowed)
    throw MalformedInput(std::string(what) + ": " + std::to_string(bad) + " of " +
                         std::to_string(rows) + " rows malformed");
}

// Iterates non-blank lines with 1-based line numbers.
template <typename Fn>
void for_each_line(std::string_view content, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    ++line_no;
    auto line = content.substr(start, end - start);
    if (!text::trim(line).empty()) fn(line_no, line);
    start = end + 1;
  }
}

CatalogLoadResult parse_jsonl(std::string_view content) {
  CatalogLoadResult result;
  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    ++result.rows;
    try {
      result.catalog.items.push_back(item_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      result.malformed.push_back({line_no, RecordProblem::Malformed, e.what()});
    } catch (const std::invalid_argument& e) {
      result.malformed.push_back({line_no, RecordProblem::Malformed, e.what()});
    }
  });
  return result;
}

struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
  bool unterminated = false;
};

// RFC 4180 style: quoted fields may hold commas, doubled quotes and newlines.
std::vector<CsvRecord> split_csv(std::string_view content) {
  std::vector<CsvRecord> records;
  std::size_t i = 0;
  std::size_t line = 1;
  while (i < content.size()) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false;
    bool done = false;
    while (!done) {
      if (i >= content.size()) {
        rec.unterminated = in_quotes;
        rec.fields.push_back(std::move(field));
        break;
      }
      char c = content[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < content.size() && content[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
      } else if (c == '"') {
        in_quotes = true;
        ++i;
      } else if (c == ',') {
        rec.fields.push_back(std::move(field));
        field.clear();
        ++i;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') ++i;
        ++i;
        ++line;
        rec.fields.push_back(std::move(field));
        done = true;
      } else {
        field.push_back(c);
        ++i;
      }
    }
    const bool blank = rec.fields.size() == 1 && text::trim(rec.fields[0]).empty();
    if (!blank) records.push_back(std::move(rec));
  }
  return records;
}

CatalogLoadResult parse_csv(std::string_view content) {
  CatalogLoadResult result;
  if (content.size() >= 3 && content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);
  auto records = split_csv(content);
  if (records.empty()) return result;
  static const std::vector<std::string> kColumns{"id", "title", "description", "genres", "domain"};
  std::vector<std::string> header;
  for (const auto& f : records.front().fields) header.emplace_back(text::trim(f));
  if (header != kColumns)
    throw MalformedInput("CSV header must be exactly: id,title,description,genres,domain");
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    ++result.rows;
    if (rec.unterminated) {
      result.malformed.push_back({rec.line, RecordProblem::Malformed, "unterminated quoted field"});
      continue;
    }
    if (rec.fields.size() != kColumns.size()) {
      result.malformed.push_back({rec.line, RecordProblem::Malformed,
                                  "expected 5 fields, got " + std::to_string(rec.fields.size())});
      continue;
    }
    Item item;
    item.id = std::string(text::trim(rec.fields[0]));
    item.title = rec.fields[1];
    item.description = rec.fields[2];
    std::vector<std::string> raw;
    std::string_view gs = rec.fields[3];
    while (true) {
      auto bar = gs.find('|');
      raw.emplace_back(gs.substr(0, bar));
      if (bar == std::string_view::npos) break;
      gs.remove_prefix(bar + 1);
    }
    item.genres = normalize_genres(raw);
    auto d = parse_domain(text::trim(rec.fields[4]));
    if (item.id.empty() || !d) {
      result.malformed.push_back(
          {rec.line, RecordProblem::Malformed, item.id.empty() ? "empty id" : "bad domain"});
      continue;
    }
    item.domain = *d;
    result.catalog.items.push_back(std::move(item));
  }
  return result;
}

std::string csv_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

CatalogLoadResult parse_catalog(std::string_view content, CatalogFormat format) {
  auto result = format == CatalogFormat::Jsonl ? parse_jsonl(content) : parse_csv(content);
  check_tolerance(result.malformed.size(), result.rows, "catalog");
  return result;
}

CatalogLoadResult load_catalog(const std::string& path, CatalogFormat format) {
  return parse_catalog(read_file(path), format);
}

RatingsLoadResult parse_ratings(std::string_view content) {
  RatingsLoadResult result;
  std::size_t malformed = 0;
  for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    ++result.rows;
    try {
      auto j = json::parse(line);
      Rating r;
      r.user_id = j.at("user_id").get<std::string>();
      r.item_id = j.at("item_id").get<std::string>();
      auto d = parse_domain(j.at("domain").get<std::string>());
      if (!d) throw std::invalid_argument("domain must be 'source' or 'target'");
      r.domain = *d;
      const auto& v = j.at("rating");
      if (!v.is_number()) throw std::invalid_argument("rating is not a number");
      r.rating = v.get<double>();
      if (!(r.rating >= 1.0 && r.rating <= 5.0)) {
        result.rejected.push_back({line_no, RecordProblem::RatingOutOfRange,
                                   "rating out of range [1,5]"});
        return;
      }
      result.ratings.push_back(std::move(r));
    } catch (const std::exception& e) {
      ++malformed;
      result.rejected.push_back({line_no, RecordProblem::Malformed, e.what()});
    }
  });
  check_tolerance(malformed, result.rows, "ratings");
  return result;
}

RatingsLoadResult load_ratings(const std::string& path) { return parse_ratings(read_file(path)); }

Catalog clean(const Catalog& catalog, CleanReport* report) {
  CleanReport rep;
  rep.items_in = catalog.items.size();
  Catalog out;
  std::set<std::pair<Domain, std::string>> ids;
  std::set<std::pair<Domain, std::string>> titles;
  for (const auto& original : catalog.items) {
    Item item = original;
    item.genres = normalize_genres(item.genres);
    if (text::trim(item.description).empty() || item.genres.empty()) {
      ++rep.dropped_missing;
      continue;
    }
    const auto title_key = text::lowercase(text::trim(item.title));
    if (ids.contains({item.domain, item.id}) || titles.contains({item.domain, title_key})) {
      ++rep.dropped_duplicate;
      continue;
    }
    ids.insert({item.domain, item.id});
    titles.insert({item.domain, title_key});
    out.items.push_back(std::move(item));
  }
  rep.items_out = out.items.size();
  if (report) *report = rep;
  return out;
}

std::string serialize_catalog(const Catalog& catalog, CatalogFormat format) {
  std::ostringstream os;
  if (format == CatalogFormat::Jsonl) {
    for (const auto& item : catalog.items) {
      json j{{"id", item.id},
             {"title", item.title},
             {"description", item.description},
             {"genres", item.genres},
             {"domain", to_string(item.domain)}};
      os << j.dump() << '\n';
    }
  } else {
    os << "id,title,description,genres,domain\n";
    for (const auto& item : catalog.items) {
      std::string genres;
      for (std::size_t i = 0; i < item.genres.size(); ++i) {
        if (i) genres.push_back('|');
        genres += item.genres[i];
      }
      os << csv_quote(item.id) << ',' << csv_quote(item.title) << ','
         << csv_quote(item.description) << ',' << csv_quote(genres) << ','
         << to_string(item.domain) << '\n';
    }
  }
  return std::move(os).str();
}

void save_catalog(const Catalog& catalog, const std::string& path, CatalogFormat format) {
  write_file(path, serialize_catalog(catalog, format));
}

std::string serialize_ratings(const std::vector<Rating>& ratings) {
  std::ostringstream os;
  for (const auto& r : ratings) {
    json j{{"user_id", r.user_id},
           {"item_id", r.item_id},
           {"domain", to_string(r.domain)},
           {"rating", r.rating}};
    os << j.dump() << '\n';
  }
  return std::move(os).str();
}

}  // namespace fusionrec
