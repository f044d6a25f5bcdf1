// Command-line front end: one subcommand per pipeline stage, files in between.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fusionrec/binary_io.hpp"
#include "fusionrec/catalog.hpp"
#include "fusionrec/encoder.hpp"
#include "fusionrec/errors.hpp"
#include "fusionrec/evaluation.hpp"
#include "fusionrec/features.hpp"
#include "fusionrec/fusion.hpp"
#include "fusionrec/genre_model.hpp"
#include "fusionrec/index.hpp"
#include "fusionrec/recommender.hpp"
#include "fusionrec/scoring.hpp"
#include "fusionrec/synthetic.hpp"
#include "fusionrec/text.hpp"
#include "fusionrec/trainer.hpp"

namespace fr = fusionrec;
using json = nlohmann::ordered_json;

namespace {

enum Exit : int { kOk = 0, kUsage = 2, kTrainFailure = 3, kInferenceFailure = 4, kEvalFailure = 5 };

struct GlobalOptions {
  std::string config;
  std::uint64_t seed = 7;
  std::string provider = "fallback";
  std::string embeddings;
};

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

void status(const std::string& line) { std::cerr << line << '\n'; }

std::unique_ptr<fr::EncoderProvider> make_encoder(const GlobalOptions& g) {
  if (g.provider == "file") {
    if (g.embeddings.empty()) throw fr::InvalidConfig("--provider file requires --embeddings <path>");
    return std::make_unique<fr::FileEmbeddingProvider>(fr::FileEmbeddingProvider::from_file(g.embeddings));
  }
  return std::make_unique<fr::FallbackEncoder>();
}

fr::Catalog load_clean(const std::string& path, std::optional<fr::Domain> domain) {
  auto result = fr::load_catalog(path, fr::CatalogFormat::Jsonl);
  for (const auto& m : result.malformed)
    status("warning: " + path + ":" + std::to_string(m.line) + ": " + m.reason);
  auto cat = fr::clean(result.catalog);
  return domain ? cat.of(*domain) : cat;
}

void write_text(const std::string& path, const std::string& text) {
  fr::write_file(path, text.back() == '\n' ? text : text + "\n");
}

// --- config file ----------------------------------------------------------

// Flattens a JSON object into dotted keys.
void flatten(const nlohmann::json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    std::string joined;
    for (const auto& x : j) {
      if (!joined.empty()) joined += ",";
      joined += x.is_string() ? x.get<std::string>() : x.dump();
    }
    out[prefix] = joined;
  } else {
    out[prefix] = j.is_string() ? j.get<std::string>() : j.dump();
  }
}

std::map<std::string, std::string> read_config(const std::string& path) {
  const auto content = fr::read_file(path);
  std::map<std::string, std::string> out;
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::exception& e) {
      throw fr::MalformedInput("config " + path + ": " + e.what());
    }
    flatten(j, "", out);
    return out;
  }
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = fr::text::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw fr::MalformedInput("config " + path + ":" + std::to_string(lineno) + ": expected key=value");
    out[std::string(fr::text::trim(t.substr(0, eq)))] = std::string(fr::text::trim(t.substr(eq + 1)));
  }
  return out;
}

// Config values become extra arguments for options the command line left
// unset, so flags always win. Keys are matched on their last dotted
// component with '_' read as '-', e.g. scoring.weights -> --weights.
std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app) {
  std::string config_path;
  CLI::App* sub = nullptr;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    if (!sub && args[i].rfind("-", 0) != 0) {
      for (auto* s : app.get_subcommands({}))
        if (s->get_name() == args[i]) sub = s;
    }
  }
  if (config_path.empty()) return args;
  auto out = args;
  for (const auto& [key, value] : read_config(config_path)) {
    auto name = key.substr(key.rfind('.') == std::string::npos ? 0 : key.rfind('.') + 1);
    std::replace(name.begin(), name.end(), '_', '-');
    const std::string flag = "--" + name;
    if (flag == "--config") continue;
    const bool known = (sub && sub->get_option_no_throw(flag)) || app.get_option_no_throw(flag);
    if (!known) {
      status("warning: config key '" + key + "' does not apply to this command");
      continue;
    }
    bool given = false;
    for (const auto& a : args) given |= a == flag || a.rfind(flag + "=", 0) == 0;
    if (!given) {
      out.push_back(flag);
      out.push_back(value);
    }
  }
  return out;
}

// --- commands --------------------------------------------------------------

struct IngestArgs {
  std::string input;
  std::string format = "jsonl";
  std::string out;
  std::string ratings;
  std::string ratings_out;
};

int cmd_ingest(const IngestArgs& a) {
  const auto format = a.format == "csv" ? fr::CatalogFormat::Csv : fr::CatalogFormat::Jsonl;
  auto loaded = fr::load_catalog(a.input, format);
  fr::CleanReport report;
  auto cleaned = fr::clean(loaded.catalog, &report);
  if (!a.out.empty()) fr::save_catalog(cleaned, a.out);
  json j;
  j["input"] = a.input;
  j["rows"] = loaded.rows;
  j["malformed_rows"] = loaded.malformed.size();
  j["items_in"] = report.items_in;
  j["items_out"] = report.items_out;
  j["dropped_missing"] = report.dropped_missing;
  j["dropped_duplicate"] = report.dropped_duplicate;
  const auto counts = cleaned.domain_counts();
  j["source_items"] = counts.contains(fr::Domain::Source) ? counts.at(fr::Domain::Source) : 0;
  j["target_items"] = counts.contains(fr::Domain::Target) ? counts.at(fr::Domain::Target) : 0;
  for (const auto& m : loaded.malformed)
    status("warning: " + a.input + ":" + std::to_string(m.line) + ": " + m.reason);
  if (!a.ratings.empty()) {
    auto r = fr::load_ratings(a.ratings);
    for (const auto& m : r.rejected)
      status("warning: " + a.ratings + ":" + std::to_string(m.line) + ": " + m.reason);
    if (!a.ratings_out.empty()) write_text(a.ratings_out, fr::serialize_ratings(r.ratings));
    j["ratings_in"] = r.rows;
    j["ratings_out"] = r.ratings.size();
    j["ratings_rejected"] = r.rejected.size();
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

struct SynthArgs {
  std::string out_dir;
  std::size_t source_items = 600;
  std::size_t target_items = 600;
  std::size_t users = 240;
  double mixed_fraction = 0.4;
};

int cmd_synth(const SynthArgs& a, const GlobalOptions& g) {
  fr::synthetic::Config cfg;
  cfg.source_items = a.source_items;
  cfg.target_items = a.target_items;
  cfg.users = a.users;
  cfg.mixed_fraction = a.mixed_fraction;
  cfg.seed = g.seed;
  auto ds = fr::synthetic::generate(cfg);
  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);
  fr::Catalog all = ds.source;
  all.items.insert(all.items.end(), ds.target.items.begin(), ds.target.items.end());
  fr::save_catalog(all, (dir / "catalog.jsonl").string());
  write_text((dir / "ratings.jsonl").string(), fr::serialize_ratings(ds.ratings));
  json j;
  j["seed"] = g.seed;
  j["source_items"] = ds.source.items.size();
  j["target_items"] = ds.target.items.size();
  j["ratings"] = ds.ratings.size();
  j["catalog"] = (dir / "catalog.jsonl").string();
  j["ratings_file"] = (dir / "ratings.jsonl").string();
  std::cout << j.dump(2) << '\n';
  return kOk;
}

struct GenreArgs {
  std::string catalog;
  std::string out;
  fr::GenreTrainConfig cfg;
};

int cmd_train_genres(GenreArgs a, const GlobalOptions& g) {
  a.cfg.seed = g.seed;
  const auto cat = load_clean(a.catalog, std::nullopt);
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(cat.items.size());
  for (const auto& item : cat.items) corpus.push_back(item.genres);
  auto model = fr::train_genre_model(corpus, a.cfg);
  const auto bytes = model.serialize();
  fr::write_file(a.out, bytes);
  json j;
  j["seed"] = g.seed;
  j["sequences"] = corpus.size();
  j["vocabulary"] = model.vocabulary().size();
  j["buckets"] = model.bucket_count();
  j["epochs"] = a.cfg.epochs;
  j["fingerprint"] = hex64(fr::fnv1a64(bytes));
  std::cout << j.dump(2) << '\n';
  return kOk;
}

struct TrainArgs {
  std::string catalog;
  std::string ratings;
  std::string genre_model;
  std::string out;
  std::string report;
  fr::TrainConfig cfg;
  fr::PairSamplingConfig pairs;
};

int cmd_train(TrainArgs a, const GlobalOptions& g) {
  a.cfg.seed = g.seed;
  a.pairs.seed = g.seed;
  a.cfg.validate();
  const auto cat = load_clean(a.catalog, std::nullopt);
  const auto source = cat.of(fr::Domain::Source).items;
  const auto target = cat.of(fr::Domain::Target).items;
  const auto genre_model = fr::GenreEmbeddingModel::load(a.genre_model);
  auto encoder = make_encoder(g);
  std::vector<fr::Rating> ratings;
  if (!a.ratings.empty()) ratings = fr::load_ratings(a.ratings).ratings;
  const auto pairs = fr::sample_pairs(source, target, a.ratings.empty() ? nullptr : &ratings, a.pairs);
  status("seed=" + std::to_string(g.seed) + " provider=" + encoder->provider_id() +
         " pairs=" + std::to_string(pairs.size()));
  auto result = fr::train(source, target, *encoder, genre_model, pairs, a.cfg);
  fr::FusionCheckpoint ckpt{std::move(result.params), g.seed, a.cfg.epochs};
  const auto bytes = fr::serialize_checkpoint(ckpt);
  fr::write_file(a.out, bytes);
  auto report = json::parse(fr::training_report_json(result.report));
  report["provider"] = encoder->provider_id();
  report["checkpoint_fingerprint"] = hex64(fr::fnv1a64(bytes));
  if (!a.report.empty()) write_text(a.report, report.dump(2));
  std::cout << report.dump(2) << '\n';
  return kOk;
}

struct IndexArgs {
  std::string catalog;
  std::string genre_model;
  std::string model;
  std::string out;
  std::string tfidf_out;
  fr::IndexBuildConfig cfg;
};

fr::TfidfModel fit_tfidf(const fr::Catalog& cat) {
  std::vector<std::string> docs;
  docs.reserve(cat.items.size());
  for (const auto& item : cat.items) docs.push_back(item.description);
  return fr::TfidfModel::fit(docs);
}

int cmd_index(const IndexArgs& a, const GlobalOptions& g) {
  const auto cat = load_clean(a.catalog, std::nullopt);
  const auto target = cat.of(fr::Domain::Target).items;
  const auto genre_model = fr::GenreEmbeddingModel::load(a.genre_model);
  const auto ckpt = fr::load_checkpoint(a.model);
  auto encoder = make_encoder(g);
  const auto tfidf = fit_tfidf(cat);
  tfidf.save(a.tfidf_out);
  auto index = fr::build_index(target, *encoder, genre_model, ckpt, tfidf, a.cfg);
  const auto bytes = fr::serialize_index(index);
  fr::write_file(a.out, bytes);
  json j;
  j["items"] = index.size();
  j["provider"] = index.provider_id;
  j["model_fingerprint"] = hex64(index.model_fingerprint);
  j["tfidf_fingerprint"] = hex64(index.tfidf_fingerprint);
  j["index_fingerprint"] = hex64(fr::fnv1a64(bytes));
  j["bytes"] = bytes.size();
  std::cout << j.dump(2) << '\n';
  return kOk;
}

// Artifacts needed at query time.
struct QueryArgs {
  std::string catalog;
  std::string genre_model;
  std::string model;
  std::string index;
  std::string tfidf;
  std::string weights = "0.333333333333333333,0.333333333333333333,0.333333333333333333";
};

struct LoadedArtifacts {
  fr::Catalog catalog;
  std::vector<fr::Item> source;
  fr::GenreEmbeddingModel genre_model;
  fr::FusionCheckpoint checkpoint;
  fr::TfidfModel tfidf;
  fr::FeatureIndex index;
  std::unique_ptr<fr::EncoderProvider> encoder;
  fr::ScoreWeights weights;
};

fr::ScoreWeights parse_weights(const std::string& w) {
  auto parsed = fr::ScoreWeights::parse(w);
  parsed.validate();
  return parsed;
}

LoadedArtifacts load_artifacts(const QueryArgs& a, const GlobalOptions& g) {
  auto weights = parse_weights(a.weights);
  auto catalog = load_clean(a.catalog, std::nullopt);
  auto source = catalog.of(fr::Domain::Source).items;
  LoadedArtifacts out{std::move(catalog),
                      std::move(source),
                      fr::GenreEmbeddingModel::load(a.genre_model),
                      fr::load_checkpoint(a.model),
                      fr::TfidfModel::load(a.tfidf),
                      fr::load_index(a.index),
                      make_encoder(g),
                      weights};
  status("seed=" + std::to_string(g.seed) + " index=" + hex64(fr::fnv1a64(fr::read_file(a.index))) +
         " model=" + hex64(fr::fingerprint(out.checkpoint)) +
         " tfidf=" + hex64(out.tfidf.fingerprint()));
  return out;
}

struct RecommendArgs {
  QueryArgs query;
  std::string seeds;
  std::size_t k = 10;
  std::string format = "json";
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    auto t = std::string(fr::text::trim(cur));
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

int cmd_recommend(const RecommendArgs& a, const GlobalOptions& g) {
  auto art = load_artifacts(a.query, g);
  const auto seeds = split_csv(a.seeds);
  if (seeds.empty()) throw fr::InvalidConfig("--seeds needs at least one id");
  fr::Recommender rec(art.source, art.index, *art.encoder, art.genre_model, art.checkpoint, art.tfidf);
  const auto recs = rec.recommend({seeds, a.k}, art.weights);
  auto title_of = [&](const std::string& id) {
    for (const auto& item : art.catalog.items)
      if (item.id == id && item.domain == fr::Domain::Target) return item.title;
    return std::string();
  };
  if (a.format == "table") {
    std::cout << std::left << std::setw(5) << "rank" << std::setw(12) << "target_id" << std::setw(32)
              << "title" << std::right << std::setw(10) << "combined" << std::setw(10) << "fusion"
              << std::setw(10) << "genre" << std::setw(10) << "tfidf" << '\n';
    std::cout << std::fixed << std::setprecision(4);
    for (const auto& r : recs) {
      auto title = title_of(r.target_id);
      if (title.size() > 30) title = title.substr(0, 27) + "...";
      std::cout << std::left << std::setw(5) << r.rank << std::setw(12) << r.target_id << std::setw(32)
                << title << std::right << std::setw(10) << r.breakdown.combined << std::setw(10)
                << r.breakdown.fusion_sim << std::setw(10) << r.breakdown.genre_sim << std::setw(10)
                << r.breakdown.tfidf_sim << '\n';
    }
    return kOk;
  }
  json out = json::array();
  for (const auto& r : recs) {
    json row;
    row["rank"] = r.rank;
    row["target_id"] = r.target_id;
    row["title"] = title_of(r.target_id);
    row["combined"] = r.breakdown.combined;
    row["fusion_sim"] = r.breakdown.fusion_sim;
    row["genre_sim"] = r.breakdown.genre_sim;
    row["tfidf_sim"] = r.breakdown.tfidf_sim;
    out.push_back(row);
  }
  std::cout << out.dump(2) << '\n';
  return kOk;
}

struct EvalArgs {
  QueryArgs query;
  std::string ratings;
  std::string mode = "fused";
  std::string out;
  std::string out_dir;
  std::string thresholds = "20,50,80";
};

std::vector<int> parse_thresholds(const std::string& s) {
  std::vector<int> out;
  for (const auto& t : split_csv(s)) {
    try {
      std::size_t used = 0;
      const int p = std::stoi(t, &used);
      if (used != t.size() || p < 1 || p > 100) throw std::invalid_argument(t);
      out.push_back(p);
    } catch (const std::exception&) {
      throw fr::InvalidConfig("threshold '" + t + "' is not a percentage in [1, 100]");
    }
  }
  if (out.empty()) throw fr::InvalidConfig("no thresholds given");
  return out;
}

std::string config_echo(const EvalArgs& a, const GlobalOptions& g, const fr::ScoreWeights& w,
                        const std::string& provider) {
  json j;
  j["seed"] = g.seed;
  j["provider"] = provider;
  j["weights"] = {w.fusion, w.genre, w.tfidf};
  j["catalog"] = std::filesystem::path(a.query.catalog).filename().string();
  j["ratings"] = std::filesystem::path(a.ratings).filename().string();
  return j.dump();
}

int run_evaluation(const EvalArgs& a, const GlobalOptions& g, const std::vector<fr::EvalMode>& modes,
                   bool per_mode_files) {
  const auto thresholds = parse_thresholds(a.thresholds);
  auto art = load_artifacts(a.query, g);
  const auto target = art.catalog.of(fr::Domain::Target).items;
  const auto ratings = fr::load_ratings(a.ratings).ratings;
  const auto users = fr::build_eval_users(ratings);
  fr::Recommender rec(art.source, art.index, *art.encoder, art.genre_model, art.checkpoint, art.tfidf);
  auto features = fr::compute_features(target, *art.encoder, art.genre_model);
  if (features.ids != art.index.item_ids)
    throw fr::IncompatibleIndex("index rows do not match the target items of the catalog");
  fr::Evaluator evaluator(rec, std::move(features.text));

  auto echo = json::parse(config_echo(a, g, art.weights, art.encoder->provider_id()));
  echo["model_fingerprint"] = hex64(fr::fingerprint(art.checkpoint));
  echo["tfidf_fingerprint"] = hex64(art.tfidf.fingerprint());
  if (per_mode_files) std::filesystem::create_directories(a.out_dir);
  json summary = json::array();
  for (auto mode : modes) {
    const auto report = evaluator.evaluate(users, mode, art.weights, thresholds);
    const auto text = fr::eval_report_json(report, echo.dump());
    if (per_mode_files) {
      const auto path = (std::filesystem::path(a.out_dir) / ("report_" + std::string(fr::to_string(mode)) + ".json")).string();
      write_text(path, text);
      json row;
      row["mode"] = fr::to_string(mode);
      row["file"] = path;
      for (const auto& [p, v] : report.mae) row["mae@" + std::to_string(p)] = v;
      for (const auto& [p, v] : report.rmse) row["rmse@" + std::to_string(p)] = v;
      summary.push_back(row);
    } else if (!a.out.empty()) {
      write_text(a.out, text);
      std::cout << text << '\n';
    } else {
      std::cout << text << '\n';
    }
  }
  if (per_mode_files) std::cout << summary.dump(2) << '\n';
  return kOk;
}

// Failure classes that mean "fix your inputs" regardless of the stage.
bool is_usage_error(const std::exception& e) {
  return dynamic_cast<const fr::FileNotFound*>(&e) || dynamic_cast<const fr::MalformedInput*>(&e) ||
         dynamic_cast<const fr::InvalidConfig*>(&e) || dynamic_cast<const fr::InvalidWeights*>(&e);
}

void add_query_options(CLI::App* sub, QueryArgs& q) {
  sub->add_option("--catalog", q.catalog, "Catalog JSONL (source and target items)")->required();
  sub->add_option("--genre-model", q.genre_model, "Genre model file")->required();
  sub->add_option("--model", q.model, "Fusion checkpoint file")->required();
  sub->add_option("--index", q.index, "Target index file")->required();
  sub->add_option("--tfidf", q.tfidf, "TF-IDF model file")->required();
  sub->add_option("--weights", q.weights, "Score weights w_fusion,w_genre,w_tfidf (sum to 1)")
      ->default_str("1/3,1/3,1/3");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-domain cold-start recommender: movies in, books out."};
  app.require_subcommand(1);
  app.fallthrough();
  app.get_formatter()->column_width(36);

  GlobalOptions g;
  app.add_option("--config", g.config, "Config file (key=value lines or JSON); flags take precedence");
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--provider", g.provider, "Text encoder provider")
      ->check(CLI::IsMember({"file", "fallback"}))
      ->capture_default_str();
  app.add_option("--embeddings", g.embeddings, "Embedding file for --provider file");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Load, validate and clean a catalog");
  c_ingest->add_option("--input", ingest.input, "Catalog file")->required();
  c_ingest->add_option("--format", ingest.format, "Input format")
      ->check(CLI::IsMember({"jsonl", "csv"}))
      ->capture_default_str();
  c_ingest->add_option("--out", ingest.out, "Write the cleaned catalog here (JSONL)");
  c_ingest->add_option("--ratings", ingest.ratings, "Ratings JSONL to validate");
  c_ingest->add_option("--ratings-out", ingest.ratings_out, "Write accepted ratings here");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate the planted synthetic dataset");
  c_synth->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  c_synth->add_option("--source-items", synth.source_items, "Source items")->capture_default_str();
  c_synth->add_option("--target-items", synth.target_items, "Target items")->capture_default_str();
  c_synth->add_option("--users", synth.users, "Users")->capture_default_str();
  c_synth->add_option("--mixed-fraction", synth.mixed_fraction, "Share of items whose genre and text clusters differ")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  GenreArgs genres;
  auto* c_genres = app.add_subcommand("train-genres", "Train subword genre embeddings");
  c_genres->add_option("--catalog", genres.catalog, "Catalog JSONL")->required();
  c_genres->add_option("--out", genres.out, "Genre model output file")->required();
  c_genres->add_option("--epochs", genres.cfg.epochs, "Epochs")->check(CLI::PositiveNumber)->capture_default_str();
  c_genres->add_option("--lr", genres.cfg.lr, "Initial learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  c_genres->add_option("--window", genres.cfg.window, "Context window")->check(CLI::PositiveNumber)->capture_default_str();
  c_genres->add_option("--negatives", genres.cfg.negatives, "Negative samples")->capture_default_str();
  c_genres->add_option("--min-n", genres.cfg.min_n, "Shortest character n-gram")->check(CLI::PositiveNumber)->capture_default_str();
  c_genres->add_option("--max-n", genres.cfg.max_n, "Longest character n-gram")->check(CLI::PositiveNumber)->capture_default_str();
  c_genres->add_option("--buckets", genres.cfg.buckets, "Hash buckets for n-grams")->check(CLI::PositiveNumber)->capture_default_str();

  TrainArgs train;
  train.pairs.max_positives = 4096;
  auto* c_train = app.add_subcommand("train", "Train the fusion network");
  c_train->add_option("--catalog", train.catalog, "Catalog JSONL")->required();
  c_train->add_option("--genre-model", train.genre_model, "Genre model file")->required();
  c_train->add_option("--ratings", train.ratings, "Ratings JSONL (adds co-liked positives)");
  c_train->add_option("--out", train.out, "Checkpoint output file")->required();
  c_train->add_option("--report", train.report, "Write the training report JSON here");
  c_train->add_option("--epochs", train.cfg.epochs, "Epochs")->capture_default_str();
  c_train->add_option("--batch-size", train.cfg.batch_size, "Batch size")->capture_default_str();
  c_train->add_option("--lr", train.cfg.base_lr, "Base learning rate")->capture_default_str();
  c_train->add_option("--margin", train.cfg.margin, "Cosine loss margin for negatives")->capture_default_str();
  c_train->add_option("--max-grad-norm", train.cfg.max_grad_norm, "Gradient clipping norm")->capture_default_str();
  c_train->add_option("--t0", train.cfg.T_0, "Epochs in the first cosine period")->capture_default_str();
  c_train->add_option("--t-mult", train.cfg.T_mult, "Period growth factor")->capture_default_str();
  c_train->add_option("--eta-min", train.cfg.eta_min, "Minimum learning rate")->capture_default_str();
  c_train->add_option("--weight-decay", train.cfg.weight_decay, "AdamW weight decay")->capture_default_str();
  c_train->add_option("--jaccard", train.pairs.jaccard_threshold, "Genre Jaccard threshold for positives")->capture_default_str();
  c_train->add_option("--negatives", train.pairs.negatives_per_positive, "Negatives per positive")->capture_default_str();
  c_train->add_option("--max-positives", train.pairs.max_positives, "Cap on positive pairs, 0 for no cap")->capture_default_str();

  IndexArgs index;
  auto* c_index = app.add_subcommand("index", "Precompute target features");
  c_index->add_option("--catalog", index.catalog, "Catalog JSONL")->required();
  c_index->add_option("--genre-model", index.genre_model, "Genre model file")->required();
  c_index->add_option("--model", index.model, "Fusion checkpoint file")->required();
  c_index->add_option("--out", index.out, "Index output file")->required();
  c_index->add_option("--tfidf-out", index.tfidf_out, "TF-IDF model output file")->required();
  c_index->add_option("--batch-size", index.cfg.batch_size, "Items per batch")->check(CLI::PositiveNumber)->capture_default_str();
  c_index->add_option("--threads", index.cfg.parallelism, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  RecommendArgs recommend;
  auto* c_rec = app.add_subcommand("recommend", "Recommend target items for seed source items");
  add_query_options(c_rec, recommend.query);
  c_rec->add_option("--seeds", recommend.seeds, "Comma-separated source item ids")->required();
  c_rec->add_option("--k", recommend.k, "Number of results")->capture_default_str();
  c_rec->add_option("--format", recommend.format, "Output format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();

  EvalArgs evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "MAE/RMSE at rank thresholds for one mode");
  add_query_options(c_eval, evaluate.query);
  c_eval->add_option("--ratings", evaluate.ratings, "Ratings JSONL")->required();
  c_eval->add_option("--mode", evaluate.mode, "Scoring mode")
      ->check(CLI::IsMember({"fused", "text_only", "genre_only", "tfidf_only"}))
      ->capture_default_str();
  c_eval->add_option("--thresholds", evaluate.thresholds, "Rank thresholds in percent")->capture_default_str();
  c_eval->add_option("--out", evaluate.out, "Write the report here as well as to stdout");

  EvalArgs ablate;
  auto* c_ablate = app.add_subcommand("ablate", "Evaluate all four modes");
  add_query_options(c_ablate, ablate.query);
  c_ablate->add_option("--ratings", ablate.ratings, "Ratings JSONL")->required();
  c_ablate->add_option("--thresholds", ablate.thresholds, "Rank thresholds in percent")->capture_default_str();
  c_ablate->add_option("--out-dir", ablate.out_dir, "Directory for report_<mode>.json")->required();

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = merge_config(args, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const fr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  int failure = kUsage;
  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest);
    if (c_synth->parsed()) return cmd_synth(synth, g);
    if (c_genres->parsed()) {
      failure = kTrainFailure;
      return cmd_train_genres(genres, g);
    }
    if (c_train->parsed()) {
      failure = kTrainFailure;
      return cmd_train(train, g);
    }
    if (c_index->parsed()) {
      failure = kInferenceFailure;
      return cmd_index(index, g);
    }
    if (c_rec->parsed()) {
      failure = kInferenceFailure;
      return cmd_recommend(recommend, g);
    }
    if (c_eval->parsed()) {
      failure = kEvalFailure;
      return run_evaluation(evaluate, g, {*fr::parse_eval_mode(evaluate.mode)}, false);
    }
    if (c_ablate->parsed()) {
      failure = kEvalFailure;
      return run_evaluation(ablate, g, {fr::kAllModes.begin(), fr::kAllModes.end()}, true);
    }
  } catch (const fr::UnknownSeedId& e) {
    std::cerr << "error: unknown seed id '" << e.id() << "'\n";
    return kInferenceFailure;
  } catch (const fr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_usage_error(e) ? kUsage : failure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failure;
  }
  return kUsage;
}
