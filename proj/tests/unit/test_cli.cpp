#include <doctest.h>

#include <array>
#include <cstdio>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "fusionrec/binary_io.hpp"
#include "test_helpers.hpp"

using fusionrec::testing::TempDir;
using json = nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run(const TempDir& dir, const std::string& args) {
  const auto err_path = dir.file("stderr.txt");
  const std::string cmd = std::string(FUSIONREC_CLI_PATH) + " " + args + " 2>" + err_path;
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = fusionrec::read_file(err_path);
  return r;
}

// Synthetic data plus trained artifacts, built once per test case.
struct Pipeline {
  TempDir dir;
  std::string artifacts;

  Pipeline() {
    const auto d = dir.path().string();
    REQUIRE(run(dir, "synth --out-dir " + d + "/data --source-items 60 --target-items 60 --users 24").code == 0);
    REQUIRE(run(dir, "train-genres --catalog " + d + "/data/catalog.jsonl --out " + d + "/g.bin --buckets 4096").code == 0);
    REQUIRE(run(dir, "train --catalog " + d + "/data/catalog.jsonl --ratings " + d +
                         "/data/ratings.jsonl --genre-model " + d + "/g.bin --out " + d +
                         "/m.bin --max-positives 64").code == 0);
    REQUIRE(run(dir, "index --catalog " + d + "/data/catalog.jsonl --genre-model " + d + "/g.bin --model " +
                         d + "/m.bin --out " + d + "/i.bin --tfidf-out " + d + "/t.bin").code == 0);
    artifacts = "--catalog " + d + "/data/catalog.jsonl --genre-model " + d + "/g.bin --model " + d +
                "/m.bin --index " + d + "/i.bin --tfidf " + d + "/t.bin";
  }
  std::string path(const std::string& name) const { return dir.file(name); }
};

}  // namespace

TEST_CASE("help lists subcommands and defaults") {
  TempDir dir;
  auto r = run(dir, "--help");
  CHECK(r.code == 0);
  for (const char* sub : {"ingest", "train-genres", "train", "index", "recommend", "evaluate", "ablate"})
    CHECK(r.out.find(sub) != std::string::npos);
  auto t = run(dir, "train --help");
  CHECK(t.code == 0);
  CHECK(t.out.find("2e-05") != std::string::npos);
  CHECK(t.out.find("--margin") != std::string::npos);
  CHECK(run(dir, "").code == 2);
  CHECK(run(dir, "bogus").code == 2);
}

TEST_CASE("ingest prints a summary and writes the cleaned catalog") {
  TempDir dir;
  fusionrec::write_file(dir.file("c.jsonl"),
      R"({"id":"m1","title":"Alien","description":"Crew vs xenomorph","genres":["sci-fi","horror"],"domain":"source"})" "\n"
      R"({"id":"m1","title":"Alien","description":"dup","genres":["sci-fi"],"domain":"source"})" "\n"
      R"({"id":"m2","title":"Blank","description":" ","genres":["drama"],"domain":"source"})" "\n");
  auto r = run(dir, "ingest --input " + dir.file("c.jsonl") + " --out " + dir.file("clean.jsonl"));
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["items_in"] == 3);
  CHECK(j["items_out"] == 1);
  CHECK(j["dropped_missing"] == 1);
  CHECK(j["dropped_duplicate"] == 1);
  CHECK(fusionrec::file_exists(dir.file("clean.jsonl")));

  fusionrec::write_file(dir.file("c.csv"), "id,title,description,genres,domain\nb1,Emma,A match,Romance|Classic,target\n");
  auto c = run(dir, "ingest --format csv --input " + dir.file("c.csv"));
  REQUIRE(c.code == 0);
  CHECK(json::parse(c.out)["target_items"] == 1);

  auto missing = run(dir, "ingest --input " + dir.file("nope.jsonl"));
  CHECK(missing.code == 2);
  CHECK(missing.err.find("nope.jsonl") != std::string::npos);
}

TEST_CASE("train rejects zero epochs as a usage error") {
  TempDir dir;
  auto r = run(dir, "train --catalog x --genre-model y --out z --epochs 0");
  CHECK(r.code == 2);
}

TEST_CASE("recommend, evaluate and ablate over a small pipeline") {
  Pipeline p;
  auto r = run(p.dir, "recommend " + p.artifacts + " --seeds m0 --k 5");
  REQUIRE(r.code == 0);
  auto rows = json::parse(r.out);
  REQUIRE(rows.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(rows[i]["rank"] == i + 1);
    for (const char* key : {"target_id", "title", "combined", "fusion_sim", "genre_sim", "tfidf_sim"})
      CHECK(rows[i].contains(key));
  }
  CHECK(r.err.find("seed=7") != std::string::npos);

  auto again = run(p.dir, "recommend " + p.artifacts + " --seeds m0 --k 5");
  CHECK(again.out == r.out);

  auto text_only = run(p.dir, "recommend " + p.artifacts + " --seeds m0,m1 --k 3 --weights 1,0,0");
  REQUIRE(text_only.code == 0);
  for (const auto& row : json::parse(text_only.out)) CHECK(row["combined"] == row["fusion_sim"]);

  auto table = run(p.dir, "recommend " + p.artifacts + " --seeds m0 --k 2 --format table");
  CHECK(table.code == 0);
  CHECK(table.out.find("rank") == 0);

  auto unknown = run(p.dir, "recommend " + p.artifacts + " --seeds zz9");
  CHECK(unknown.code == 4);
  CHECK(unknown.err.find("zz9") != std::string::npos);
  CHECK(run(p.dir, "recommend " + p.artifacts + " --seeds m0 --weights 1,1,1").code == 2);

  auto ablate = run(p.dir, "ablate " + p.artifacts + " --ratings " + p.path("data/ratings.jsonl") +
                               " --out-dir " + p.path("reports"));
  REQUIRE(ablate.code == 0);
  for (const char* mode : {"fused", "text_only", "genre_only", "tfidf_only"}) {
    const auto report = json::parse(fusionrec::read_file(p.path(std::string("reports/report_") + mode + ".json")));
    CHECK(report["mode"] == mode);
    CHECK(report["thresholds"] == json::array({20, 50, 80}));
  }
  const auto first = fusionrec::read_file(p.path("reports/report_fused.json"));
  REQUIRE(run(p.dir, "ablate " + p.artifacts + " --ratings " + p.path("data/ratings.jsonl") +
                         " --out-dir " + p.path("reports")).code == 0);
  CHECK(fusionrec::read_file(p.path("reports/report_fused.json")) == first);

  auto eval = run(p.dir, "evaluate " + p.artifacts + " --ratings " + p.path("data/ratings.jsonl") +
                             " --mode genre_only");
  REQUIRE(eval.code == 0);
  CHECK(json::parse(eval.out)["mode"] == "genre_only");

  fusionrec::write_file(p.path("empty_ratings.jsonl"), "");
  CHECK(run(p.dir, "evaluate " + p.artifacts + " --ratings " + p.path("empty_ratings.jsonl")).code == 5);
}

TEST_CASE("training prints identical checkpoint hashes for the same seed") {
  TempDir dir;
  const auto d = dir.path().string();
  REQUIRE(run(dir, "synth --out-dir " + d + "/data --source-items 40 --target-items 40 --users 12").code == 0);
  REQUIRE(run(dir, "train-genres --catalog " + d + "/data/catalog.jsonl --out " + d + "/g.bin --buckets 2048").code == 0);
  const auto cmd = "train --seed 7 --catalog " + d + "/data/catalog.jsonl --genre-model " + d +
                   "/g.bin --max-positives 32 --out ";
  auto a = run(dir, cmd + d + "/a.bin");
  auto b = run(dir, cmd + d + "/b.bin");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(json::parse(a.out)["checkpoint_fingerprint"] == json::parse(b.out)["checkpoint_fingerprint"]);
  CHECK(json::parse(a.out)["config"]["base_lr"] == 2e-5);
}

TEST_CASE("config files fill in unset flags and flags win") {
  TempDir dir;
  const auto d = dir.path().string();
  REQUIRE(run(dir, "synth --out-dir " + d + "/data --source-items 40 --target-items 40 --users 12").code == 0);
  REQUIRE(run(dir, "train-genres --catalog " + d + "/data/catalog.jsonl --out " + d + "/g.bin --buckets 2048").code == 0);
  fusionrec::write_file(dir.file("run.conf"), "# training\ntrainer.epochs = 1\ntrainer.margin=0.25\nmax_positives=16\n");
  auto r = run(dir, "train --config " + dir.file("run.conf") + " --margin 0.4 --catalog " + d +
                        "/data/catalog.jsonl --genre-model " + d + "/g.bin --out " + d + "/m.bin");
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["config"]["epochs"] == 1);
  CHECK(j["config"]["margin"] == 0.4);
  CHECK(j["positive_count"] == 16);

  fusionrec::write_file(dir.file("run.json"), R"({"trainer": {"epochs": 0}})");
  CHECK(run(dir, "train --config " + dir.file("run.json") + " --catalog " + d +
                     "/data/catalog.jsonl --genre-model " + d + "/g.bin --out " + d + "/m.bin").code == 2);
}
