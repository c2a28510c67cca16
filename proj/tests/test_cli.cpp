#include <doctest.h>

#include "cli.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;
using mcmetrics::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mcmetrics_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("help and parse errors") {
  const auto help = call({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("sweep") != std::string::npos);
  CHECK(call({}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({"sweep", "--labels", "x.mgl"}).code == 2);
}

TEST_CASE("synth, sweep, score, metric, report") {
  TempDir dir;
  const auto prefix = dir / "mix";
  const auto s = call({"synth", "--classes", "5", "--per-class", "40", "--dim", "6", "--separation", "15",
                       "--seed", "3", "--out-prefix", prefix});
  REQUIRE(s.code == 0);
  CHECK(fs::exists(prefix + ".features.mgm"));
  CHECK(fs::exists(prefix + ".labels.mgl"));
  CHECK(fs::exists(prefix + ".probs.mgm"));

  const std::vector<std::string> ref{"--features", prefix + ".features.mgm", "--labels", prefix + ".labels.mgl",
                                     "--probs", prefix + ".probs.mgm", "--embeddings", prefix + ".features.mgm"};
  auto sweep_args = std::vector<std::string>{"sweep"};
  sweep_args.insert(sweep_args.end(), ref.begin(), ref.end());
  for (const char* a : {"--metrics", "ndb,js,is,mode,fid", "--k", "10", "--seed", "1", "--out"})
    sweep_args.emplace_back(a);
  sweep_args.push_back(dir / "sweep.json");
  const auto sw = call(sweep_args);
  INFO(sw.err);
  REQUIRE(sw.code == 0);

  const auto j = nlohmann::json::parse(slurp(dir / "sweep.json"));
  CHECK(j.at("subsets").size() == 5);
  CHECK(j.at("config").at("k") == 10);
  CHECK(j.at("metrics").at("is").at("raw") == nlohmann::json::array({1.0, 2.0, 3.0, 4.0, 5.0}));
  const auto csv = slurp(dir / "sweep.csv");
  CHECK(csv.rfind("metric,subset,classes_left,classes_removed,raw,scaled,orientation\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 5 * 5);

  SUBCASE("score the reference against the sweep") {
    const auto sc = call({"score", "--samples-features", prefix + ".features.mgm", "--samples-probs",
                          prefix + ".probs.mgm", "--samples-embeddings", prefix + ".features.mgm",
                          "--ref-features", prefix + ".features.mgm", "--ref-labels", prefix + ".labels.mgl",
                          "--ref-probs", prefix + ".probs.mgm", "--ref-embeddings", prefix + ".features.mgm",
                          "--against-sweep", dir / "sweep.json"});
    INFO(sc.err);
    REQUIRE(sc.code == 0);
    const auto out = nlohmann::json::parse(sc.out);
    CHECK(out.at("metrics").at("ndb").at("raw") == 0);
    CHECK(out.at("metrics").at("js").at("scaled") == 0);
    CHECK(out.at("metrics").at("is").at("scaled") == 0);
  }
  SUBCASE("single metric without a sweep") {
    const auto m = call({"metric", "js", "--samples-features", prefix + ".features.mgm", "--ref-features",
                         prefix + ".features.mgm", "--ref-labels", prefix + ".labels.mgl", "--k", "10"});
    INFO(m.err);
    REQUIRE(m.code == 0);
    const auto out = nlohmann::json::parse(m.out);
    CHECK(out.at("metrics").size() == 1);
    CHECK(out.at("metrics").at("js").at("scaled").is_null());
  }
  SUBCASE("score needs --metrics without a sweep") {
    CHECK(call({"score", "--samples-features", prefix + ".features.mgm", "--ref-features",
                prefix + ".features.mgm", "--ref-labels", prefix + ".labels.mgl"})
              .code == 2);
  }
  SUBCASE("report re-emits canonical JSON and CSV") {
    const auto rj = call({"report", "--in", dir / "sweep.json", "--format", "json"});
    REQUIRE(rj.code == 0);
    CHECK(rj.out == slurp(dir / "sweep.json"));
    const auto rc = call({"report", "--in", dir / "sweep.json", "--format", "csv"});
    REQUIRE(rc.code == 0);
    CHECK(rc.out == csv);
  }
  SUBCASE("fid without embeddings is an input error") {
    const auto r = call({"sweep", "--features", prefix + ".features.mgm", "--labels", prefix + ".labels.mgl",
                         "--metrics", "fid", "--out", dir / "nope.json"});
    CHECK(r.code == 2);
    CHECK(r.err.find("embeddings") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "nope.json"));
  }
}

TEST_CASE("input errors exit with 2") {
  TempDir dir;
  {
    std::ofstream bad(dir / "bad.mgm", std::ios::binary);
    bad << "NOPE and some more bytes to pass the header size";
  }
  const auto r = call({"sweep", "--features", dir / "bad.mgm", "--labels", dir / "bad.mgl", "--metrics", "ndb"});
  CHECK(r.code == 2);
  CHECK(call({"sweep", "--features", dir / "missing.mgm", "--labels", dir / "missing.mgl", "--metrics", "ndb"})
            .code == 2);
  CHECK(call({"report", "--in", dir / "bad.mgm", "--format", "csv"}).code == 2);
}

TEST_CASE("numerical failures exit with 3") {
  TempDir dir;
  // Finite inputs whose covariance overflows.
  {
    std::ofstream f(dir / "huge.csv");
    for (int r = 0; r < 8; ++r) f << (r % 2 ? "1e200" : "-1e200") << ',' << r << '\n';
  }
  REQUIRE(call({"synth", "--classes", "2", "--per-class", "4", "--dim", "2", "--out-prefix", dir / "lab"}).code == 0);
  const auto r = call({"metric", "fid", "--samples-features", dir / "huge.csv", "--samples-embeddings",
                       dir / "huge.csv", "--ref-features", dir / "huge.csv", "--ref-labels", dir / "lab.labels.mgl",
                       "--ref-embeddings", dir / "huge.csv"});
  INFO(r.err);
  CHECK(r.code == 3);
}
