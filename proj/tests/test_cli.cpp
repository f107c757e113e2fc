#include <doctest.h>

#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using jonesq::cli::RunConfig;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("jonesq_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json summary(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "summary.json")); }

fs::path write_spec(const fs::path& dir, const nlohmann::json& spec) {
  const auto p = dir / "spec.json";
  std::ofstream(p) << spec.dump();
  return p;
}

}  // namespace

TEST_CASE("jones on a segment gives zero profiles and a plateau") {
  const auto dir = scratch("jones");
  RunConfig cfg;
  cfg.command = "jones";
  cfg.spec = write_spec(dir, {{"kind", "segment"}, {"atoms", 256}}).string();
  cfg.out = (dir / "out").string();
  cfg.points = 5;
  std::ostringstream err;
  REQUIRE(jonesq::cli::run(cfg, err) == 0);
  const auto s = summary(dir / "out");
  CHECK(s.at("results").at("plateau").get<bool>());
  CHECK(s.at("config").at("command") == "jones");
  std::istringstream csv(slurp(dir / "out" / "profiles.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "point,x1,x2,r,value,partial_sum,flags");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    // value and partial_sum columns are exactly zero
    CHECK(line.find(",0,0,") != std::string::npos);
  }
  CHECK(rows == 5 * 9);
}

TEST_CASE("reports are byte-identical across runs and worker counts") {
  const auto dir = scratch("determinism");
  RunConfig cfg;
  cfg.spec = write_spec(dir, {{"kind", "lipschitz_graph"}, {"atoms", 300}, {"random_positions", true}}).string();
  cfg.points = 4;
  cfg.seed = 11;
  std::ostringstream err;
  for (const std::string command : {"jones", "beta", "classify"}) {
    cfg.command = command;
    std::vector<std::string> texts;
    for (unsigned workers : {1u, 1u, 3u}) {
      cfg.workers = workers;
      cfg.out = (dir / (command + std::to_string(texts.size()))).string();
      REQUIRE(jonesq::cli::run(cfg, err) == 0);
      std::string all;
      for (const auto& e : fs::directory_iterator(cfg.out)) all += e.path().filename().string() + slurp(e.path());
      texts.push_back(all);
    }
    CAPTURE(command);
    CHECK(texts[0] == texts[1]);
    CHECK(texts[0] == texts[2]);
  }
}

TEST_CASE("classify reports LD cubes in an empty gap") {
  const auto dir = scratch("gap");
  {
    std::ofstream csv(dir / "gap.csv");
    csv << "x1,x2,w\n";
    for (int i = 0; i < 100; ++i) csv << 0.002 * i << ",0,0.005\n" << 0.8 + 0.002 * i << ",0,0.005\n";
  }
  RunConfig cfg;
  cfg.command = "classify";
  cfg.input = (dir / "gap.csv").string();
  cfg.out = (dir / "out").string();
  cfg.r0 = 0.9;  // first eligible cubes are small enough to sit inside the gap
  cfg.depth = 4;
  cfg.M = 1e6;
  cfg.N = 1e5;
  std::ostringstream err;
  REQUIRE(jonesq::cli::run(cfg, err) == 0);
  const auto tree = nlohmann::json::parse(slurp(dir / "out" / "tree.json"));
  CHECK(tree.at("label_counts").at("LD").get<int>() > 0);
  bool zero_mass_ld = false;
  for (const auto& c : tree.at("cubes"))
    if (c.at("label") == "LD" && c.at("mass_3q").get<double>() == 0.0) zero_mass_ld = true;
  CHECK(zero_mass_ld);
}

TEST_CASE("verify passes on the bundled corpus") {
  const auto dir = scratch("verify");
  RunConfig cfg;
  cfg.command = "verify";
  cfg.out = dir.string();
  std::ostringstream err;
  CHECK(jonesq::cli::run(cfg, err) == 0);
  CHECK(summary(dir).at("results").at("all_pass").get<bool>());
}

TEST_CASE("malformed input gives a nonzero exit and a diagnostic") {
  const auto dir = scratch("bad");
  std::ofstream(dir / "bad.csv") << "x1,x2,w\n1,2\n";
  std::ofstream(dir / "bad.json") << "{\"kind\": \"spiral\"}";
  RunConfig cfg;
  cfg.command = "beta";
  cfg.out = (dir / "out").string();
  auto status = [&](RunConfig c) {
    std::ostringstream err;
    const int code = jonesq::cli::run(c, err);
    CHECK(!err.str().empty());
    return code;
  };
  RunConfig a = cfg;
  a.input = (dir / "bad.csv").string();
  CHECK(status(a) != 0);
  RunConfig b = cfg;
  b.spec = (dir / "bad.json").string();
  CHECK(status(b) != 0);
  RunConfig c = cfg;
  c.input = (dir / "missing.csv").string();
  CHECK(status(c) != 0);
  RunConfig d = cfg;
  d.spec = (dir / "bad.json").string();
  d.input = (dir / "bad.csv").string();
  CHECK(status(d) != 0);
  RunConfig e = a;
  e.input.clear();
  e.spec = write_spec(dir, {{"kind", "segment"}}).string();
  e.M = 10.0;
  e.N = 100.0;
  CHECK(status(e) != 0);
  e.M = 1e4;
  e.ratio = 1.5;
  CHECK(status(e) != 0);
  e.ratio = 0.5;
  e.command = "whitney";
  e.spec = write_spec(dir, {{"kind", "circle"}}).string();
  CHECK(status(e) != 0);  // no underlying graph
}
