#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "satedge/orchestrator.hpp"

using namespace satedge;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("orchestrator") {
  TEST_CASE("method names") {
    for (Method m : all_methods()) CHECK(parse_method(to_string(m)) == m);
    CHECK(to_string(Method::AdmmHybrid) == "admm-hybrid");
    CHECK(to_string(Method::EqualBandwidth) == "equal-bandwidth");
    CHECK_FALSE(parse_method("admm").has_value());
    CHECK(parse_axis("task-bits") == SweepAxis::TaskBits);
    CHECK_FALSE(parse_axis("bits").has_value());
  }

  TEST_CASE("settings hash") {
    AdmmSettings a;
    const std::string h = settings_hash(a);
    CHECK(h.size() == 16);
    CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
    AdmmSettings b = a;
    b.threads = 7;
    CHECK(settings_hash(b) == h);
    b.rho = 2e-5;
    CHECK(settings_hash(b) != h);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  }

  TEST_CASE("csv layout") {
    TempDir dir("satedge_unit_csv");
    CsvMeta meta = CsvMeta::make("test", AdmmSettings{}, 3);
    meta.add("extra", "1");
    write_csv(dir.path / "a.csv", meta, {"x", "y"}, {{"1", "2"}, {"3", "4"}});
    const auto lines = read_lines(dir.path / "a.csv");
    REQUIRE(lines.size() == 8);
    CHECK(lines[0].rfind("# satedge: ", 0) == 0);
    CHECK(lines[1] == "# kind: test");
    CHECK(lines[2] == "# settings_hash: " + settings_hash(AdmmSettings{}));
    CHECK(lines[3] == "# seed: 3");
    CHECK(lines[4] == "# extra: 1");
    CHECK(lines[5] == "x,y");
    CHECK(lines[7] == "3,4");
    CHECK_THROWS(write_csv(dir.path / "b.csv", meta, {"x", "y"}, {{"1"}}));

    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(std::nan("")) == "nan");
  }

  TEST_CASE("results are byte-reproducible") {
    TempDir dir("satedge_unit_repro");
    const Scenario s = generate_scenario(0);
    AdmmSettings st;
    for (Method m : {Method::Exhaustive, Method::AdmmExhaustive, Method::EqualBandwidth}) {
      CAPTURE(to_string(m));
      Outcome<Solution> a = solve(s, m, st, 0), b = solve(s, m, st, 0);
      REQUIRE(a.ok());
      REQUIRE(b.ok());
      CHECK(result_document(s, *a, st, 0) == result_document(s, *b, st, 0));
      const CsvMeta meta = CsvMeta::make("iterates", st, 0);
      write_iterate_csv(dir.path / "a.csv", a->log, meta);
      write_iterate_csv(dir.path / "b.csv", b->log, meta);
      CHECK(slurp(dir.path / "a.csv") == slurp(dir.path / "b.csv"));
    }
    Outcome<Solution> ex = solve(s, Method::Exhaustive, st, 0);
    const std::string doc = result_document(s, *ex, st, 0);
    CHECK(doc.find("\"status\": \"ok\"") != std::string::npos);
    CHECK(doc.find("timing") == std::string::npos);
    const std::string bad = infeasible_document(s, Method::Exhaustive, {"latency", 0.5, "UE 0"}, st, 0);
    CHECK(bad.find("infeasible") != std::string::npos);
  }

  TEST_CASE("training with zero episodes writes a header-only curve") {
    TempDir dir("satedge_unit_curve");
    const Scenario s = generate_scenario(0);
    const TrainingRun run = train_agent(s, AgentKind::Classical, 0, AdmmSettings{}, 0);
    CHECK(run.result.curve.empty());
    CHECK(run.best_possible < 0.0);
    write_curve_csv(dir.path / "c.csv", run.result.curve, CsvMeta::make("curve", AdmmSettings{}, 0));
    const auto lines = read_lines(dir.path / "c.csv");
    REQUIRE_FALSE(lines.empty());
    CHECK(lines.back() == "episode,epsilon,greedy_reward,loss");
    CHECK_THROWS_AS(train_agent(s, AgentKind::Classical, -1, AdmmSettings{}, 0), ConfigError);
  }

  TEST_CASE("sweep") {
    const Scenario s = generate_scenario(0);
    AdmmSettings st;
    CHECK_THROWS_AS(sweep(s, SweepAxis::TaskBits, {}, {Method::Exhaustive}, st, 0, 1), ConfigError);
    CHECK_THROWS_AS(sweep(s, SweepAxis::TaskBits, {3e5}, {}, st, 0, 1), ConfigError);
    CHECK_THROWS_AS(with_axis(s, SweepAxis::BAccessTotal, -1.0), ConfigError);

    const auto rows = sweep(s, SweepAxis::TaskBits, {4e5, 3e5}, {Method::Exhaustive, Method::EqualBandwidth}, st, 0, 2);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].value == 4e5);
    CHECK(rows[0].method == Method::Exhaustive);
    CHECK(rows[1].method == Method::EqualBandwidth);
    CHECK(rows[3].value == 3e5);
    for (const auto& r : rows) CHECK(r.status == "ok");
    CHECK(rows[0].energy <= rows[1].energy);
    const auto again = sweep(s, SweepAxis::TaskBits, {4e5, 3e5}, {Method::Exhaustive, Method::EqualBandwidth}, st, 0, 1);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(again[i].energy == rows[i].energy);

    TempDir dir("satedge_unit_sweep");
    write_sweep_csv(dir.path / "s.csv", SweepAxis::TaskBits, rows, CsvMeta::make("sweep", st, 0));
    const auto lines = read_lines(dir.path / "s.csv");
    CHECK(lines.size() == 5 + 1 + 4);
    CHECK(lines[4] == "# axis: task-bits");
    CHECK(lines[5] == "value,method,status,energy_j,assignment");
  }

  TEST_CASE("duality gap needs an ADMM method") {
    const Scenario s = generate_scenario(0);
    CHECK_THROWS_AS(duality_gap_run(s, Method::Exhaustive, AdmmSettings{}, 0), ConfigError);
    Outcome<GapReport> g = duality_gap_run(s, Method::AdmmExhaustive, AdmmSettings{}, 0);
    REQUIRE(g.ok());
    CHECK(g->rows.size() == g->solution.log.size());
    CHECK(g->final_relative == doctest::Approx((g->final_primal - g->final_dual) / g->final_primal));
  }

  TEST_CASE("file names") {
    CHECK(files::result(Method::AdmmHybrid) == "result_admm-hybrid.json");
    CHECK(files::iterates(Method::Exhaustive) == "iterates_exhaustive.csv");
    CHECK(files::curve(AgentKind::Hybrid, 50e6, 100e6) == "curve_hybrid_ba50_bs100.csv");
    CHECK(files::checkpoint(AgentKind::Classical, 60e6, 110e6) == "agent_classical_ba60_bs110.ckpt");
    CHECK(files::sweep(SweepAxis::BSTotal) == "sweep_b-s-total.csv");
    CHECK(files::timing("result_exhaustive.json") == "result_exhaustive.json.timing.json");
  }
}
