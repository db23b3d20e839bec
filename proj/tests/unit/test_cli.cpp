#include "doctest.h"
#include "fixtures.hpp"

#include "toscca/cli/commands.hpp"
#include "toscca/cli/run_config.hpp"
#include "toscca/cli/table.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace toscca;
using namespace toscca::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("toscca_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("header and row ids are detected") {
  const auto m = parse_matrix("id,a,b\ns1,1,2\ns2,3,4.5\n", {}, "t");
  CHECK(m.row_ids == std::vector<std::string>{"s1", "s2"});
  CHECK(m.column_names == std::vector<std::string>{"a", "b"});
  CHECK(m.values(1, 1) == 4.5);

  const auto bare = parse_matrix("1,2\n3,4\n5,6\n", {}, "t");
  CHECK(bare.rows() == 3);
  CHECK(bare.cols() == 2);
  CHECK(bare.row_ids.empty());
  CHECK(bare.column_names.empty());

  const auto short_header = parse_matrix("a\tb\nr1\t1\t2\nr2\t3\t4\n", {}, "t");
  CHECK(short_header.column_names == std::vector<std::string>{"a", "b"});
  CHECK(short_header.row_ids == std::vector<std::string>{"r1", "r2"});

  const auto quoted = parse_matrix("\"\",\"x, y\",z\n\"r 1\",1e-3,-2\nr2,+3,4\n", {}, "t");
  CHECK(quoted.column_names[0] == "x, y");
  CHECK(quoted.row_ids[0] == "r 1");
  CHECK(quoted.values(0, 0) == 1e-3);
  CHECK(quoted.values(1, 0) == 3.0);
}

TEST_CASE("detection can be overridden") {
  ReadOptions opts;
  opts.header = Detect::no;
  opts.row_ids = Detect::no;
  const auto m = parse_matrix("1,2\n3,4\n", opts, "t");
  CHECK(m.rows() == 2);
  opts.row_ids = Detect::yes;
  const auto ids = parse_matrix("7,2,5\n8,4,6\n", opts, "t");
  CHECK(ids.row_ids == std::vector<std::string>{"7", "8"});
  CHECK(ids.cols() == 2);
  ReadOptions semi;
  semi.delimiter = ';';
  CHECK(parse_matrix("1;2\n3;4\n", semi, "t").cols() == 2);
}

TEST_CASE("transposed files swap rows and columns") {
  ReadOptions opts;
  opts.transpose = true;
  const auto m = parse_matrix("gene,s1,s2,s3\ng1,1,2,3\ng2,4,5,6\n", opts, "t");
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m.row_ids == std::vector<std::string>{"s1", "s2", "s3"});
  CHECK(m.column_names == std::vector<std::string>{"g1", "g2"});
  CHECK(m.values(2, 1) == 6.0);
}

TEST_CASE("parse errors carry their location") {
  try {
    parse_matrix("a,b\n1,2\n3,oops\n", {}, "file.csv");
    FAIL("expected an error");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("file.csv") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("field 2") != std::string::npos);
    CHECK(msg.find("oops") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_matrix("1,2\n3\n", {}, "t"), InputError);
  CHECK_THROWS_AS(parse_matrix("", {}, "t"), InputError);
  CHECK_THROWS_AS(parse_matrix("1,nan\n2,3\n", {}, "t"), InputError);
}

TEST_CASE("numbers round-trip bit for bit") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<double>(i % 40 - 20));
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-2.0) == "-2");

  RawMatrix m;
  m.values = fixtures::gaussian(7, 5, 9) * 1e-3;
  m.values(0, 0) = 1e300;
  m.values(1, 1) = -5e-310;
  m.row_ids = {"a", "b", "c", "d", "e", "f", "g"};
  m.column_names = {"c1", "c,2", "c3", "c4", "c5"};
  for (char delim : {',', '\t'}) {
    const auto back = parse_matrix(format_matrix(m, delim), {}, "t");
    CHECK(back.values == m.values);
    CHECK(back.row_ids == m.row_ids);
    CHECK(back.column_names == m.column_names);
  }
}

TEST_CASE("table rows must be complete") {
  Table t({"a", "b"});
  t.cell(1).cell("x");
  t.end_row();
  CHECK(t.text() == "a,b\n1,x\n");
  t.cell(2);
  CHECK_THROWS_AS(t.end_row(), Error);
}

TEST_CASE("sparsity planning") {
  KeyValueFile kv;
  kv.set("x1", "a");
  kv.set("x2", "b");
  auto cfg = RunConfig::resolve(kv, Command::analyze);
  auto plan = plan_sparsity(cfg, 500, 50);
  CHECK(plan.mode == SparsityPlan::Mode::single);
  CHECK(plan.pairs[0] == SparsityPair{100, 50});

  kv.set("nnz-x1", "10,20,30");
  kv.set("nnz-x2", "5");
  cfg = RunConfig::resolve(kv, Command::analyze);
  plan = plan_sparsity(cfg, 500, 50);
  CHECK(plan.mode == SparsityPlan::Mode::grid);
  CHECK(plan.pairs.size() == 3);

  kv.set("k", "3");
  cfg = RunConfig::resolve(kv, Command::analyze);
  plan = plan_sparsity(cfg, 500, 50);
  CHECK(plan.mode == SparsityPlan::Mode::per_component);
  CHECK(plan.pairs[2] == SparsityPair{30, 5});

  kv.set("nnz-mode", "grid");
  kv.set("nnz-x2", "5,6");
  cfg = RunConfig::resolve(kv, Command::analyze);
  CHECK(plan_sparsity(cfg, 500, 50).pairs.size() == 6);

  kv.set("nnz-x2", "60");
  cfg = RunConfig::resolve(kv, Command::analyze);
  CHECK_THROWS_AS(plan_sparsity(cfg, 500, 50), UsageError);
}

TEST_CASE("config resolution") {
  KeyValueFile kv;
  kv.set("x1", "a");
  kv.set("x2", "b");
  kv.set("seed", "17");
  const auto cfg = RunConfig::resolve(kv, Command::analyze);
  CHECK(cfg.solver.seed == 17);
  CHECK(cfg.permutation().seed != cfg.split().seed);
  const auto again = RunConfig::resolve(cfg.to_keyvalue(), Command::analyze);
  CHECK(again.to_keyvalue().format() == cfg.to_keyvalue().format());

  auto unknown = kv;
  unknown.set("colour", "red");
  CHECK_THROWS_AS(RunConfig::resolve(unknown, Command::analyze), UsageError);
  auto bad = kv;
  bad.set("B", "5");
  CHECK_THROWS_AS(RunConfig::resolve(bad, Command::permtest), UsageError);
  bad = kv;
  bad.set("init", "random");
  CHECK_THROWS_AS(RunConfig::resolve(bad, Command::analyze), UsageError);
  KeyValueFile missing;
  CHECK_THROWS_AS(RunConfig::resolve(missing, Command::analyze), UsageError);
  CHECK_NOTHROW(RunConfig::resolve(missing, Command::simulate));
}

TEST_CASE("row count mismatch is an input error naming both counts") {
  const auto dir = scratch("mismatch");
  write(dir / "a.csv", "1,2\n3,4\n5,7\n");
  write(dir / "b.csv", "1,2\n3,5\n");
  const auto r = invoke({"analyze", "--x1", (dir / "a.csv").string(), "--x2",
                         (dir / "b.csv").string(), "--out-dir", (dir / "out").string()});
  CHECK(r.code == input_error);
  CHECK(r.err.find("3 rows") != std::string::npos);
  CHECK(r.err.find("2 rows") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(invoke({}).code == usage_error);
  CHECK(invoke({"analyze", "--nonsense"}).code == usage_error);
  CHECK(invoke({"analyze", "--x1", "a"}).code == usage_error);
  CHECK(invoke({"frobnicate"}).code == usage_error);
  CHECK(invoke({"analyze", "--help"}).code == ok);
  const auto missing = invoke({"analyze", "--x1", "/nonexistent/a.csv", "--x2", "/nonexistent/b.csv"});
  CHECK(missing.code == input_error);
}

TEST_CASE("identical blocks give unit correlation") {
  const auto dir = scratch("identical");
  write(dir / "a.csv", "id,u,v\nr1,1,2\nr2,3,1\nr3,0,5\nr4,2,2\nr5,4,0\n");
  const auto r = invoke({"analyze", "--x1", (dir / "a.csv").string(), "--x2",
                         (dir / "a.csv").string(), "--nnz-x1", "2", "--nnz-x2", "2",
                         "--repeats", "0", "--tol", "1e-14", "--out-dir", (dir / "out").string()});
  REQUIRE(r.code == ok);
  const auto summary = slurp(dir / "out" / "summary.json");
  CHECK(summary.find("\"rho_in\": 1") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "weights_x1.csv"));
  CHECK(fs::exists(dir / "out" / "scores.csv"));
  CHECK(fs::exists(dir / "out" / "plot_cpev.csv"));
}

TEST_CASE("flags override the config file and the row-id join aligns rows") {
  const auto dir = scratch("join");
  write(dir / "a.csv", "id,u,v,w\nr1,1,2,0\nr2,3,1,1\nr3,0,5,2\nr4,2,2,7\nr5,4,0,1\nr6,1,1,3\n");
  write(dir / "b.csv", "id,p,q\nr6,1,0\nr2,5,1\nr1,0,3\nr4,2,2\nr3,1,1\nr9,4,4\n");
  write(dir / "run.txt", "k=1\nnnz-x1=2\nnnz-x2=1\nrepeats=0\nseed=4\n");
  const auto r = invoke({"analyze", "--config", (dir / "run.txt").string(), "--x1",
                         (dir / "a.csv").string(), "--x2", (dir / "b.csv").string(), "--nnz-x2",
                         "2", "--out-dir", (dir / "out").string()});
  REQUIRE(r.code == ok);
  CHECK(r.err.find("joined on row ids") != std::string::npos);
  const auto cfg = slurp(dir / "out" / "run_config.txt");
  CHECK(cfg.find("nnz-x2=2") != std::string::npos);
  CHECK(cfg.find("seed=4") != std::string::npos);
  const auto scores = slurp(dir / "out" / "scores.csv");
  CHECK(scores.find("r5") == std::string::npos);
  CHECK(scores.find("r9") == std::string::npos);
}

TEST_CASE("simulate is byte-for-byte reproducible") {
  const auto dir = scratch("simulate");
  write(dir / "design.txt",
        "n=40\np=30\nq=20\nnoise_sd=1\ncomponents=1\ncomponent.1.support_x1=1-5\n"
        "component.1.support_x2=3-6\ncomponent.1.pattern=constant\ncomponent.1.strength=6\n");
  std::vector<std::string> base{"simulate", "--design", (dir / "design.txt").string(),
                                "--k", "2", "--nnz-x1", "5", "--nnz-x2", "4", "--seed", "5",
                                "--repeats", "3", "--permtest", "--B", "19"};
  auto a = base;
  a.insert(a.end(), {"--out-dir", (dir / "a").string()});
  auto b = base;
  b.insert(b.end(), {"--out-dir", (dir / "b").string(), "--threads", "1"});
  REQUIRE(invoke(a).code == ok);
  REQUIRE(invoke(b).code == ok);
  size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    ++files;
    CHECK_MESSAGE(slurp(entry.path()) == slurp(dir / "b" / entry.path().filename()),
                  entry.path().filename().string());
  }
  CHECK(files >= 18);
  const auto recovery = slurp(dir / "a" / "recovery.csv");
  CHECK(recovery.find("1,1,true") != std::string::npos);
}
