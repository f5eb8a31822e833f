#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "mahlerlab/cli.hpp"
#include "mahlerlab/mahler.hpp"

using namespace mahlerlab::cli;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mahlerlab");
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

json cli_json(std::vector<std::string> args, int expected_code = 0) {
  args.insert(args.end(), {"--format", "json"});
  const Result r = cli(args);
  REQUIRE(r.code == expected_code);
  return json::parse(r.out);
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) v.push_back(line);
  return v;
}

}  // namespace

TEST_CASE("scalar expressions") {
  CHECK(parse_scalar("4*sqrt(2)") == doctest::Approx(4 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(parse_scalar("2*(1+sqrt(5))") == doctest::Approx(mahlerlab::mahler::kRegimeBoundary));
  CHECK(parse_scalar(" 12 ") == 12);
  CHECK_THROWS_AS(parse_scalar("x+1"), UsageError);
  CHECK_THROWS_AS(parse_scalar("4 sqrt(2)"), UsageError);
  CHECK_THROWS_AS(parse_scalar("log(0)"), UsageError);
}

TEST_CASE("grids") {
  const auto lin = parse_grid("5:50:10");
  REQUIRE(lin.size() == 10);
  CHECK(lin.front() == 5);
  CHECK(lin.back() == 50);
  CHECK(lin[1] == doctest::Approx(10));

  const auto lg = parse_grid("4.5:100:20:log");
  REQUIRE(lg.size() == 20);
  CHECK(lg.front() == 4.5);
  CHECK(lg.back() == 100);
  for (std::size_t i = 1; i + 1 < lg.size(); ++i) {
    CHECK(lg[i] / lg[i - 1] == doctest::Approx(lg[i + 1] / lg[i]).epsilon(1e-12));
  }
  CHECK(parse_grid("7:7:1") == std::vector<double>{7});
  CHECK(parse_grid("4*sqrt(2):8:2") == std::vector<double>{4 * std::sqrt(2.0), 8});

  for (const char* bad : {"1:2", "1:2:0", "1:2:x", "2:1:3", "1:2:3:cubic", "0:1:3:log", "1:2:3.5"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_grid(bad), UsageError);
  }
}

TEST_CASE("worker pool keeps input order") {
  for (int jobs : {1, 3, 8}) {
    const auto v = parallel_map<int>(50, jobs, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == static_cast<int>(i * i));
  }
  try {
    parallel_map<int>(20, 4, [](std::size_t i) -> int {
      if (i == 7 || i == 13) throw std::runtime_error(std::to_string(i));
      return 0;
    });
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "7");
  }
  CHECK(parallel_map<int>(0, 4, [](std::size_t) { return 1; }).empty());
}

TEST_CASE("verify ei over a grid") {
  const json j = cli_json({"verify", "ei", "--k-grid", "4.5:100:20"});
  CHECK(j["schema"] == 1);
  CHECK(j["command"] == "verify");
  CHECK(j["suite"] == "ei");
  CHECK(j["pass"] == true);
  REQUIRE(j["rows"].size() == 20);
  for (const auto& row : j["rows"]) {
    CHECK(row["status"] == "PASS");
    CHECK(row["tol"] == 1e-11);
    CHECK(row["residual"].get<double>() <= 1e-11);
  }
  CHECK_FALSE(j.contains("seconds"));
  CHECK_FALSE(j["rows"][0].contains("seconds"));
}

TEST_CASE("verify suites") {
  SUBCASE("appendix") {
    const json j = cli_json({"verify", "appendix"});
    int rows_a5 = 0;
    for (const auto& row : j["rows"]) {
      CHECK(row["status"] == "PASS");
      rows_a5 += row["input"].get<std::string>().starts_with("A.5");
    }
    CHECK(rows_a5 == 5);
    bool verdict = false;
    for (const auto& n : j["notes"]) {
      verdict = verdict || n.get<std::string>().find("displayed coefficient -(1+3x)/(6x) does not satisfy") != std::string::npos;
    }
    CHECK(verdict);
  }
  SUBCASE("thm-main with an expression grid") {
    const json j = cli_json({"verify", "thm-main", "--k", "4*sqrt(2),4.2"});
    REQUIRE(j["rows"].size() == 2);
    CHECK(j["rows"][0]["input"] == "k=5.65685424949");
    CHECK(j["rows"][1]["status"] == "PASS");
  }
  SUBCASE("corollary rows come in pairs") {
    const json j = cli_json({"verify", "corollary", "--k", "7"});
    REQUIRE(j["rows"].size() == 2);
    CHECK(j["rows"][1]["check"] == "m-(P_ac) = 0");
    CHECK(j["rows"][1]["computed"] == 0.0);
  }
  SUBCASE("lsz records the labeling") {
    const json j = cli_json({"verify", "lsz", "--k", "2"});
    REQUIRE(j["rows"].size() == 2);
    CHECK(j["rows"][1]["note"].get<std::string>().starts_with("principal"));
  }
}

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({"verify", "thm-main", "--k", "4.1"}).code == kExitUsage);
  CHECK(cli({"verify", "corollary", "--k", "6"}).code == kExitUsage);
  CHECK(cli({"verify", "lsz", "--k", "4"}).code == kExitUsage);
  CHECK(cli({"verify", "bogus"}).code == kExitUsage);
  CHECK(cli({"verify", "all", "--k", "5"}).code == kExitUsage);
  CHECK(cli({"verify", "ei", "--k", "5", "--k-grid", "5:6:2"}).code == kExitUsage);
  CHECK(cli({"verify", "ei", "--tol", "1e-14"}).code == kExitUsage);
  CHECK(cli({"verify", "appendix", "--candidate-file", "/nonexistent/candidates.txt"}).code == kExitUsage);
  CHECK(cli({"verify", "ei", "--candidate-file", "x.txt"}).code == kExitUsage);
  CHECK(cli({"sweep", "dfdk", "--k", "3"}).code == kExitUsage);
  CHECK(cli({"sweep", "volume", "--k", "5"}).code == kExitUsage);
  CHECK(cli({"lvalue", "--k", "7"}).code == kExitUsage);
  CHECK(cli({"mahler", "--k", "4"}).code == kExitUsage);
  CHECK(cli({"ell", "--z", "1"}).code == kExitUsage);
  CHECK(cli({"--format", "xml", "ell", "--z", "0.5"}).code == kExitUsage);
  CHECK(cli({}).code == kExitUsage);

  const Result help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("verify") != std::string::npos);
}

TEST_CASE("sweeps") {
  SUBCASE("dfdk is positive") {
    const Result r = cli({"sweep", "dfdk", "--k-grid", "5:50:10"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 11);
    CHECK(ls[0] == "k,value,est_error");
    for (std::size_t i = 1; i < ls.size(); ++i) {
      const double v = std::stod(ls[i].substr(ls[i].find(',') + 1));
      CHECK(v > 0);
    }
  }
  SUBCASE("m_minus vanishes past the regime boundary") {
    const json j = cli_json({"sweep", "m_minus", "--k-grid", "4.2:10:30"});
    REQUIRE(j["rows"].size() == 30);
    for (const auto& row : j["rows"]) {
      const double k = row["k"];
      const double v = row["value"];
      CAPTURE(k);
      if (k > mahlerlab::mahler::kRegimeBoundary) {
        CHECK(v == 0.0);
      } else {
        CHECK(v > 0.0);
      }
    }
  }
  SUBCASE("f - log k shrinks toward 0 from below") {
    const json j = cli_json({"sweep", "f", "--k-grid", "10:100:5", "--tol", "1e-12"});
    REQUIRE(j["rows"].size() == 5);
    double prev = INFINITY;
    for (const auto& row : j["rows"]) {
      const double d = row["value"].get<double>() - std::log(row["k"].get<double>());
      CHECK(d < 0);
      CHECK(std::abs(d) < prev);
      prev = std::abs(d);
    }
  }
}

TEST_CASE("table") {
  const json j = cli_json({"table"}, kExitFail);
  CHECK(j["pass"] == false);
  int skipped = 0;
  int failed = 0;
  for (const auto& row : j["rows"]) {
    const std::string input = row["input"];
    skipped += row["status"] == "SKIPPED";
    if (row["status"] == "FAIL") {
      ++failed;
      // only the half-measure sum at 4 sqrt 2, where m- > 0
      CHECK(input == "k=4sqrt2 N=64 r=1");
      CHECK(row["check"].get<std::string>().starts_with("m(P_ac)"));
    }
    if (input == "k=16 N=15 r=11" || input == "k=sqrt2 N=56 r=1/4") {
      CHECK(row["status"] == "PASS");
    }
  }
  CHECK(skipped == 5);
  CHECK(failed == 1);
}

TEST_CASE("lvalue output") {
  const json j = cli_json({"lvalue", "--k", "16"});
  REQUIRE(j["results"].size() == 1);
  CHECK(j["results"][0]["N"] == 15);
  CHECK(j["results"][0]["eps"] == 1);

  const auto path = std::filesystem::temp_directory_path() / "mahlerlab_an_16.csv";
  REQUIRE(cli({"lvalue", "--k", "16", "--nmax", "30", "--an-csv", path.string()}).code == 0);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,a_n");
  std::string first;
  std::getline(in, first);
  CHECK(first == "1,1");
  std::filesystem::remove(path);
}

TEST_CASE("output is identical across runs and job counts") {
  for (const std::vector<std::string> args :
       {std::vector<std::string>{"verify", "all"}, {"table"}, {"sweep", "m_plus", "--k-grid", "4.5:9:12"}}) {
    for (const char* fmt : {"json", "csv", "text"}) {
      auto a1 = args;
      a1.insert(a1.end(), {"--format", fmt, "--jobs", "1"});
      auto a4 = args;
      a4.insert(a4.end(), {"--format", fmt, "--jobs", "4"});
      const Result r1 = cli(a1);
      CHECK(r1.out == cli(a1).out);
      CHECK(r1.out == cli(a4).out);
    }
  }
}

TEST_CASE("timings only on request") {
  const Result plain = cli({"verify", "eta", "--format", "csv"});
  CHECK(lines(plain.out)[0] == "suite,check,input,expected,computed,residual,tol,status,note");
  const Result timed = cli({"verify", "eta", "--format", "csv", "--timings"});
  CHECK(lines(timed.out)[0].ends_with(",seconds"));
  const json j = cli_json({"verify", "eta", "--timings"});
  CHECK(j.contains("seconds"));
}

TEST_CASE("csv quoting") {
  const Result r = cli({"verify", "ei", "--k", "5", "--format", "csv"});
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 2);
  CHECK(ls[1].starts_with("ei,\"Pi(-4/k, 4/k) = K(4/k)/2 + k pi/(4(k+4))\",k=5,"));
}

TEST_CASE("candidate file") {
  const auto path = std::filesystem::temp_directory_path() / "mahlerlab_candidates.txt";
  {
    std::ofstream f(path);
    f << "name: ei step\np: -x\nq: x\ndomain: 0 1\ninterval: 0 0.99\nrhs: pi/4/(x+1)\n"
         "---\n"
         "name: not a solution\np: -x\nq: x\ndomain: 0 1\ninterval: 0 0.99\nrhs: pi/4\n";
  }
  const json j = cli_json({"verify", "appendix", "--candidate-file", path.string()}, kExitFail);
  int fails = 0;
  for (const auto& row : j["rows"]) {
    if (row["status"] == "FAIL") {
      ++fails;
      CHECK(row["input"].get<std::string>().starts_with("not a solution"));
      CHECK(row["check"] == "s = printed right side");
    }
  }
  CHECK(fails == 1);

  {
    std::ofstream f(path);
    f << "name: broken\np: -x +\nq: x\ndomain: 0 1\n";
  }
  CHECK(cli({"verify", "appendix", "--candidate-file", path.string()}).code == kExitUsage);
  std::filesystem::remove(path);
}

TEST_CASE("mahler and ell commands") {
  const json m = cli_json({"mahler", "--k", "2,5,8"});
  REQUIRE(m["rows"].size() == 3);
  CHECK(m["rows"][0]["regime"] == "SMALL");
  CHECK(m["rows"][1]["regime"] == "MID");
  CHECK(m["rows"][2]["m_minus"] == 0.0);
  CHECK(m["rows"][0]["m_total"].get<double>() == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-9));

  const json e = cli_json({"ell", "--z", "0", "--n", "0"});
  CHECK(e["rows"][0]["K"].get<double>() == doctest::Approx(M_PI / 2).epsilon(1e-15));
  CHECK(e["rows"][0]["Pi"].get<double>() == doctest::Approx(M_PI / 2).epsilon(1e-15));
}
