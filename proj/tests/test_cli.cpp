#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rmt/cli.hpp"

using namespace rmt;
using namespace rmt::cli;

namespace {

std::vector<std::string> split(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

RunConfig parse(const std::string& line) { return parse_config(split(line)); }

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("rmt_cli_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_timestamp(const std::string& text) {
  std::istringstream is(text);
  std::string out;
  for (std::string line; std::getline(is, line);) {
    if (line.rfind("# timestamp", 0) == 0) continue;
    out += line + '\n';
  }
  return out;
}

int run_line(const std::string& line) {
  std::vector<std::string> words = split(line);
  words.insert(words.begin(), "rmt");
  std::vector<char*> argv;
  for (auto& w : words) argv.push_back(w.data());
  return main_entry(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("parse_config") {
  const auto cfg = parse("density --ensemble quotient --n 3 --nA 20 --nB 21 --a 2 --b 0.2");
  CHECK(cfg.command == Command::Density);
  CHECK(cfg.model.kind == harness::ModelKind::Composite);
  CHECK(cfg.model.spec.kind == ensembles::Kind::Quotient);
  CHECK(cfg.model.spec.n == 3);
  CHECK(cfg.model.spec.n_A == 20);
  CHECK(cfg.model.spec.n_B == 21);
  CHECK(cfg.model.spec.a == 2.0);
  CHECK(cfg.model.spec.b == 0.2);
  CHECK(cfg.seed == 42);
  CHECK(cfg.grid_points == 400);
  CHECK(cfg.effective.at("nA") == "20");

  CHECK_THROWS_AS(parse("density --ensemble quotient --n 3 --nA 2 --nB 21 --a 2 --b 0.2"), UsageError);
  CHECK_THROWS_AS(parse("density --ensemble quotient --n 3 --nA 20 --nB 21 --a -1"), UsageError);
  CHECK_THROWS_AS(parse("density --ensemble nope --n 3"), UsageError);
  CHECK_THROWS_AS(parse("density --ensemble gue --n 3 --bogus 1"), UsageError);
  CHECK_THROWS_AS(parse("explode --ensemble gue --n 3"), UsageError);
  CHECK_THROWS_AS(parse("sample --ensemble gue --n 3"), UsageError);
  CHECK_THROWS_AS(parse("density --ensemble gue --n x"), UsageError);
  CHECK_THROWS_AS(parse("density --ensemble gue --n 3 --format xml"), UsageError);

  const auto frac = parse("density --ensemble wigner-wishart-sum --n 5 --nB 7 --a 3/10 --b 7/10");
  CHECK(frac.model.spec.a == 0.3);
  CHECK(frac.model.spec.b == 0.7);
  CHECK(parse("corr2 --ensemble wigner-wishart-product --n 2 --nB 2").grid_points == 60);
  const auto cw = parse("density --ensemble correlated-wishart --n 3 --nB 4 --sigma 1,2,3");
  CHECK(cw.model.spec.sigma == std::vector<double>{1.0, 2.0, 3.0});
  CHECK_THROWS_AS(parse("density --ensemble correlated-wishart --n 3 --nB 4 --sigma 1,2"), UsageError);
}

TEST_CASE("config file and precedence") {
  const auto path = temp_path("config.cfg");
  {
    std::ofstream out(path);
    out << "# model\nensemble = quotient\nn = 3\nnA = 20\nnB = 21\na = 2\nb = 0.2\nseed = 7\n\n";
  }
  CHECK(parse("density --config " + path.string()).seed == 7);
  CHECK(parse("density --config " + path.string() + " --seed 9").seed == 9);
  CHECK(parse("density --config " + path.string() + " --n 2").model.spec.n == 2);

  CHECK_THROWS_AS(parse_config_text("colour = red\n", "x"), UsageError);
  CHECK_THROWS_AS(parse_config_text("n 3\n", "x"), UsageError);
  CHECK(parse_config_text("n = 3 # size\n", "x").at("n") == "3");
  CHECK_THROWS_AS(parse("density --config /nonexistent/file.cfg"), UsageError);

  ::setenv("RMT_THREADS", "3", 1);
  CHECK(parse("density --ensemble gue --n 2").threads == 3);
  CHECK(parse("density --ensemble gue --n 2 --threads 1").threads == 1);
  ::unsetenv("RMT_THREADS");
  std::filesystem::remove(path);
}

TEST_CASE("exit codes") {
  const auto out = temp_path("exit.csv").string();
  CHECK(run_line("density --ensemble quotient --n 3 --nA 20 --nB 21 --a 2 --b 0.2 --grid-min 1 --grid-max 1 "
                 "--grid-points 1 --output " + out) == kExitOk);
  const std::string csv = slurp(out);
  int data_rows = 0;
  std::istringstream is(csv);
  for (std::string line; std::getline(is, line);) {
    if (!line.empty() && line[0] != '#') ++data_rows;
  }
  CHECK(data_rows == 2);  // header plus one row

  CHECK(run_line("density --ensemble quotient --n 3 --nA 2 --nB 21 --a 2 --b 0.2") == kExitUsage);
  CHECK(run_line("corr2 --ensemble quotient --n 3 --nA 20 --nB 21 --a 2 --b 0.2 --grid-min -1 --grid-max 1 "
                 "--grid-points 3 --output " + out) == kExitUsage);
  CHECK(run_line("density --ensemble gue --n 3 --unknown 4") == kExitUsage);
  CHECK(run_line("validate --ensemble wigner-wishart-sum --n 5 --nB 7 --a 3/10 --b 7/10 --trials 100000 --output " +
                 out) == kExitOk);
  const std::string metrics = slurp(out);
  CHECK(metrics.find("pass,1") != std::string::npos);
  // a threshold no histogram can meet
  CHECK(run_line("validate --ensemble gue --n 3 --trials 200 --threshold 1e-9 --output " + out) ==
        kExitValidationFailed);
  std::filesystem::remove(out);
}

TEST_CASE("outputs are deterministic apart from the timestamp") {
  const auto p1 = temp_path("a.csv"), p2 = temp_path("b.csv");
  const std::string base = "sample --ensemble wigner-wishart-product --n 3 --nB 4 --trials 2000 --seed 5 --output ";
  CHECK(run_line(base + p1.string() + " --threads 1") == kExitOk);
  CHECK(run_line(base + p2.string() + " --threads 2") == kExitOk);
  const std::string a = without_timestamp(slurp(p1)), b = without_timestamp(slurp(p2));
  // threads and output path are echoed in the config block
  auto strip = [](const std::string& s) {
    std::istringstream is(s);
    std::string out;
    for (std::string line; std::getline(is, line);) {
      if (line.rfind("# config.threads", 0) != 0 && line.rfind("# config.output", 0) != 0) out += line + '\n';
    }
    return out;
  };
  CHECK(strip(a) == strip(b));
  CHECK(strip(a).find("bin_lo,bin_hi,count") != std::string::npos);
  CHECK(a.find("# seed = 5") != std::string::npos);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("json output") {
  const auto p = temp_path("d.json");
  CHECK(run_line("density --ensemble wigner-wishart-product --n 2 --nB 2 --grid-min -1 --grid-max 1 --grid-points 5 "
                 "--format json --output " + p.string()) == kExitOk);
  const auto doc = nlohmann::json::parse(slurp(p));
  CHECK(doc["meta"]["command"] == "density");
  CHECK(doc["meta"]["seed"] == 42);
  CHECK(doc["meta"].contains("timestamp"));
  CHECK(doc["meta"].contains("version"));
  CHECK(doc["meta"]["config"]["n"] == "2");
  CHECK(doc["columns"] == nlohmann::json::array({"lambda", "p"}));
  REQUIRE(doc["rows"].size() == 5);
  // log singularity at the origin: reported value is the mean of the one-sided limits
  CHECK(doc["rows"][2][1].get<double>() > doc["rows"][1][1].get<double>());
  CHECK(doc["rows"][1][1].get<double>() == doctest::Approx(doc["rows"][3][1].get<double>()).epsilon(1e-9));

  const auto q = temp_path("info.json");
  CHECK(run_line("info --ensemble quotient --n 3 --nA 20 --nB 21 --a 2 --b 0.2 --format json --output " +
                 q.string()) == kExitOk);
  const auto info = nlohmann::json::parse(slurp(q));
  bool mass_ok = false;
  for (const auto& row : info["rows"]) {
    if (row[0] == "total_mass") mass_ok = std::fabs(row[1].get<double>() - 1.0) < 1e-6;
  }
  CHECK(mass_ok);
  std::filesystem::remove(p);
  std::filesystem::remove(q);
}

}
