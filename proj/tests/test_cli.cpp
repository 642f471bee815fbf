#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "hybrid/experiment.hpp"
#include "hybrid/fit.hpp"
#include "hybrid/generators.hpp"
#include "support.hpp"

using namespace hyb;

namespace {

std::string config_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string csv_of(const ExperimentSpec& s) {
  std::ostringstream os;
  run_experiment(s).write_csv(os);
  return os.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("size expressions") {
    CHECK(SizeExpr("16").eval(1000) == 16);
    CHECK(SizeExpr("n/4").eval(64) == 16);
    CHECK(SizeExpr("sqrt(n)").eval(64) == 8);
    CHECK(SizeExpr("2*sqrt(n)").eval(100) == 20);
    CHECK(SizeExpr("n^0.5").eval(256) == 16);
    CHECK(SizeExpr("log(n)").eval(1024) == 10);
    CHECK(SizeExpr("(n - 4) / 2").eval(10) == 3);
    CHECK(SizeExpr("0").eval(10) == 1);
    CHECK_THROWS_AS(SizeExpr("n+"), ConfigError);
    CHECK_THROWS_AS(SizeExpr("m/2"), ConfigError);
    CHECK_THROWS_AS(SizeExpr("sqrt(n"), ConfigError);
  }

  TEST_CASE("spec validation names the field") {
    ExperimentSpec s;
    s.algo = "dijkstra";
    auto msg = config_error([&] { s.validate(); });
    CHECK(msg.find("field 'algo'") != std::string::npos);
    CHECK(msg.find("dijkstra") != std::string::npos);

    s = ExperimentSpec{};
    s.graph = "grid:{n}x2";
    CHECK(config_error([&] { s.validate(); }).find("field 'sizes'") != std::string::npos);
    s.graph = "nosuch:{n}";
    s.sizes = {8};
    CHECK(config_error([&] { s.validate(); }).find("field 'graph'") != std::string::npos);

    s = ExperimentSpec{};
    s.placement = "everywhere";
    CHECK(config_error([&] { s.validate(); }).find("field 'placement'") != std::string::npos);
    s = ExperimentSpec{};
    s.eps = 0;
    CHECK(config_error([&] { s.validate(); }).find("field 'eps'") != std::string::npos);
    for (const auto& a : algorithm_ids()) {
      s = ExperimentSpec{};
      s.algo = a;
      CHECK_NOTHROW(s.validate());
    }
  }

  TEST_CASE("spec json") {
    auto s = ExperimentSpec::from_json(R"({"graph": "path:{n}", "sizes": [16, 32], "k": ["n/4", 2], "seeds": 3})");
    CHECK(s.sizes.size() == 2);
    CHECK(s.k.size() == 2);
    CHECK(s.k[1].eval(100) == 2);
    CHECK(s.seeds == std::vector<std::uint64_t>{1, 2, 3});

    CHECK(config_error([] { ExperimentSpec::from_json("{\n  \"graph\": \"path:8\",\n  \"k\": ,\n}"); })
              .find("spec line 3") != std::string::npos);
    CHECK(config_error([] { ExperimentSpec::from_json(R"({"gaph": "path:8"})"); }) ==
          "field 'gaph': unknown field");
    CHECK(config_error([] { ExperimentSpec::from_json(R"({"eps": "small"})"); }) == "field 'eps': wrong type");
    CHECK(config_error([] { ExperimentSpec::from_json(R"({"k": "n**"})"); }).find("field 'k'") == 0);
    CHECK(config_error([] { ExperimentSpec::from_json(R"({"algo": "bogus"})"); }).find("field 'algo'") == 0);
    CHECK(config_error([] { ExperimentSpec::from_json("[1, 2]"); }).find("top level") != std::string::npos);
  }

  TEST_CASE("identical specs give identical csv") {
    ExperimentSpec s;
    s.graph = "erdos_renyi:{n}:0.1";
    s.sizes = {40, 60};
    s.algo = "k_disseminate";
    s.k = {SizeExpr("n/4"), SizeExpr("sqrt(n)")};
    s.seeds = {1, 2, 3};
    auto a = csv_of(s), b = csv_of(s);
    CHECK(a == b);
    CHECK(a.rfind(ExperimentResult::csv_header(), 0) == 0);
    CHECK(std::count(a.begin(), a.end(), '\n') == 1 + 2 * 2 * 3);
  }

  TEST_CASE("path sweep with k-dissemination") {
    ExperimentSpec s;
    s.graph = "path:{n}";
    s.sizes = {64, 128, 256};
    s.k = {SizeExpr("n/4")};
    s.seeds = {1, 2};
    auto r = run_experiment(s);
    REQUIRE(r.rows.size() == 6);
    CHECK(r.errors == 0);
    CHECK(r.incorrect == 0);
    for (const auto& row : r.rows) {
      CHECK(row.correct);
      CHECK(row.diameter == row.n - 1);
      Graph g = make_path(row.n);
      CHECK(row.nq_k == ref::nq(g, row.k));
      CHECK(row.violations == 0);
      CHECK(row.rounds > 0);
    }
  }

  TEST_CASE("every algorithm runs on a small graph") {
    for (const auto& a : algorithm_ids()) {
      ExperimentSpec s;
      s.graph = a == "hard_instance" ? "path:64" : "grid:2x6";
      s.algo = a;
      s.k = {SizeExpr("8")};
      s.l = SizeExpr("4");
      s.eps = 0.5;
      s.scenario = a == "kl_sp" ? 1 : 3;
      auto r = run_experiment(s);
      INFO(a, " ", r.rows[0].error);
      CHECK(r.errors == 0);
      CHECK(r.incorrect == 0);
    }
  }

  TEST_CASE("fit recovers synthetic scaling") {
    std::vector<FitPoint> pts;
    for (double n : {64.0, 256.0, 1024.0, 4096.0})
      for (double nq : {2.0, 3.0, 5.0, 8.0}) {
        double l = std::log2(n);
        pts.push_back({n, nq * nq, nq, 7.0 * nq * l * l});
      }
    auto r = fit_scaling(pts, Predictor::NQ);
    CHECK(r.log_term);
    CHECK(r.constant == doctest::Approx(7.0).epsilon(1e-6));
    CHECK(r.exponent == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.log_exponent == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r.residual < 1e-9);
    CHECK(r.prop_constant == doctest::Approx(7.0).epsilon(1e-6));
    CHECK(r.prop_residual < 1e-9);

    std::ostringstream os;
    r.write_json(os);
    CHECK(os.str().find("\"predictor\": \"NQ_k\"") != std::string::npos);
  }

  TEST_CASE("fit rejects too few points") {
    std::vector<FitPoint> pts{{64, 16, 4, 100}};
    CHECK(config_error([&] { fit_scaling(pts, Predictor::NQ); }).find("at least 5") != std::string::npos);
    std::istringstream in(ExperimentResult::csv_header() + "\n");
    CHECK_THROWS_AS(fit_scaling(in, Predictor::SqrtK), ConfigError);
    CHECK_THROWS_AS(parse_predictor("k"), ConfigError);
  }

  TEST_CASE("fit reads the experiment csv") {
    ExperimentSpec s;
    s.graph = "grid:2x16";
    s.k = {SizeExpr("4"), SizeExpr("16"), SizeExpr("64"), SizeExpr("128"), SizeExpr("256")};
    s.seeds = {1, 2};
    std::stringstream csv(csv_of(s));
    auto pts = read_fit_points(csv);
    CHECK(pts.size() == 10);
    csv.clear();
    csv.seekg(0);
    auto nq = fit_scaling(csv, Predictor::NQ);
    csv.clear();
    csv.seekg(0);
    auto sk = fit_scaling(csv, Predictor::SqrtK);
    CHECK_FALSE(nq.log_term);
    MESSAGE("grid prop residual NQ ", nq.prop_residual, " sqrt_k ", sk.prop_residual);
    CHECK(nq.prop_residual < sk.prop_residual);
  }
}
