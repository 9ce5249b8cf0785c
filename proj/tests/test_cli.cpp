#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "svgof/cli.hpp"
#include "svgof/config.hpp"
#include "svgof/io.hpp"
#include "svgof/simulate.hpp"

using namespace svgof;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path tmpdir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "svgof_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing") {
  const Config cfg = parse_config_text(
      "# comment\n[run]\nseed = 7\n[model]\nfamily = ou_sv ; inline\n");
  CHECK(cfg.has("run", "seed"));
  CHECK(cfg.sections.at("model").at("family") == "ou_sv");
  CHECK_THROWS_AS(parse_config_text("[run]\nnonsense line\n"),
                  std::runtime_error);

  ConfigView v(cfg);
  CHECK(v.u64("run", "seed", 1) == 7);
  CHECK(v.num("run", "missing", 2.5) == 2.5);
  CHECK(v.resolved().count("run.missing") == 1);

  CHECK(parse_dt("weekly") == Catch::Approx(1.0 / 52.0));
  CHECK(parse_dt("daily") == Catch::Approx(1.0 / 252.0));
  CHECK(parse_dt("1/12") == Catch::Approx(1.0 / 12.0));
  CHECK(parse_dt("0.25") == Catch::Approx(0.25));
  CHECK_THROWS_AS(parse_dt("fortnightly"), std::runtime_error);
}

TEST_CASE("csv ingestion") {
  const fs::path dir = tmpdir("ingest");
  SECTION("minimal two-row file") {
    const fs::path f = dir / "two.csv";
    write_text_file(f.string(), "t,r\n0.0,0.05\n0.25,0.06\n");
    const Path p = ingest_csv(f.string());
    CHECK(p.r.size() == 2);
    CHECK(p.dt == Catch::Approx(0.25));
  }
  SECTION("duplicate timestamp reports the line") {
    const fs::path f = dir / "dup.csv";
    write_text_file(f.string(), "t,r\n0.0,0.05\n0.0,0.06\n");
    CHECK_THROWS_WITH(ingest_csv(f.string()),
                      Catch::Matchers::ContainsSubstring("line 3"));
  }
  SECTION("malformed number reports the line") {
    const fs::path f = dir / "bad.csv";
    write_text_file(f.string(), "t,r\n0.0,0.05\n0.1,oops\n");
    CHECK_THROWS_WITH(ingest_csv(f.string()),
                      Catch::Matchers::ContainsSubstring("line 3"));
  }
  SECTION("date mode builds an index grid") {
    const fs::path f = dir / "dates.csv";
    write_text_file(f.string(),
                    "date,rate\n2001-10-15,3.52\n2001-10-16,3.53\n"
                    "2001-10-17,3.54\n2001-10-22,3.50\n");
    const Path p = ingest_csv(f.string());
    CHECK(p.r.size() == 4);
    CHECK(p.dt == Catch::Approx(1.0 / 252.0));
    CHECK(p.t[3] == Catch::Approx(3.0 / 252.0));
    const fs::path g = dir / "gap.csv";
    write_text_file(g.string(),
                    "date,rate\n2001-10-15,3.52\n2001-10-16,3.53\n"
                    "2002-06-01,3.54\n");
    CHECK_THROWS_WITH(ingest_csv(g.string()),
                      Catch::Matchers::ContainsSubstring("gap"));
  }
  SECTION("export/ingest round trip is bit-identical") {
    ParamVector p;
    p.alpha = 0.04;
    p.beta = 0.6;
    p.theta0 = -0.7;
    p.theta1 = 0.1;
    p.xi = 0.4;
    SimConfig cfg;
    cfg.n = 128;
    cfg.burn_in = 100;
    cfg.dt = 1.0 / 52.0;
    cfg.seed = 5;
    const Path sim = simulate_path(ModelSpec::ou_sv(), p, cfg);
    const fs::path f = dir / "roundtrip.csv";
    write_path_csv(f.string(), sim);
    const Path back = ingest_csv(f.string());
    REQUIRE(back.r.size() == sim.r.size());
    for (std::size_t i = 0; i < sim.r.size(); ++i) CHECK(back.r[i] == sim.r[i]);
  }
}

TEST_CASE("run: simulate is reproducible") {
  const fs::path d1 = tmpdir("sim1");
  const fs::path d2 = tmpdir("sim2");
  RunConfig rc;
  rc.cfg = parse_config_text(
      "[run]\nseed = 1\n[model]\nfamily = ou_sv\nalpha = 0.01\nbeta = 0.3\n"
      "phi0 = -0.006\nphi1 = 0.99\nsigma_w2 = 0.0225\n"
      "[sim]\nn = 200\nburn_in = 100\n");
  rc.command = "simulate";
  rc.out_dir = d1.string();
  REQUIRE(run(rc) == 0);
  rc.out_dir = d2.string();
  REQUIRE(run(rc) == 0);
  CHECK(slurp(d1 / "results.csv") == slurp(d2 / "results.csv"));
  CHECK(slurp(d1 / "report.txt") == slurp(d2 / "report.txt"));
  CHECK(slurp(d1 / "manifest.txt") == slurp(d2 / "manifest.txt"));
  CHECK(slurp(d1 / "manifest.txt").find("config_hash") != std::string::npos);
}

TEST_CASE("run: estimate emits a gamma estimate for level-effect models") {
  const fs::path dir = tmpdir("estimate");
  RunConfig rc;
  rc.cfg = parse_config_text(
      "[run]\nseed = 3\n[model]\nfamily = ckls_sv\nalpha = 0.04\nbeta = 0.6\n"
      "gamma = 1.5\ntheta0 = -0.7\ntheta1 = 0.1\nxi = 0.4\n"
      "[sim]\nn = 260\nburn_in = 300\n"
      "[estimate]\nestimator = kf7\nmultistarts = 2\n");
  rc.command = "estimate";
  rc.out_dir = dir.string();
  REQUIRE(run(rc) == 0);
  const std::string report = slurp(dir / "report.txt");
  CHECK(report.find("gamma_hat") != std::string::npos);
  CHECK(report.find("phi1_hat") != std::string::npos);
  CHECK(report.find("xi_hat") != std::string::npos);
  CHECK(fs::exists(dir / "plotdata_logvol.csv"));
  CHECK(fs::exists(dir / "results.csv"));
  CHECK(fs::exists(dir / "manifest.txt"));
}

TEST_CASE("run: estimators mcmc and pf produce reports") {
  RunConfig rc;
  rc.cfg = parse_config_text(
      "[run]\nseed = 5\n[model]\nfamily = ou_sv\nalpha = 0.01\nbeta = 0.3\n"
      "phi0 = -0.006\nphi1 = 0.99\nsigma_w2 = 0.0225\n"
      "[sim]\nn = 220\nburn_in = 200\n"
      "[estimate]\nestimator = mcmc\n[mcmc]\niterations = 400\nburn_in = 100\n");
  rc.command = "estimate";
  const fs::path d1 = tmpdir("mcmc");
  rc.out_dir = d1.string();
  REQUIRE(run(rc) == 0);
  CHECK(slurp(d1 / "report.txt").find("phi1_mean") != std::string::npos);
  CHECK(slurp(d1 / "results.csv").rfind("sweep,phi0,phi1,sigma_w2", 0) == 0);

  rc.cfg = parse_config_text(
      "[run]\nseed = 5\n[model]\nfamily = ou_sv\nalpha = 0.01\nbeta = 0.3\n"
      "phi0 = -0.006\nphi1 = 0.99\nsigma_w2 = 0.0225\n"
      "[sim]\nn = 220\nburn_in = 200\n"
      "[estimate]\nestimator = pf\n[pf]\nparticles = 300\n");
  const fs::path d2 = tmpdir("pf");
  rc.out_dir = d2.string();
  REQUIRE(run(rc) == 0);
  CHECK(slurp(d2 / "report.txt").find("phi1_mean") != std::string::npos);
  CHECK(slurp(d2 / "results.csv").rfind("i,ess,", 0) == 0);
}

TEST_CASE("run: gof writes a bootstrap table and verdict") {
  const fs::path dir = tmpdir("gof");
  RunConfig rc;
  rc.cfg = parse_config_text(
      "[run]\nseed = 9\nworkers = 2\n"
      "[model]\nfamily = ou_sv\nalpha = 0.04\nbeta = 0.6\n"
      "theta0 = -0.7\ntheta1 = 0.1\nxi = 0.4\n"
      "[sim]\nn = 150\nburn_in = 200\n"
      "[gof]\nkind = drift\nfunctional = ks\nB = 100\n");
  rc.command = "gof";
  rc.out_dir = dir.string();
  REQUIRE(run(rc) == 0);
  const std::string report = slurp(dir / "report.txt");
  CHECK(report.find("p_value") != std::string::npos);
  CHECK(report.find("critical_value") != std::string::npos);
  const std::string csv = slurp(dir / "results.csv");
  // header plus one line per kept replicate
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 101);
}

TEST_CASE("run: mc-study emits the wide table") {
  const fs::path dir = tmpdir("mc");
  RunConfig rc;
  rc.cfg = parse_config_text(
      "[run]\nseed = 11\nworkers = 2\n"
      "[model]\nfamily = ou_sv\nalpha = 0.04\nbeta = 0.6\n"
      "theta0 = -0.7\ntheta1 = 0.1\nxi = 0.4\n"
      "[sim]\nburn_in = 150\n"
      "[gof]\nkind = drift\n"
      "[mc]\nn_list = 150\nreplicates = 3\nB = 100\nburn_in = 150\n");
  rc.command = "mc-study";
  rc.out_dir = dir.string();
  REQUIRE(run(rc) == 0);
  const std::string csv = slurp(dir / "results.csv");
  CHECK(csv.rfind("dgp,ks_n150,cvm_n150", 0) == 0);
  const std::string report = slurp(dir / "report.txt");
  CHECK(report.find("reject_ks_n150") != std::string::npos);
}

TEST_CASE("run: worker count does not change results") {
  auto make = [](const fs::path& dir, unsigned workers) {
    RunConfig rc;
    rc.cfg = parse_config_text(
        "[run]\nseed = 13\n"
        "[model]\nfamily = ou_sv\nalpha = 0.04\nbeta = 0.6\n"
        "theta0 = -0.7\ntheta1 = 0.1\nxi = 0.4\n"
        "[sim]\nn = 150\nburn_in = 150\n"
        "[gof]\nkind = drift\nfunctional = cvm\nB = 120\n");
    rc.command = "gof";
    rc.out_dir = dir.string();
    rc.workers_override = workers;
    REQUIRE(run(rc) == 0);
  };
  const fs::path d1 = tmpdir("w1");
  const fs::path d2 = tmpdir("w2");
  make(d1, 1);
  make(d2, 2);
  CHECK(slurp(d1 / "results.csv") == slurp(d2 / "results.csv"));
  CHECK(slurp(d1 / "report.txt") == slurp(d2 / "report.txt"));
}
