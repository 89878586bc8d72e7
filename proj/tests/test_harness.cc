#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "kswitch/harness.h"
#include "kswitch/matching.h"
#include "support.h"

using namespace kswitch;

namespace {

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string l;
  while (std::getline(ss, l)) out.push_back(l);
  return out;
}

// Every CSV column except the last (wall time).
std::string without_time(const std::string& row) { return row.substr(0, row.rfind(',')); }

ExperimentConfig small(Method m) {
  ExperimentConfig c;
  c.method = m;
  c.n_workers = 30;
  c.n_tasks = 25;
  c.trials = 3;
  c.seed = 11;
  c.key_bits = 256;
  c.orr_samples = 2000;
  return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("method names") {
  for (Method m : {Method::kOM, Method::kORR, Method::kKS, Method::kOPT})
    CHECK(method_from_string(to_string(m)) == m);
  CHECK(to_string(Method::kKS) == "KS");
  CHECK_THROWS_AS(method_from_string("ks"), ArgumentError);
  CHECK_THROWS_AS(method_from_string(""), ArgumentError);
}

TEST_CASE("synthetic instances") {
  Rng rng(3);
  auto inst = gen_synthetic(50, 40, 1234, rng);
  CHECK(inst.workers.size() == 50);
  CHECK(inst.tasks.size() == 40);
  for (const auto& w : inst.workers) {
    CHECK(w.reach == 1234);
    CHECK(w.true_loc.x >= 0);
    CHECK(w.true_loc.x <= kSyntheticExtent);
    CHECK(w.true_loc.y >= 0);
    CHECK(w.true_loc.y <= kSyntheticExtent);
  }
  CHECK_NOTHROW(inst.validate());
  CHECK_THROWS_AS(gen_synthetic(-1, 2, 100, rng), ArgumentError);
}

TEST_CASE("ingest x,y and roundtrip") {
  std::stringstream in("role,x,y\nw,1,2\nt,3,4\n\nw,5.5,6\n");
  auto inst = ingest_csv(in, 700);
  REQUIRE(inst.workers.size() == 2);
  REQUIRE(inst.tasks.size() == 1);
  CHECK(inst.workers[1].true_loc == Location{5.5, 6});
  CHECK(inst.workers[1].id == 1);
  CHECK(inst.workers[0].reach == 700);
  CHECK(inst.tasks[0].true_loc == Location{3, 4});

  std::stringstream out;
  write_instance_csv(out, inst);
  auto back = ingest_csv(out, 700);
  REQUIRE(back.workers.size() == 2);
  CHECK(back.workers[1].true_loc == inst.workers[1].true_loc);
  CHECK(back.tasks[0].true_loc == inst.tasks[0].true_loc);
}

TEST_CASE("ingest lat,lon") {
  // One degree of latitude is R * pi / 180 meters.
  std::stringstream in("role,lat,lon\nw,40.0,116.0\nt,41.0,116.0\n");
  auto inst = ingest_csv(in, 1000);
  const double deg = kEarthRadius * std::numbers::pi / 180.0;
  CHECK(inst.workers[0].true_loc.x == doctest::Approx(0.0));
  CHECK(inst.workers[0].true_loc.y == doctest::Approx(0.0));
  CHECK(inst.tasks[0].true_loc.y == doctest::Approx(deg));
  CHECK(inst.tasks[0].true_loc.x == doctest::Approx(0.0));

  // Longitude shrinks with the cosine of the mean latitude (60 degrees).
  std::stringstream in2("role,lat,lon\nw,60,10\nt,60,11\n");
  auto inst2 = ingest_csv(in2, 1000);
  CHECK(inst2.tasks[0].true_loc.x == doctest::Approx(deg * 0.5).epsilon(1e-9));
}

TEST_CASE("ingest errors carry line numbers") {
  auto fails_with = [](const std::string& text, const std::string& needle) {
    std::stringstream in(text);
    try {
      ingest_csv(in, 100);
    } catch (const ParseError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  CHECK(fails_with("w,1,2\n", "line 1"));
  CHECK(fails_with("role,a,b\n", "line 1"));
  CHECK(fails_with("role,x,y\nw,1,2\nq,1,2\n", "line 3"));
  CHECK(fails_with("role,x,y\nw,1\n", "line 2"));
  CHECK(fails_with("role,x,y\nw,1,zz\n", "line 2"));
  CHECK(fails_with("role,x,y\nw,1,2\nt,nan,2\n", "line 3"));
  CHECK_THROWS_AS(ingest_file("/nonexistent/instance.csv", 100), ParseError);

  std::stringstream empty("role,x,y\n");
  CHECK(ingest_csv(empty, 100).workers.empty());
}

TEST_CASE("results CSV schema and determinism") {
  for (Method m : {Method::kOM, Method::kORR, Method::kKS, Method::kOPT}) {
    auto cfg = small(m);
    auto a = run_experiment(cfg);
    cfg.threads = 3;
    auto b = run_experiment(cfg);
    std::stringstream sa, sb;
    write_results_csv(sa, a);
    write_results_csv(sb, b);
    auto la = lines_of(sa.str());
    auto lb = lines_of(sb.str());
    REQUIRE(la.size() == 4);
    CHECK(la[0] == "method,n_workers,n_tasks,epsilon,k,lambda,trial,utility,matching_size,wall_time_s");
    REQUIRE(lb.size() == la.size());
    for (size_t i = 1; i < la.size(); ++i) {
      CHECK(without_time(la[i]) == without_time(lb[i]));
      CHECK(std::count(la[i].begin(), la[i].end(), ',') == 9);
      CHECK(la[i].rfind(to_string(m) + ",30,25,", 0) == 0);
    }
    for (const auto& r : a) {
      CHECK(r.utility <= r.matching_size);
      CHECK(r.matching_size <= 25);
      CHECK(r.wall_time_s >= 0);
      if (m == Method::kOPT) CHECK(r.utility == r.matching_size);
      if (m != Method::kKS) CHECK(r.rounds.empty());
    }
  }
}

TEST_CASE("methods share each trial's instance") {
  auto cfg = small(Method::kOM);
  auto a = trial_instance(cfg, 1);
  cfg.method = Method::kKS;
  auto b = trial_instance(cfg, 1);
  REQUIRE(a.workers.size() == b.workers.size());
  for (size_t i = 0; i < a.workers.size(); ++i) {
    CHECK(a.workers[i].true_loc == b.workers[i].true_loc);
    CHECK(*a.workers[i].perturbed_loc == *b.workers[i].perturbed_loc);
  }
  auto c = trial_instance(cfg, 2);
  CHECK_FALSE(a.workers[0].true_loc == c.workers[0].true_loc);

  // KS starts from the OM matching of the same trial, so it is never worse.
  auto om = run_experiment(small(Method::kOM));
  auto ks = run_experiment(small(Method::kKS));
  auto opt = run_experiment(small(Method::kOPT));
  for (size_t t = 0; t < om.size(); ++t) {
    CHECK(ks[t].utility >= om[t].utility);
    CHECK(opt[t].utility >= ks[t].utility);
  }
}

TEST_CASE("summary JSON") {
  std::vector<RunResult> rs(3);
  for (int i = 0; i < 3; ++i) {
    rs[i].method = Method::kOM;
    rs[i].n_workers = rs[i].n_tasks = 10;
    rs[i].epsilon = 0.4;
    rs[i].k = 2;
    rs[i].lambda = 20;
    rs[i].trial = i;
    rs[i].utility = 2 + 2 * i;  // 2, 4, 6
    rs[i].matching_size = 8;
  }
  auto j = nlohmann::json::parse(summary_json(rs, {{"SPATIAL", 3.5}}));
  REQUIRE(j["points"].size() == 1);
  const auto& p = j["points"][0];
  CHECK(p["method"] == "OM");
  CHECK(p["trials"] == 3);
  CHECK(p["utility"]["mean"].get<double>() == doctest::Approx(4.0));
  CHECK(p["utility"]["std"].get<double>() == doctest::Approx(2.0));
  CHECK(p["utility"]["min"].get<double>() == 2.0);
  CHECK(p["utility"]["max"].get<double>() == 6.0);
  CHECK(p["matching_size"]["std"].get<double>() == 0.0);
  CHECK(j["external"][0]["method"] == "SPATIAL");
  CHECK(j["external"][0]["utility"].get<double>() == 3.5);

  rs[2].epsilon = 1.25;
  CHECK(nlohmann::json::parse(summary_json(rs))["points"].size() == 2);
  CHECK_FALSE(nlohmann::json::parse(summary_json(rs)).contains("external"));
}

TEST_CASE("external results") {
  std::stringstream in("method,utility\nA,1.5\nB,2\n");
  auto ext = read_external_results(in);
  REQUIRE(ext.size() == 2);
  CHECK(ext[1].method == "B");
  CHECK(ext[1].utility == 2.0);
  std::stringstream bad("A,1,2\n");
  CHECK_THROWS_AS(read_external_results(bad), ParseError);
}

TEST_CASE("reach calibration") {
  auto c = calibrate_reach(40, 40, 0.9, 3, 5);
  CHECK(c.opt_fraction >= 0.9);
  CHECK(c.reach > 100);
  CHECK(c.reach < 8000);
  CHECK_THROWS_AS(calibrate_reach(40, 40, 1.5, 3, 5), ArgumentError);
  CHECK_THROWS_AS(calibrate_reach(0, 40, 0.9, 3, 5), ArgumentError);
}

TEST_CASE("config errors") {
  auto cfg = small(Method::kOM);
  cfg.trials = 0;
  CHECK_THROWS_AS(run_experiment(cfg), ArgumentError);
  cfg = small(Method::kOM);
  cfg.dataset = "/nonexistent/instance.csv";
  CHECK_THROWS_AS(run_experiment(cfg), ParseError);
}

}  // TEST_SUITE
