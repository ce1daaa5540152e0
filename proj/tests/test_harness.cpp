#include "oracles.hpp"

#include "transfusion/harness.hpp"
#include "transfusion/keyvalue.hpp"
#include "transfusion/synthgen.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

using namespace tfusion;

namespace {

TrialRecord rec(Method m, int k, double err, const std::string& id = "s") {
  TrialRecord r;
  r.scenario_id = id;
  r.method = m;
  r.k = k;
  r.n_s = 150;
  r.l2_error = err;
  r.strategy = "one_step";
  r.converged = true;
  return r;
}

BenchPlan tiny_plan() {
  BenchPlan plan;
  plan.base.p = 30;
  plan.base.s = 3;
  plan.base.n_t = 25;
  plan.base.n_s = 30;
  plan.values = {1, 2};
  plan.trials = 2;
  plan.grid_points = 8;
  plan.methods = {Method::lasso, Method::tf1};
  return plan;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TFUSION_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("summary examples") {
  const auto one = summarize({rec(Method::lasso, 1, 0.7)});
  REQUIRE(one.size() == 1);
  CHECK(one[0].mean == 0.7);
  CHECK(one[0].std_error == 0.0);
  CHECK(one[0].median == 0.7);

  const auto two = summarize({rec(Method::lasso, 1, 1.0), rec(Method::lasso, 1, 3.0)});
  CHECK(two[0].mean == 2.0);
  CHECK(two[0].std_error == doctest::Approx(1.0));
  CHECK(two[0].median == 2.0);
  CHECK_THROWS(summarize({}));
}

TEST_CASE("summary matches a two-pass computation and counts failures") {
  Rng rng(3);
  std::normal_distribution<double> z(1.0, 0.3);
  std::vector<TrialRecord> records;
  std::vector<double> lasso, tf1;
  for (int i = 0; i < 37; ++i) {
    const double a = std::abs(z(rng)), b = std::abs(z(rng));
    records.push_back(rec(Method::lasso, 3, a));
    records.push_back(rec(Method::tf1, 3, b));
    lasso.push_back(a);
    tf1.push_back(b);
  }
  records.push_back(rec(Method::tf1, 3, std::nan("")));
  const auto rows = summarize(records);
  const auto& l = find_summary(rows, Method::lasso, 3, 150);
  const auto& t = find_summary(rows, Method::tf1, 3, 150);
  CHECK(std::abs(l.mean - oracle::mean_se(lasso).mean) <= 1e-12);
  CHECK(std::abs(l.std_error - oracle::mean_se(lasso).se) <= 1e-12);
  CHECK(std::abs(t.mean - oracle::mean_se(tf1).mean) <= 1e-12);
  CHECK(t.count == 37);
  CHECK(t.failures == 1);
  CHECK(l.failures == 0);
  CHECK_THROWS(find_summary(rows, Method::pooled, 3, 150));
}

TEST_CASE("records csv round-trips") {
  std::vector<TrialRecord> records = {rec(Method::dtf2, 5, 0.1 + 1e-17), rec(Method::pooled, 0, 1.0 / 3.0, "x")};
  records[0].trial_seed = 18446744073709551615ull;
  records[0].runtime_ms = 12.25;
  records[1].converged = false;
  std::stringstream ss;
  write_records(ss, records);
  CHECK(ss.str().rfind(records_csv_header() + "\n", 0) == 0);
  CHECK(read_records(ss) == records);

  std::stringstream nan_row;
  write_records(nan_row, {rec(Method::lasso, 1, std::nan(""))});
  const auto back = read_records(nan_row);
  CHECK(std::isnan(back[0].l2_error));

  std::stringstream bad("scenario_id,method\n");
  CHECK_THROWS(read_records(bad));
}

TEST_CASE("method names") {
  for (Method m : all_methods()) CHECK(method_from_string(to_string(m)) == m);
  CHECK(all_methods().size() == 6);
  CHECK_THROWS(method_from_string("ridge"));
}

TEST_CASE("single-cell plan gives one record") {
  BenchPlan plan = tiny_plan();
  plan.values = {1};
  plan.trials = 1;
  plan.methods = {Method::lasso};
  const auto records = run_bench(plan);
  REQUIRE(records.size() == 1);
  CHECK(records[0].method == Method::lasso);
  CHECK(records[0].k == 1);
  CHECK(records[0].l2_error >= 0.0);
  CHECK(records[0].runtime_ms == 0.0);
}

TEST_CASE("bench records are ordered, seeded per cell and reproducible") {
  const BenchPlan plan = tiny_plan();
  const auto a = run_bench(plan);
  REQUIRE(a.size() == plan.values.size() * plan.methods.size() * static_cast<std::size_t>(plan.trials));
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t cell = i / plan.methods.size();
    CHECK(a[i].method == plan.methods[i % plan.methods.size()]);
    CHECK(a[i].k == plan.values[cell / static_cast<std::size_t>(plan.trials)]);
    CHECK(a[i].trial_seed == plan.trial_seed(cell / static_cast<std::size_t>(plan.trials),
                                             static_cast<int>(cell % static_cast<std::size_t>(plan.trials))));
    seeds.insert(a[i].trial_seed);
  }
  CHECK(seeds.size() == plan.values.size() * static_cast<std::size_t>(plan.trials));
  CHECK(run_bench(plan) == a);
}

TEST_CASE("n_S sweep and shared first steps") {
  BenchPlan plan = tiny_plan();
  plan.axis = SweepAxis::n_S;
  plan.base.k = 2;
  plan.values = {20, 40};
  plan.trials = 1;
  plan.methods = {Method::tf1, Method::tf2};
  const auto records = run_bench(plan);
  REQUIRE(records.size() == 4);
  CHECK(records[0].n_s == 20);
  CHECK(records[2].n_s == 40);
  CHECK(records[0].k == 2);

  // tf1 from the shared path equals the stand-alone one-step fit.
  BenchPlan solo = plan;
  solo.methods = {Method::tf1};
  const auto alone = run_bench(solo);
  CHECK(alone[0].l2_error == records[0].l2_error);
  CHECK(alone[1].l2_error == records[2].l2_error);
}

TEST_CASE("plan configuration") {
  BenchPlan plan;
  plan.apply(KeyValues{{"scenario_id", "fig"},
                       {"sweep", "n_S"},
                       {"values", "50,100"},
                       {"methods", "lasso,dtf2"},
                       {"trials", "7"},
                       {"K", "10"},
                       {"design_kind", "heterogeneous"},
                       {"fusion_constants", "8,2"}});
  CHECK(plan.scenario_id == "fig");
  CHECK(plan.axis == SweepAxis::n_S);
  CHECK(plan.values == std::vector<int>{50, 100});
  CHECK(plan.methods == std::vector<Method>{Method::lasso, Method::dtf2});
  CHECK(plan.trials == 7);
  CHECK(plan.base.k == 10);
  CHECK(plan.base.design_kind == DesignKind::heterogeneous);
  CHECK(plan.fusion_constants == std::vector<double>{8.0, 2.0});
  CHECK(plan.point_config(1, 0).n_s == 100);
  CHECK(plan.tuning_grid().fusion_constants == plan.fusion_constants);

  CHECK_THROWS(BenchPlan{}.apply(KeyValues{{"sweep", "p"}}));
  CHECK_THROWS(BenchPlan{}.apply(KeyValues{{"unknown", "1"}}));
  BenchPlan bad;
  bad.trials = 0;
  CHECK_THROWS(bad.validate());
  bad = BenchPlan{};
  bad.values.clear();
  CHECK_THROWS(bad.validate());
}

}  // TEST_SUITE

TEST_SUITE("keyvalue") {

TEST_CASE("parsing") {
  std::istringstream in("# comment\n\n a = 1 \nlist=1, 2,3\nname = x y\n");
  const KeyValues kv = parse_key_values(in);
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("name") == "x y");
  std::vector<int> list;
  read_value(kv, "list", list);
  CHECK(list == std::vector<int>{1, 2, 3});
  int a = 0;
  read_value(kv, "a", a);
  CHECK(a == 1);
  int untouched = 5;
  read_value(kv, "missing", untouched);
  CHECK(untouched == 5);
  double d = 0.0;
  CHECK_THROWS(read_value(KeyValues{{"d", "1.5x"}}, "d", d));

  std::istringstream dup("a=1\na=2\n");
  CHECK_THROWS(parse_key_values(dup));
  std::istringstream noeq("just text\n");
  CHECK_THROWS(parse_key_values(noeq));
  CHECK_THROWS(reject_unknown_keys(kv, {"a"}, "test"));
}

TEST_CASE("doubles print in shortest round-trip form") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) CHECK(std::stod(format_double(v)) == v);
  KeyValues kv{{"x", "3"}, {"y", "z"}};
  std::ostringstream out;
  write_key_values(out, kv);
  std::istringstream in(out.str());
  CHECK(parse_key_values(in) == kv);
}

}  // TEST_SUITE

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("") == 1);
  CHECK(run_cli("bench --no-such-flag") == 1);
  CHECK(run_cli("gen") == 1);
  CHECK(run_cli("fit --method ridge") == 1);
  CHECK(run_cli("fit --config /no/such/file") == 1);
}

TEST_CASE("fit on a K = 0 scenario reports the lasso baseline") {
  const auto dir = std::filesystem::temp_directory_path() / "tfusion_cli_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream cfg(dir / "k0.cfg");
    cfg << "K = 0\np = 40\ns = 3\nn_T = 30\n";
  }
  const auto out = dir / "fit.txt";
  REQUIRE(run_cli("fit --method tf1 --config " + (dir / "k0.cfg").string() + " --out " + out.string()) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("strategy: baseline_lasso") != std::string::npos);
  CHECK(text.find("fusion_constant: none") != std::string::npos);

  REQUIRE(run_cli("csigma --out " + (dir / "cs.csv").string()) == 0);
  std::istringstream rows(slurp(dir / "cs.csv"));
  std::string line;
  std::getline(rows, line);
  CHECK(line == "p,c,c_sigma,c_sigma_identical");
  double prev = 0.0;
  int n = 0;
  while (std::getline(rows, line)) {
    std::stringstream ss(line);
    std::string p, c, cs, same;
    std::getline(ss, p, ',');
    std::getline(ss, c, ',');
    std::getline(ss, cs, ',');
    std::getline(ss, same, ',');
    CHECK(std::stod(cs) > prev);
    CHECK(std::stod(same) == 1.0);
    prev = std::stod(cs);
    ++n;
  }
  CHECK(n == 3);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
