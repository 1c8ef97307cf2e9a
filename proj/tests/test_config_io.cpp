#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "planar_mhd/config.hpp"
#include "planar_mhd/io.hpp"
#include "test_support.hpp"

using namespace planar_mhd;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
  const RunConfig c = parse_config("# only a comment\n\n");
  EXPECT_EQ(c, RunConfig{});
  EXPECT_EQ(c.scenario, "uniform-rest");
  EXPECT_EQ(c.n_cells, 128u);
  EXPECT_DOUBLE_EQ(c.effective_alpha(), 0.5);
  EXPECT_EQ(c.params, PhysParams{});
}

TEST(Config, ParsesValuesAndInlineComments) {
  const RunConfig c = parse_config(
      "scenario = vacuum-pocket  # pocket\n"
      "  n_cells=256\n"
      "t_end = 0.25\n"
      "q_exp = 2\n"
      "alpha = 0.7\n"
      "snapshot_times = 0.1, 0.2\n");
  EXPECT_EQ(c.scenario, "vacuum-pocket");
  EXPECT_EQ(c.n_cells, 256u);
  EXPECT_DOUBLE_EQ(c.t_end, 0.25);
  EXPECT_DOUBLE_EQ(c.params.q_exp, 2.0);
  EXPECT_DOUBLE_EQ(c.effective_alpha(), 0.7);
  EXPECT_EQ(c.snapshot_times, (std::vector<double>{0.1, 0.2}));
}

TEST(Config, ErrorsNameLineOrField) {
  EXPECT_NE(config_error("t_end = 0.1\nbogus = 1\n").find("line 2: unknown key 'bogus'"), std::string::npos);
  EXPECT_NE(config_error("n_cells = 10\nn_cells = 20\n").find("duplicate key 'n_cells'"), std::string::npos);
  EXPECT_NE(config_error("\n\nnot a pair\n").find("line 3"), std::string::npos);
  EXPECT_NE(config_error("t_end = abc\n").find("t_end"), std::string::npos);
  EXPECT_NE(config_error("t_end = -1\n").find("t_end"), std::string::npos);
  EXPECT_NE(config_error("n_cells = 2\n").find("n_cells"), std::string::npos);
  EXPECT_NE(config_error("cfl = 1.5\n").find("cfl"), std::string::npos);
  EXPECT_NE(config_error("q_exp = 0\n").find("q must be > 0"), std::string::npos);
  EXPECT_NE(config_error("q_exp = 0.5\nalpha = 0.9\n").find("alpha"), std::string::npos);
  EXPECT_NE(config_error("mu_visc = 0\n").find("mu_visc"), std::string::npos);
  EXPECT_NE(config_error("t_end = 0.1\nsnapshot_times = 0.2\n").find("snapshot_times"), std::string::npos);
  EXPECT_NE(config_error("n_cells = -3\n").find("n_cells"), std::string::npos);
}

TEST(Config, RenderParseRoundTripProperty) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(0.01, 5.0), unit(0.05, 1.0);
  std::uniform_int_distribution<std::size_t> cells(4, 2000), small(1, 40);
  for (int k = 0; k < 200; ++k) {
    RunConfig c;
    c.scenario = k % 2 ? "gaussian-density" : "smooth-shear";
    c.n_cells = cells(rng);
    c.t_end = pos(rng);
    c.cfl = unit(rng);
    c.dt_max = pos(rng);
    c.picard_tol = 1e-12 * pos(rng);
    c.picard_max_iters = small(rng);
    c.delta = k % 3 ? 0.0 : unit(rng);
    c.output_dir = "out_" + std::to_string(k);
    c.record_every = small(rng);
    c.params.lambda_visc = pos(rng);
    c.params.mu_visc = pos(rng);
    c.params.nu_mag = pos(rng);
    c.params.gas_R = pos(rng);
    c.params.c_v = pos(rng);
    c.params.kappa_a = pos(rng);
    c.params.kappa_b = pos(rng);
    c.params.q_exp = pos(rng);
    if (k % 4 == 0) c.alpha = 0.5 * std::min(1.0, c.params.q_exp) * unit(rng);
    if (k % 5 == 0) c.snapshot_times = {0.0, 0.5 * c.t_end, c.t_end};
    ASSERT_NO_THROW(c.validate());
    EXPECT_EQ(parse_config(render(c)), c) << render(c);
  }
}

TEST(Snapshot, BitwiseRoundTrip) {
  const Grid g(37);
  const State s = testing_support::random_state(g, 5).with_time(0.123456789012345678);
  std::stringstream buf;
  write_snapshot(buf, s, g);
  const State back = read_snapshot(buf);
  EXPECT_EQ(back, s);
}

TEST(Snapshot, ListsSortedFilesOnly) {
  const auto dir = testing_support::scratch_dir("snapshots");
  for (std::size_t i : {2u, 0u, 1u}) write_file(dir / snapshot_name(i), "x");
  write_file(dir / "other.txt", "x");
  const auto files = list_snapshots(dir);
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(files[0].filename(), "snapshot_0000.txt");
  EXPECT_EQ(files[2].filename(), "snapshot_0002.txt");
  EXPECT_TRUE(list_snapshots(dir / "missing").empty());
  std::istringstream bad("0.5 1 0 0 0 0 0 1\n");
  EXPECT_THROW(read_snapshot(bad), DomainError);
}

TEST(DiagnosticsCsv, FixedColumnsThenSortedNorms) {
  DiagnosticsRecord r;
  r.time = 0.5;
  r.norms = {{"zeta", 1.0}, {"alpha", 2.0}};
  const auto cols = diagnostics_columns(r);
  const auto& fixed = diagnostics_fixed_columns();
  ASSERT_EQ(cols.size(), fixed.size() + 2);
  EXPECT_EQ(cols.front(), "time");
  EXPECT_EQ(cols[fixed.size()], "alpha");
  EXPECT_EQ(cols.back(), "zeta");
  EXPECT_EQ(diagnostics_values(r).size(), cols.size());

  std::ostringstream out;
  DiagnosticsCsvWriter w(out);
  w.write(r);
  w.write(r);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, 10), "time,mass,");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  DiagnosticsRecord other = r;
  other.norms["extra"] = 0.0;
  EXPECT_THROW(w.write(other), std::logic_error);
}

TEST(Reports, SummaryAndStudyTable) {
  Summary s;
  s.set("a", 1.5);
  s.set("ok", true);
  s.set("a", std::string("x"));
  std::ostringstream out;
  s.write(out);
  EXPECT_EQ(out.str(), "a = x\nok = yes\n");

  StudyTable t{"demo", {"n", "error"}, {{"64", "0.1"}, {"128", "0.05"}}};
  std::ostringstream txt, csv;
  t.write_text(txt);
  t.write_csv(csv);
  EXPECT_EQ(csv.str(), "n,error\n64,0.1\n128,0.05\n");
  EXPECT_EQ(txt.str(), "# demo\nn    error\n---  -----\n64   0.1  \n128  0.05 \n");
}
