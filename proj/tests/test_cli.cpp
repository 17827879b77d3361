#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rainbow/cli.hpp"
#include "rainbow/core.hpp"
#include "rainbow/experiment.hpp"
#include "rainbow/generators.hpp"

using namespace rainbow;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream file(path);
  file << content;
  return path;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("gen emits valid arrays for every family") {
  const CliRun cyc = cli({"gen", "--family", "cyclic", "--n", "5"});
  CHECK(cyc.code == 0);
  CHECK(validate_latin(parse_latin(cyc.out)).ok());

  const CliRun z = cli({"gen", "--family", "z2k", "--n", "6"});
  CHECK(z.code == 0);
  CHECK(parse_latin(z.out).k == 6);

  const CliRun rnd = cli({"gen", "--family", "random", "--n", "7", "--seed", "3",
                          "--mixing", "200", "--colours", "30"});
  CHECK(rnd.code == 0);
  const LatinArray parsed = parse_latin(rnd.out);
  CHECK(parsed.k == 30);
  CHECK(validate_latin(parsed).ok());
}

TEST_CASE("gen rejects odd z2k orders and unknown families") {
  CHECK(cli({"gen", "--family", "z2k", "--n", "5"}).code == 2);
  CHECK(cli({"gen", "--family", "nope", "--n", "5"}).code == 2);
}

TEST_CASE("count prints the exact transversal count") {
  const auto path = temp_file("cli_cyc3.txt", serialize_latin(cyclic_latin(3)));
  const CliRun run = cli({"count", path.string()});
  CHECK(run.code == 0);
  CHECK(run.out == "3\n");
}

TEST_CASE("solve --exact reports certified absence on Z4 with exit 1") {
  const auto path = temp_file("cli_z4.txt", serialize_latin(z2k_table(2)));
  const CliRun run = cli({"solve", path.string(), "--exact"});
  CHECK(run.code == 1);
  CHECK(run.out == "none (exact)\n");
}

TEST_CASE("solve finds and verify accepts a transversal end to end") {
  const auto array = split_colours(cyclic_latin(4), 16, 2);
  const auto apath = temp_file("cli_a4.txt", serialize_latin(array));
  const CliRun solved = cli({"solve", apath.string()});
  REQUIRE(solved.code == 0);
  CHECK(solved.out.find("RAINBOW-PERFECT: yes") != std::string::npos);

  const auto mpath = temp_file("cli_m4.txt", solved.out);
  const CliRun verified = cli({"verify", apath.string(), mpath.string()});
  CHECK(verified.code == 0);
  CHECK(verified.out == "RAINBOW-PERFECT: yes\n");

  // Tampered matching: swap the colour of the first record.
  RainbowMatching m = parse_matching(solved.out);
  m.edges[0].colour = (m.edges[0].colour + 1) % array.k;
  const auto bad = temp_file("cli_bad4.txt", serialize_matching(m, true));
  const CliRun rejected = cli({"verify", apath.string(), bad.string()});
  CHECK(rejected.code == 1);
  CHECK(rejected.out == "RAINBOW-PERFECT: no\n");
}

TEST_CASE("verify robust-pair certifies expansion of a dense core") {
  const auto array = split_colours(random_latin(12, 5, 600), 100, 6);
  const auto apath = temp_file("cli_rp_array.txt", serialize_latin(array));
  const auto ppath = temp_file("cli_rp_pair.json",
                               R"({"a":[0,1,2,3,4,5,6,7],"b":[0,1,2,3,4,5,6,7]})");
  const CliRun run =
      cli({"verify", "robust-pair", apath.string(), ppath.string(), "--seed", "4"});
  CHECK(run.code == 0);
  CHECK(run.out.find("expansion_a: holds") != std::string::npos);
  CHECK(run.out.find("min_degree:") != std::string::npos);
}

TEST_CASE("pipeline subcommand writes a stage log and a verified matching") {
  const auto array = split_colours(random_latin(24, 8, 1200), 510, 3);
  const auto apath = temp_file("cli_pipe.txt", serialize_latin(array));
  const auto lpath = std::filesystem::temp_directory_path() / "cli_pipe.log";
  const CliRun run =
      cli({"pipeline", apath.string(), "--seed", "7", "--log", lpath.string()});
  REQUIRE(run.code == 0);
  CHECK(run.out.find("RAINBOW-PERFECT: yes") != std::string::npos);
  const std::string log = slurp(lpath);
  CHECK(log.find("stage=one-edge-per-colour") != std::string::npos);
  CHECK(log.find("stage=assemble") != std::string::npos);
}

TEST_CASE("solve exit codes distinguish invalid input") {
  const auto bad = temp_file("cli_bad_array.txt", "2 2\n0 0\n1 0\n");
  CHECK(cli({"solve", bad.string()}).code == 2);
  CHECK(cli({"count", bad.string()}).code == 2);
  CHECK(cli({"solve", "/nonexistent/file.txt"}).code == 2);
}

TEST_CASE("experiment emits the fixed CSV schema and is reproducible") {
  const std::string spec = R"({
    "n_values": [6],
    "colour_fractions": [1.0, 0.6],
    "trials": 4,
    "master_seed": 99,
    "solver": "exact",
    "mixing_steps": 200,
    "timing": false
  })";
  const auto spath = temp_file("cli_exp.json", spec);
  const auto out1 = std::filesystem::temp_directory_path() / "cli_exp1.csv";
  const auto out2 = std::filesystem::temp_directory_path() / "cli_exp2.csv";
  const CliRun r1 = cli({"experiment", spath.string(), "--out", out1.string()});
  const CliRun r2 = cli({"experiment", spath.string(), "--out", out2.string()});
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  const std::string csv1 = slurp(out1);
  CHECK(csv1 == slurp(out2));  // byte-identical, timing disabled
  CHECK(csv1.rfind("n,d,k,seed,solver,success,size,stage_failed,wall_ms\n", 0) == 0);
  // 2 cells x 4 trials + header.
  CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 9);

  const std::string summary = slurp(out1.string() + ".summary.csv");
  CHECK(summary.rfind("n,d,trials,success_rate,mean_size,mean_wall_ms\n", 0) == 0);
}

TEST_CASE("experiment aggregates equal a recomputation from the raw rows") {
  ExperimentSpec spec;
  spec.n_values = {5, 6};
  spec.colour_fractions = {1.0, 0.8};
  spec.trials = 3;
  spec.master_seed = 7;
  spec.solver = ExperimentSpec::Solver::Auto;
  spec.mixing_steps = 150;
  spec.timing = false;
  const ExperimentResult result = run_experiment(spec);
  REQUIRE(result.rows.size() == 12);
  const auto recomputed = aggregate_rows(spec, result.rows);
  REQUIRE(recomputed.size() == result.aggregates.size());
  for (std::size_t i = 0; i < recomputed.size(); ++i) {
    CHECK(recomputed[i].success_rate == result.aggregates[i].success_rate);
    CHECK(recomputed[i].mean_size == result.aggregates[i].mean_size);
    CHECK(recomputed[i].trials == result.aggregates[i].trials);
  }
  // Every success row corresponds to a full-size matching.
  for (const TrialRow& row : result.rows) {
    if (row.success) CHECK(row.size == row.n);
  }
}

TEST_CASE("experiment results are independent of the worker count") {
  ExperimentSpec spec;
  spec.n_values = {6};
  spec.colour_fractions = {0.9};
  spec.trials = 6;
  spec.master_seed = 11;
  spec.solver = ExperimentSpec::Solver::Exact;
  spec.mixing_steps = 100;
  spec.timing = false;
  ExperimentSpec parallel = spec;
  parallel.workers = 4;
  CHECK(rows_to_csv(run_experiment(spec).rows) ==
        rows_to_csv(run_experiment(parallel).rows));
}

TEST_CASE("experiment spec validation") {
  CHECK_THROWS(parse_experiment_spec(R"({"n_values":[4],"colour_fractions":[0.1],"trials":2})"));
  CHECK_THROWS(parse_experiment_spec("not json"));
  CHECK_THROWS(parse_experiment_spec(R"({"n_values":[],"colour_fractions":[1.0],"trials":1})"));
}

TEST_CASE("json format mirrors the CSV fields") {
  ExperimentSpec spec;
  spec.n_values = {5};
  spec.colour_fractions = {1.0};
  spec.trials = 2;
  spec.solver = ExperimentSpec::Solver::Greedy;
  spec.mixing_steps = 100;
  spec.timing = false;
  const std::string json = result_to_json(run_experiment(spec));
  for (const char* field :
       {"\"n\"", "\"d\"", "\"k\"", "\"seed\"", "\"solver\"", "\"success\"", "\"size\"",
        "\"stage_failed\"", "\"wall_ms\"", "\"aggregates\"", "\"success_rate\""}) {
    CHECK(json.find(field) != std::string::npos);
  }
}
