#include "rainbow/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "rainbow/experiment.hpp"
#include "rainbow/generators.hpp"
#include "rainbow/oracle.hpp"
#include "rainbow/pipeline.hpp"
#include "rainbow/rng.hpp"
#include "rainbow/robust_pair.hpp"

namespace rainbow {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << content;
}

PipelineParams load_params(const std::string& path) {
  if (path.empty()) return {};
  return parse_pipeline_params(read_file(path));
}

struct GenArgs {
  std::string family = "cyclic";
  int n = 0;
  int colours = -1;
  std::uint64_t seed = 0;
  std::int64_t mixing = -1;
  std::string out_path;
};

int cmd_gen(const GenArgs& args, std::ostream& out) {
  GenSpec spec;
  spec.n = args.n;
  spec.seed = args.seed;
  spec.mixing_steps = args.mixing;
  spec.target_colours = args.colours;
  if (args.family == "cyclic") {
    spec.family = GenSpec::Family::Cyclic;
  } else if (args.family == "z2k") {
    spec.family = GenSpec::Family::Z2k;
  } else if (args.family == "random") {
    spec.family = GenSpec::Family::RandomLatin;
  } else {
    throw std::invalid_argument("unknown family: " + args.family);
  }
  const std::string text = serialize_latin(generate(spec));
  if (args.out_path.empty()) {
    out << text;
  } else {
    write_file(args.out_path, text);
  }
  return 0;
}

struct SolveArgs {
  std::string file;
  bool exact = false;
  bool pipeline = false;
  bool greedy = false;
  std::uint64_t seed = 0;
  std::string params_path;
};

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  const LatinArray array = parse_latin(read_file(args.file));
  ValidationReport valid = validate_latin(array);
  if (!valid.ok()) {
    err << "invalid Latin array: " << valid.violations.front().reason << '\n';
    return 2;
  }
  const PipelineParams params = load_params(args.params_path);
  const ColouredBipartiteGraph full = to_graph(array);

  if (args.exact) {
    auto found = find_transversal_exact(array);
    if (!found) {
      out << "none (exact)\n";
      return 1;
    }
    out << serialize_matching(*found, verify_rainbow_perfect(full, *found));
    return 0;
  }
  if (args.pipeline) {
    PipelineResult res = solve_pipeline(array, params, args.seed);
    if (!res.success) {
      out << "none (pipeline failed at stage " << res.failure->stage << ": "
          << res.failure->message << ")\n";
      return 1;
    }
    out << serialize_matching(res.matching, true);
    return 0;
  }
  if (args.greedy) {
    const ColouredBipartiteGraph g = one_edge_per_colour(full, mix_seed(args.seed, 1));
    RainbowMatching m = greedy_rainbow(g, mix_seed(args.seed, 2));
    const bool perfect = verify_rainbow_perfect(full, m);
    out << serialize_matching(m, perfect);
    return perfect ? 0 : 1;
  }

  AutoResult res = solve_auto(array, args.seed, params);
  if (res.matching) {
    out << serialize_matching(*res.matching, true);
    return 0;
  }
  out << (res.exact_none ? "none (exact)\n" : "none found\n");
  return 1;
}

int cmd_count(const std::string& file, std::ostream& out) {
  const LatinArray array = parse_latin(read_file(file));
  ValidationReport valid = validate_latin(array);
  if (!valid.ok()) throw std::invalid_argument("invalid Latin array");
  out << count_transversals(array) << '\n';
  return 0;
}

int cmd_verify(const std::vector<std::string>& files, std::uint64_t seed, std::ostream& out,
               std::ostream& err) {
  if (files.size() == 3 && files[0] == "robust-pair") {
    const LatinArray array = parse_latin(read_file(files[1]));
    const ColouredBipartiteGraph g1 = one_edge_per_colour(to_graph(array), seed);
    nlohmann::json pair_json = nlohmann::json::parse(read_file(files[2]));
    Subpair pair = make_subpair(pair_json.at("a").get<std::vector<int>>(),
                                pair_json.at("b").get<std::vector<int>>(), array.n, array.n);
    if (pair.a.empty() || pair.a.size() != pair.b.size()) {
      err << "pair must be nonempty and balanced\n";
      return 2;
    }
    RobustPair robust;
    robust.pair = pair;
    robust.expansion = {2.0, std::max(1, 2 * pair.size_a() / 3)};
    RobustPairCheck check = verify_robust_pair(g1, robust);
    out << "min_degree: " << check.min_degree << '\n';
    out << "expansion_factor: " << robust.expansion.factor << '\n';
    out << "expansion_cap: " << robust.expansion.cap << '\n';
    out << "expansion_a: " << (check.expansion_a.holds ? "holds" : "violated")
        << (check.expansion_a.exact ? " (exact)" : " (heuristic)") << '\n';
    out << "expansion_b: " << (check.expansion_b.holds ? "holds" : "violated")
        << (check.expansion_b.exact ? " (exact)" : " (heuristic)") << '\n';
    if (!check.expansion_a.holds) {
      out << "violator_a_size: " << check.expansion_a.violator.size() << '\n';
    }
    if (!check.expansion_b.holds) {
      out << "violator_b_size: " << check.expansion_b.violator.size() << '\n';
    }
    return check.expansion_a.holds && check.expansion_b.holds ? 0 : 1;
  }
  if (files.size() != 2) {
    err << "usage: verify FILE MATCHFILE | verify robust-pair FILE PAIRFILE\n";
    return 2;
  }
  const LatinArray array = parse_latin(read_file(files[0]));
  const RainbowMatching m = parse_matching(read_file(files[1]));
  const bool ok = verify_rainbow_perfect(to_graph(array), m);
  out << "RAINBOW-PERFECT: " << (ok ? "yes" : "no") << '\n';
  return ok ? 0 : 1;
}

struct PipelineArgs {
  std::string file;
  std::string params_path;
  std::uint64_t seed = 0;
  std::string log_path;
};

int cmd_pipeline(const PipelineArgs& args, std::ostream& out, std::ostream& err) {
  const LatinArray array = parse_latin(read_file(args.file));
  const PipelineParams params = load_params(args.params_path);
  PipelineResult res = solve_pipeline(array, params, args.seed);

  std::ostringstream log;
  for (const StageRecord& record : res.trace) log << format_stage(record) << '\n';
  if (args.log_path.empty()) {
    err << log.str();
  } else {
    write_file(args.log_path, log.str());
  }

  if (!res.success) {
    out << "FAILURE stage=" << res.failure->stage << " message=\"" << res.failure->message
        << "\"";
    if (!res.failure->inequality.empty()) {
      out << " inequality=\"" << res.failure->inequality << "\" slack=" << res.failure->slack;
    }
    out << '\n';
    return 1;
  }
  out << serialize_matching(res.matching, true);
  return 0;
}

struct ExperimentArgs {
  std::string spec_path;
  std::string out_path;
  std::string format;
  int workers = 0;
  bool no_timing = false;
};

int cmd_experiment(const ExperimentArgs& args, std::ostream& out, std::ostream& err) {
  ExperimentSpec spec = parse_experiment_spec(read_file(args.spec_path));
  if (!args.out_path.empty()) spec.output_path = args.out_path;
  if (!args.format.empty()) {
    if (args.format == "csv") {
      spec.format = ExperimentSpec::Format::Csv;
    } else if (args.format == "json") {
      spec.format = ExperimentSpec::Format::Json;
    } else {
      throw std::invalid_argument("unknown format: " + args.format);
    }
  }
  if (args.workers > 0) spec.workers = args.workers;
  if (args.no_timing) spec.timing = false;

  ExperimentResult result = run_experiment(spec);
  if (spec.format == ExperimentSpec::Format::Json) {
    const std::string text = result_to_json(result);
    if (spec.output_path.empty()) {
      out << text;
    } else {
      write_file(spec.output_path, text);
    }
  } else {
    const std::string rows = rows_to_csv(result.rows);
    const std::string aggregates = aggregates_to_csv(result.aggregates);
    if (spec.output_path.empty()) {
      out << rows;
      err << aggregates;  // side channel, never interleaved with the table
    } else {
      write_file(spec.output_path, rows);
      write_file(spec.output_path + ".summary.csv", aggregates);
    }
  }
  err << "trials: " << result.rows.size() << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rainbow perfect matchings in properly edge-coloured complete bipartite graphs"};
  app.require_subcommand(1);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "generate a Latin array");
  gen->add_option("--family", gen_args.family, "cyclic|z2k|random")->required();
  gen->add_option("--n", gen_args.n, "order")->required();
  gen->add_option("--colours", gen_args.colours, "split to this many colours");
  gen->add_option("--seed", gen_args.seed, "seed");
  gen->add_option("--mixing", gen_args.mixing, "mixing steps (default n^3)");
  gen->add_option("--out", gen_args.out_path, "output file (default stdout)");

  std::string count_file;
  auto* count = app.add_subcommand("count", "count transversals exactly");
  count->add_option("file", count_file, "Latin array file")->required();

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "find a transversal");
  solve->add_option("file", solve_args.file, "Latin array file")->required();
  solve->add_flag("--exact", solve_args.exact, "exact backtracking solver");
  solve->add_flag("--pipeline", solve_args.pipeline, "constructive pipeline solver");
  solve->add_flag("--greedy", solve_args.greedy, "greedy baseline");
  solve->add_option("--seed", solve_args.seed, "seed");
  solve->add_option("--params", solve_args.params_path, "pipeline params file");

  std::vector<std::string> verify_files;
  std::uint64_t verify_seed = 0;
  auto* verify = app.add_subcommand("verify", "verify a matching or a robust pair");
  verify->add_option("files", verify_files, "FILE MATCHFILE | robust-pair FILE PAIRFILE")
      ->expected(2, 3);
  verify->add_option("--seed", verify_seed, "one-edge-per-colour seed (robust-pair mode)");

  PipelineArgs pipeline_args;
  auto* pipeline = app.add_subcommand("pipeline", "stage-logged pipeline run");
  pipeline->add_option("file", pipeline_args.file, "Latin array file")->required();
  pipeline->add_option("--params", pipeline_args.params_path, "params file");
  pipeline->add_option("--seed", pipeline_args.seed, "seed");
  pipeline->add_option("--log", pipeline_args.log_path, "stage log file (default stderr)");

  ExperimentArgs experiment_args;
  auto* experiment = app.add_subcommand("experiment", "run a seeded sweep");
  experiment->add_option("spec", experiment_args.spec_path, "experiment spec (JSON)")->required();
  experiment->add_option("--out", experiment_args.out_path, "output path");
  experiment->add_option("--format", experiment_args.format, "csv|json");
  experiment->add_option("--workers", experiment_args.workers, "worker threads");
  experiment->add_flag("--no-timing", experiment_args.no_timing,
                       "write wall_ms = 0 for byte-reproducible output");

  std::vector<const char*> argv;
  argv.push_back("rainbow");
  for (const std::string& arg : args) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << e.what() << '\n';
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args, out);
    if (count->parsed()) return cmd_count(count_file, out);
    if (solve->parsed()) return cmd_solve(solve_args, out, err);
    if (verify->parsed()) return cmd_verify(verify_files, verify_seed, out, err);
    if (pipeline->parsed()) return cmd_pipeline(pipeline_args, out, err);
    if (experiment->parsed()) return cmd_experiment(experiment_args, out, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::logic_error& e) {
    err << "internal assertion: " << e.what() << '\n';
    return 3;
  }
  err << "no subcommand\n";
  return 2;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace rainbow
