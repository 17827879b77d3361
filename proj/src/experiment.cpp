#include "rainbow/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "rainbow/generators.hpp"
#include "rainbow/oracle.hpp"
#include "rainbow/rng.hpp"

namespace rainbow {

namespace {

const char* solver_name(ExperimentSpec::Solver solver) {
  switch (solver) {
    case ExperimentSpec::Solver::Auto:
      return "auto";
    case ExperimentSpec::Solver::Pipeline:
      return "pipeline";
    case ExperimentSpec::Solver::Exact:
      return "exact";
    case ExperimentSpec::Solver::Greedy:
      return "greedy";
  }
  return "auto";
}

ExperimentSpec::Solver solver_from_name(const std::string& name) {
  if (name == "auto") return ExperimentSpec::Solver::Auto;
  if (name == "pipeline") return ExperimentSpec::Solver::Pipeline;
  if (name == "exact") return ExperimentSpec::Solver::Exact;
  if (name == "greedy") return ExperimentSpec::Solver::Greedy;
  throw std::invalid_argument("unknown solver: " + name);
}

std::string format_double(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

}  // namespace

void ExperimentSpec::validate() const {
  if (n_values.empty()) throw std::invalid_argument("n_values must be nonempty");
  if (colour_fractions.empty()) throw std::invalid_argument("colour_fractions must be nonempty");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  for (int n : n_values) {
    if (n < 1) throw std::invalid_argument("orders must be positive");
  }
  for (double d : colour_fractions) {
    if (!(d > 0.0 && d <= 1.0)) throw std::invalid_argument("colour fractions must be in (0,1]");
  }
  for (int n : n_values) {
    for (double d : colour_fractions) {
      const std::int64_t k =
          static_cast<std::int64_t>(std::ceil(d * static_cast<double>(n) * n));
      if (k < n) {
        throw std::invalid_argument("cell n=" + std::to_string(n) +
                                    " d=" + format_double(d) + " yields k < n");
      }
    }
  }
}

ExperimentSpec parse_experiment_spec(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed experiment spec: ") + e.what());
  }
  ExperimentSpec spec;
  spec.n_values = j.at("n_values").get<std::vector<int>>();
  spec.colour_fractions = j.at("colour_fractions").get<std::vector<double>>();
  spec.trials = j.at("trials").get<int>();
  spec.master_seed = j.value("master_seed", 0ULL);
  spec.solver = solver_from_name(j.value("solver", "auto"));
  spec.output_path = j.value("output_path", "");
  const std::string format = j.value("format", "csv");
  if (format == "csv") {
    spec.format = ExperimentSpec::Format::Csv;
  } else if (format == "json") {
    spec.format = ExperimentSpec::Format::Json;
  } else {
    throw std::invalid_argument("unknown format: " + format);
  }
  spec.workers = j.value("workers", 1);
  spec.timing = j.value("timing", true);
  spec.mixing_steps = j.value("mixing_steps", -1LL);
  spec.validate();
  return spec;
}

std::uint64_t trial_seed(std::uint64_t master, int n, int d_index, int trial) {
  return mix_seed(mix_seed(mix_seed(master, static_cast<std::uint64_t>(n)),
                           static_cast<std::uint64_t>(d_index)),
                  static_cast<std::uint64_t>(trial));
}

namespace {

TrialRow run_trial(const ExperimentSpec& spec, int n, int d_index, int trial) {
  const double d = spec.colour_fractions[d_index];
  const int k = std::min(static_cast<std::int64_t>(n) * n,
                         static_cast<std::int64_t>(std::ceil(d * static_cast<double>(n) * n)));
  TrialRow row;
  row.n = n;
  row.d = d;
  row.k = k;
  row.seed = trial_seed(spec.master_seed, n, d_index, trial);
  row.solver = solver_name(spec.solver);

  const std::int64_t mixing =
      spec.mixing_steps >= 0 ? spec.mixing_steps : static_cast<std::int64_t>(n) * n * n;
  LatinArray base = random_latin(n, mix_seed(row.seed, 1), mixing);
  LatinArray array = k > base.k ? split_colours(base, k, mix_seed(row.seed, 2)) : base;

  const auto start = std::chrono::steady_clock::now();
  switch (spec.solver) {
    case ExperimentSpec::Solver::Auto: {
      AutoResult res = solve_auto(array, row.seed, spec.params);
      row.success = res.matching.has_value();
      row.size = row.success ? res.matching->size() : 0;
      if (!row.success) row.stage_failed = res.exact_none ? "exact-none" : "none";
      break;
    }
    case ExperimentSpec::Solver::Pipeline: {
      PipelineResult res = solve_pipeline(array, spec.params, row.seed);
      row.success = res.success;
      row.size = res.success ? res.matching.size() : 0;
      if (!res.success && res.failure) row.stage_failed = res.failure->stage;
      break;
    }
    case ExperimentSpec::Solver::Exact: {
      auto found = find_transversal_exact(array);
      row.success = found.has_value();
      row.size = found ? found->size() : 0;
      if (!row.success) row.stage_failed = "exact-none";
      break;
    }
    case ExperimentSpec::Solver::Greedy: {
      const ColouredBipartiteGraph full = to_graph(array);
      const ColouredBipartiteGraph g = one_edge_per_colour(full, mix_seed(row.seed, 1));
      RainbowMatching m = greedy_rainbow(g, mix_seed(row.seed, 2));
      row.size = m.size();
      row.success = m.size() == n && verify_rainbow_perfect(full, m);
      if (!row.success) row.stage_failed = "greedy-maximal";
      break;
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  row.wall_ms =
      spec.timing
          ? std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count()
          : 0;
  return row;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  struct Job {
    int n, d_index, trial;
  };
  std::vector<Job> jobs;
  for (int n : spec.n_values) {
    for (int di = 0; di < static_cast<int>(spec.colour_fractions.size()); ++di) {
      for (int t = 0; t < spec.trials; ++t) jobs.push_back({n, di, t});
    }
  }

  ExperimentResult result;
  result.rows.resize(jobs.size());
  const int workers = std::max(1, std::min<int>(spec.workers, static_cast<int>(jobs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      result.rows[i] = run_trial(spec, jobs[i].n, jobs[i].d_index, jobs[i].trial);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= jobs.size()) return;
          result.rows[i] = run_trial(spec, jobs[i].n, jobs[i].d_index, jobs[i].trial);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  result.aggregates = aggregate_rows(spec, result.rows);
  return result;
}

std::vector<CellAggregate> aggregate_rows(const ExperimentSpec& spec,
                                          const std::vector<TrialRow>& rows) {
  std::vector<CellAggregate> aggregates;
  for (int n : spec.n_values) {
    for (double d : spec.colour_fractions) {
      CellAggregate cell;
      cell.n = n;
      cell.d = d;
      double sizes = 0.0, wall = 0.0;
      int success = 0;
      for (const TrialRow& row : rows) {
        if (row.n != n || row.d != d) continue;
        ++cell.trials;
        sizes += row.size;
        wall += static_cast<double>(row.wall_ms);
        if (row.success) ++success;
      }
      if (cell.trials > 0) {
        cell.success_rate = static_cast<double>(success) / cell.trials;
        cell.mean_size = sizes / cell.trials;
        cell.mean_wall_ms = wall / cell.trials;
      }
      aggregates.push_back(cell);
    }
  }
  return aggregates;
}

std::string rows_to_csv(const std::vector<TrialRow>& rows) {
  std::ostringstream out;
  out << "n,d,k,seed,solver,success,size,stage_failed,wall_ms\n";
  for (const TrialRow& row : rows) {
    out << row.n << ',' << format_double(row.d) << ',' << row.k << ',' << row.seed << ','
        << row.solver << ',' << (row.success ? 1 : 0) << ',' << row.size << ','
        << row.stage_failed << ',' << row.wall_ms << '\n';
  }
  return out.str();
}

std::string aggregates_to_csv(const std::vector<CellAggregate>& aggregates) {
  std::ostringstream out;
  out << "n,d,trials,success_rate,mean_size,mean_wall_ms\n";
  for (const CellAggregate& cell : aggregates) {
    out << cell.n << ',' << format_double(cell.d) << ',' << cell.trials << ','
        << format_double(cell.success_rate) << ',' << format_double(cell.mean_size) << ','
        << format_double(cell.mean_wall_ms) << '\n';
  }
  return out.str();
}

std::string result_to_json(const ExperimentResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const TrialRow& row : result.rows) {
    rows.push_back({{"n", row.n},
                    {"d", row.d},
                    {"k", row.k},
                    {"seed", row.seed},
                    {"solver", row.solver},
                    {"success", row.success},
                    {"size", row.size},
                    {"stage_failed", row.stage_failed},
                    {"wall_ms", row.wall_ms}});
  }
  nlohmann::json aggregates = nlohmann::json::array();
  for (const CellAggregate& cell : result.aggregates) {
    aggregates.push_back({{"n", cell.n},
                          {"d", cell.d},
                          {"trials", cell.trials},
                          {"success_rate", cell.success_rate},
                          {"mean_size", cell.mean_size},
                          {"mean_wall_ms", cell.mean_wall_ms}});
  }
  return nlohmann::json{{"rows", rows}, {"aggregates", aggregates}}.dump(2) + "\n";
}

}  // namespace rainbow
