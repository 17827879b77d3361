#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rainbow/pipeline.hpp"

namespace rainbow {

// Sweep description: every (n, d) cell gets `trials` seeded instances.
struct ExperimentSpec {
  std::vector<int> n_values;
  std::vector<double> colour_fractions;  // d values; k = ceil(d * n^2)
  int trials = 1;
  std::uint64_t master_seed = 0;
  enum class Solver { Auto, Pipeline, Exact, Greedy } solver = Solver::Auto;
  std::string output_path;
  enum class Format { Csv, Json } format = Format::Csv;
  int workers = 1;
  bool timing = true;          // false writes wall_ms = 0 (reproducible bytes)
  std::int64_t mixing_steps = -1;  // -1: generator default n^3
  PipelineParams params{};

  void validate() const;  // throws std::invalid_argument
};

ExperimentSpec parse_experiment_spec(std::string_view json_text);

struct TrialRow {
  int n = 0;
  double d = 0.0;
  int k = 0;
  std::uint64_t seed = 0;
  std::string solver;
  bool success = false;
  int size = 0;
  std::string stage_failed;
  long long wall_ms = 0;
};

struct CellAggregate {
  int n = 0;
  double d = 0.0;
  int trials = 0;
  double success_rate = 0.0;
  double mean_size = 0.0;
  double mean_wall_ms = 0.0;
};

struct ExperimentResult {
  std::vector<TrialRow> rows;        // ordered by (n, d, trial)
  std::vector<CellAggregate> aggregates;
};

// Documented, stable per-trial seed derivation.
std::uint64_t trial_seed(std::uint64_t master, int n, int d_index, int trial);

// Runs the sweep on a bounded worker pool; results are independent of the
// worker count.
ExperimentResult run_experiment(const ExperimentSpec& spec);

std::vector<CellAggregate> aggregate_rows(const ExperimentSpec& spec,
                                          const std::vector<TrialRow>& rows);

// CSV header: n,d,k,seed,solver,success,size,stage_failed,wall_ms
std::string rows_to_csv(const std::vector<TrialRow>& rows);
std::string aggregates_to_csv(const std::vector<CellAggregate>& aggregates);
std::string result_to_json(const ExperimentResult& result);

}  // namespace rainbow
