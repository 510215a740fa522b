#pragma once

// Pipeline commands behind the CLI subcommands. Each run_* function is a pure
// function of (files, config, seed): it reads the configured inputs, writes
// the configured outputs, and logs a short human-readable summary. Input and
// format problems surface as ParseError or std::invalid_argument (exit code
// 2 at the CLI); anything else is a runtime failure (exit code 1).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tdtn {

struct RunConfig {
  // I/O
  std::string input;
  std::string output;
  std::string format = "contact";  // contact | session
  std::string roster_input;        // optional node roster, one label per line
  std::string table_output;        // ingest: inter-contact table
  std::string samples_output;      // ingest: per-sample dump
  std::string verdicts_output;     // fit: per-pair verdict records
  std::string summary_output;      // fit: structured summary (JSON)
  std::string rates_output;        // fit: lambda matrix triples
  std::string rates_input;         // analyze/simulate: explicit lambda matrix
  std::string details_output;      // simulate: per-bundle records

  // Trace processing; defaults follow the standard thresholds.
  double pingpong_seconds = 1800.0;
  std::string pingpong_mode = "drop";           // drop | merge
  std::string gap_convention = "end_to_start";  // end_to_start | start_to_start
  double max_mean_seconds = 604800.0;           // one week
  int min_contacts = 20;

  // Fitting
  double significance = 0.05;
  double critical_value = 0.0;  // 0 = derive from significance (fitted case)
  bool eligible_only_rates = false;

  // Synthesis
  double alpha = 2.26;
  double b = 113766.9;
  double const_lambda = 0.0;  // > 0 selects the constant-rate source
  int nodes = 200;
  double horizon_seconds = 0.0;
  double contact_duration = 0.0;

  // Simulation / analytics
  std::uint64_t seed = 0;
  std::vector<std::string> strategies;
  std::string queries;     // "s:d,s:d,..."
  int random_queries = 0;  // drawn with the run seed when queries is empty
  bool replay_filtered = false;
  // Honesty mode: estimate rates from only this leading fraction of the
  // horizon and create bundles at the split point (0 = rates from the full
  // trace, bundles at the trace start).
  double rates_prefix_fraction = 0.0;
};

void run_ingest(const RunConfig& config, std::ostream& log);
void run_fit(const RunConfig& config, std::ostream& log);
void run_analyze(const RunConfig& config, std::ostream& log);
void run_synth(const RunConfig& config, std::ostream& log);
void run_simulate(const RunConfig& config, std::ostream& log);

}  // namespace tdtn
