// Command-line front-end: ingest/derive traces, fit inter-contact
// distributions, compute analytic delays, generate synthetic networks, and
// replay routing strategies.

#include <CLI11.hpp>
#include <iostream>

#include "tdtn/commands.hpp"
#include "tdtn/trace.hpp"

namespace {

void add_trace_flags(CLI::App* cmd, tdtn::RunConfig& config) {
  cmd->add_option("--pingpong-seconds", config.pingpong_seconds,
                  "drop inter-contact samples below this gap");
  cmd->add_option("--pingpong-mode", config.pingpong_mode, "drop | merge");
  cmd->add_option("--gap-convention", config.gap_convention, "end_to_start | start_to_start");
}

void add_query_flags(CLI::App* cmd, tdtn::RunConfig& config) {
  cmd->add_option("--queries", config.queries, "explicit queries s:d,s:d,...");
  cmd->add_option("--random-queries", config.random_queries,
                  "number of random source-destination pairs (uses --seed)");
  cmd->add_option("--seed", config.seed, "run seed");
  cmd->add_option("--strategies", config.strategies)->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporal DTN toolkit: inter-contact modelling, routing analytics, replay"};
  app.require_subcommand(1);

  tdtn::RunConfig config;

  CLI::App* ingest = app.add_subcommand("ingest", "canonicalize a contact or session CSV");
  ingest->add_option("--input", config.input)->required();
  ingest->add_option("--output", config.output, "canonical contact CSV");
  ingest->add_option("--format", config.format, "contact | session");
  ingest->add_option("--roster", config.roster_input, "node roster, one label per line");
  ingest->add_option("--table", config.table_output, "inter-contact table CSV");
  ingest->add_option("--samples", config.samples_output, "per-sample dump CSV");
  ingest->add_option("--gap-convention", config.gap_convention);

  CLI::App* fit = app.add_subcommand("fit", "classify pairs and fit rate distributions");
  fit->add_option("--input", config.input)->required();
  fit->add_option("--format", config.format);
  fit->add_option("--roster", config.roster_input);
  add_trace_flags(fit, config);
  fit->add_option("--max-mean-seconds", config.max_mean_seconds);
  fit->add_option("--min-contacts", config.min_contacts);
  fit->add_option("--significance", config.significance);
  fit->add_option("--critical-value", config.critical_value,
                  "explicit omega^2 acceptance threshold (overrides --significance)");
  fit->add_option("--verdicts", config.verdicts_output, "per-pair verdict CSV");
  fit->add_option("--summary", config.summary_output, "JSON summary record");
  fit->add_option("--rates", config.rates_output, "lambda matrix triples CSV");
  fit->add_flag("--eligible-only", config.eligible_only_rates,
                "restrict the rates output to eligible pairs");

  CLI::App* analyze = app.add_subcommand("analyze", "closed-form expected delays per query");
  analyze->add_option("--rates", config.rates_input)->required();
  analyze->add_option("--output", config.output, "result CSV (default: stdout)");
  add_query_flags(analyze, config);

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic exponential t-DTN trace");
  synth->add_option("--output", config.output)->required();
  synth->add_option("--nodes", config.nodes);
  synth->add_option("--horizon-seconds", config.horizon_seconds)->required();
  synth->add_option("--seed", config.seed);
  synth->add_option("--alpha", config.alpha, "gamma shape for rate sampling");
  synth->add_option("--b", config.b, "gamma rate-scale for rate sampling");
  synth->add_option("--lambda", config.const_lambda, "constant rate for every pair");
  synth->add_option("--rates", config.rates_input, "explicit lambda matrix");
  synth->add_option("--contact-duration", config.contact_duration);

  CLI::App* simulate = app.add_subcommand("simulate", "replay routing strategies over a trace");
  simulate->add_option("--input", config.input)->required();
  simulate->add_option("--format", config.format);
  simulate->add_option("--roster", config.roster_input);
  simulate->add_option("--rates", config.rates_input,
                       "lambda matrix (default: prior pass over the filtered trace)");
  simulate->add_option("--rates-prefix-fraction", config.rates_prefix_fraction,
                       "estimate rates on this leading horizon fraction only and "
                       "create bundles at the split");
  add_trace_flags(simulate, config);
  simulate->add_flag("--replay-filtered", config.replay_filtered,
                     "replay the merged trace instead of the original contacts");
  simulate->add_option("--output", config.output, "summary table CSV");
  simulate->add_option("--details", config.details_output, "per-bundle CSV");
  add_query_flags(simulate, config);

  // Flat key=value config files per subcommand; explicit flags win.
  for (CLI::App* sub : {ingest, fit, analyze, synth, simulate}) sub->set_config("--config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) tdtn::run_ingest(config, std::cout);
    if (*fit) tdtn::run_fit(config, std::cout);
    if (*analyze) tdtn::run_analyze(config, std::cout);
    if (*synth) tdtn::run_synth(config, std::cout);
    if (*simulate) tdtn::run_simulate(config, std::cout);
  } catch (const tdtn::ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
