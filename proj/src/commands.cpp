#include "tdtn/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tdtn/rate_model.hpp"
#include "tdtn/replay.hpp"
#include "tdtn/rng.hpp"
#include "tdtn/stat_fit.hpp"
#include "tdtn/synth.hpp"
#include "tdtn/trace.hpp"

namespace tdtn {

namespace {

constexpr std::uint64_t kQueryDomain = 0x51c4a3b2d1e0f897ULL;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

GapConvention parse_convention(const RunConfig& config) {
  if (config.gap_convention == "end_to_start") return GapConvention::end_to_start;
  if (config.gap_convention == "start_to_start") return GapConvention::start_to_start;
  throw std::invalid_argument("unknown gap convention '" + config.gap_convention + "'");
}

std::optional<std::vector<std::string>> load_roster(const RunConfig& config) {
  if (config.roster_input.empty()) return std::nullopt;
  std::ifstream in(config.roster_input);
  if (!in) throw std::runtime_error("cannot open '" + config.roster_input + "'");
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() != '#') labels.push_back(line);
  }
  return labels;
}

ContactTrace load_input_trace(const RunConfig& config) {
  if (config.input.empty()) throw std::invalid_argument("missing --input");
  const auto roster = load_roster(config);
  const auto* roster_ptr = roster ? &*roster : nullptr;
  if (config.format == "contact") return load_contact_trace(config.input, roster_ptr);
  if (config.format == "session") return load_session_trace(config.input, roster_ptr);
  throw std::invalid_argument("unknown format '" + config.format + "'");
}

// Deterministic chunked parallel map: results land by index, so the output
// never depends on the worker count.
template <typename Body>
void parallel_for(std::size_t count, const Body& body) {
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()), 16u);
  if (workers <= 1 || count < 64) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        body(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

// Filtered inter-contact table per the configured ping-pong mode.
InterContactTable filtered_table(const ContactTrace& trace, const RunConfig& config) {
  const GapConvention convention = parse_convention(config);
  if (config.pingpong_mode == "drop")
    return filter_ping_pong(extract_intercontacts(trace, convention), config.pingpong_seconds);
  if (config.pingpong_mode == "merge")
    return extract_intercontacts(
        merge_short_contacts(trace, config.pingpong_seconds, convention), convention);
  throw std::invalid_argument("unknown ping-pong mode '" + config.pingpong_mode + "'");
}

NodeId resolve_node(const std::vector<std::string>& labels, const std::string& label) {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw std::invalid_argument("unknown node '" + label + "'");
  return static_cast<NodeId>(it - labels.begin());
}

std::vector<DelayQuery> make_queries(const RunConfig& config,
                                     const std::vector<std::string>& labels) {
  std::vector<DelayQuery> queries;
  if (!config.queries.empty()) {
    std::stringstream ss(config.queries);
    std::string pair_token;
    while (std::getline(ss, pair_token, ',')) {
      const auto colon = pair_token.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("query '" + pair_token + "' is not s:d");
      DelayQuery q;
      q.s = resolve_node(labels, pair_token.substr(0, colon));
      q.d = resolve_node(labels, pair_token.substr(colon + 1));
      if (q.s == q.d) throw std::invalid_argument("query source equals destination");
      queries.push_back(q);
    }
    return queries;
  }
  const int count = config.random_queries;
  if (count <= 0) throw std::invalid_argument("need --queries or --random-queries");
  const int n = static_cast<int>(labels.size());
  if (n < 2) throw std::invalid_argument("need at least 2 nodes for random queries");
  Rng rng(splitmix64(config.seed ^ kQueryDomain));
  for (int i = 0; i < count; ++i) {
    DelayQuery q;
    q.s = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n)));
    q.d = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n - 1)));
    if (q.d >= q.s) ++q.d;
    queries.push_back(q);
  }
  return queries;
}

std::string format_node_list(const std::vector<NodeId>& path,
                             const std::vector<std::string>& labels, char separator) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += separator;
    out += labels[static_cast<std::size_t>(path[i])];
  }
  return out;
}

}  // namespace

void run_ingest(const RunConfig& config, std::ostream& log) {
  const ContactTrace trace = load_input_trace(config);
  if (!config.output.empty()) {
    auto out = open_output(config.output);
    write_contact_csv(out, trace);
  }
  const GapConvention convention = parse_convention(config);
  if (!config.table_output.empty() || !config.samples_output.empty()) {
    const InterContactTable table = extract_intercontacts(trace, convention);
    if (!config.table_output.empty()) {
      auto out = open_output(config.table_output);
      write_intercontact_table(out, table);
    }
    if (!config.samples_output.empty()) {
      auto out = open_output(config.samples_output);
      write_intercontact_samples(out, table);
    }
  }
  log << "ingested " << trace.events.size() << " contacts among " << trace.node_count()
      << " nodes over [" << trace.t_begin << ", " << trace.t_end << "] s\n";
}

void run_fit(const RunConfig& config, std::ostream& log) {
  const ContactTrace trace = load_input_trace(config);
  const InterContactTable table = filtered_table(trace, config);
  const auto eligible = eligible_pairs(table, config.max_mean_seconds, config.min_contacts);

  ClassifyOptions options;
  options.critical_value = config.critical_value > 0.0
                               ? config.critical_value
                               : csvm_critical_value(config.significance,
                                                     CsvmCase::exponential_fitted);
  options.min_samples = config.min_contacts;

  // Per-pair classification is independent pair to pair; run it across
  // threads, results keyed by index so the report order is fixed.
  std::vector<std::pair<const PairKey*, const PairSamples*>> work;
  work.reserve(table.pairs.size());
  for (const auto& [key, ps] : table.pairs) work.emplace_back(&key, &ps);
  std::vector<FitVerdict> verdicts(work.size());
  parallel_for(work.size(), [&](std::size_t i) {
    const PairKey& key = *work[i].first;
    const PairSamples& ps = *work[i].second;
    if (eligible.count(key)) {
      verdicts[i] = classify_pair(key, ps.samples, options);
      return;
    }
    FitVerdict verdict;
    verdict.pair = key;
    verdict.sample_count = static_cast<int>(ps.samples.size());
    verdict.classification = PairClass::insufficient_data;
    verdict.lambda = ps.has_mean() ? 1.0 / ps.mean() : std::numeric_limits<double>::quiet_NaN();
    verdict.omega2_exponential = std::numeric_limits<double>::quiet_NaN();
    verdict.omega2_powerlaw = std::numeric_limits<double>::quiet_NaN();
    verdicts[i] = verdict;
  });
  std::map<PairClass, int> counts;
  std::vector<double> exponential_lambdas;
  for (const FitVerdict& verdict : verdicts) {
    ++counts[verdict.classification];
    if (verdict.classification == PairClass::exponential ||
        verdict.classification == PairClass::both)
      exponential_lambdas.push_back(verdict.lambda);
  }

  if (!config.verdicts_output.empty()) {
    auto out = open_output(config.verdicts_output);
    write_verdicts(out, verdicts, table.labels);
  }

  std::optional<GammaFit> gamma;
  if (exponential_lambdas.size() >= 2) {
    try {
      gamma = fit_gamma_rates(exponential_lambdas);
    } catch (const std::exception&) {
    }
  }

  std::set<PairKey> sampled;
  for (const auto& [key, ps] : table.pairs)
    if (!ps.samples.empty()) sampled.insert(key);
  std::optional<PowerLawFit> tail_fit;
  PowerLawFitOptions tail_options;
  if (!sampled.empty()) {
    try {
      tail_fit = fit_powerlaw_tail(aggregate_tail(table, sampled), tail_options);
    } catch (const std::exception&) {
    }
  }

  if (!config.rates_output.empty()) {
    const RateMatrix rates = config.eligible_only_rates ? rates_from_table(table, eligible)
                                                        : rates_from_table(table);
    auto out = open_output(config.rates_output);
    write_rate_matrix(out, rates, table.labels);
  }

  nlohmann::json summary;
  summary["pairs_total"] = table.pairs.size();
  summary["pairs_eligible"] = eligible.size();
  summary["significance"] = config.significance;
  summary["critical_value"] = options.critical_value;
  summary["pingpong_seconds"] = config.pingpong_seconds;
  summary["max_mean_seconds"] = config.max_mean_seconds;
  summary["min_contacts"] = config.min_contacts;
  nlohmann::json counts_json;
  for (const PairClass c : {PairClass::exponential, PairClass::power_law, PairClass::both,
                            PairClass::neither, PairClass::insufficient_data})
    counts_json[to_string(c)] = counts.count(c) ? counts[c] : 0;
  summary["counts"] = counts_json;
  if (gamma) {
    summary["gamma"] = {{"alpha", gamma->alpha}, {"b", gamma->b},
                        {"lambda_count", exponential_lambdas.size()}};
  } else {
    summary["gamma"] = nullptr;
  }
  if (tail_fit) {
    summary["powerlaw_tail"] = {{"c", tail_fit->c},
                                {"delta", tail_fit->delta},
                                {"trim_low", tail_options.trim_low},
                                {"trim_high", tail_options.trim_high}};
  } else {
    summary["powerlaw_tail"] = nullptr;
  }
  if (!config.summary_output.empty()) {
    auto out = open_output(config.summary_output);
    out << summary.dump(2) << '\n';
  }

  const double denom = std::max<std::size_t>(eligible.size(), 1);
  log << "pairs: " << table.pairs.size() << " total, " << eligible.size() << " eligible\n";
  for (const PairClass c :
       {PairClass::exponential, PairClass::power_law, PairClass::both, PairClass::neither}) {
    const int count = counts.count(c) ? counts[c] : 0;
    char line[128];
    std::snprintf(line, sizeof(line), "%s: %d (%.1f%% of eligible)\n", to_string(c), count,
                  100.0 * count / denom);
    log << line;
  }
  if (gamma) log << "gamma over exponential-classified rates: alpha=" << gamma->alpha
                 << " b=" << gamma->b << '\n';
  if (tail_fit) log << "aggregate tail power law: c=" << tail_fit->c
                    << " delta=" << tail_fit->delta << '\n';
}

void run_analyze(const RunConfig& config, std::ostream& log) {
  if (config.rates_input.empty()) throw std::invalid_argument("missing --rates");
  const LoadedRates loaded = load_rate_matrix(config.rates_input);
  const std::vector<DelayQuery> queries = make_queries(config, loaded.labels);

  std::vector<std::string> strategies = config.strategies;
  if (strategies.empty()) strategies = {"wait", "med", "one_sw", "one_sw_star"};

  std::ostream* out = &log;
  std::ofstream file;
  if (!config.output.empty()) {
    file = open_output(config.output);
    out = &file;
  }
  *out << "s,d,strategy,expected_delay_seconds,path_or_relayset\n";
  for (const DelayQuery& q : queries) {
    for (const std::string& token : strategies) {
      double delay = 0.0;
      std::string route;
      if (token == "wait") {
        delay = wait_delay(loaded.matrix, q);
        if (std::isfinite(delay))
          route = format_node_list({q.s, q.d}, loaded.labels, '>');
      } else if (token == "med") {
        const PathDelay pd = med_path(loaded.matrix, q);
        delay = pd.expected_delay;
        route = format_node_list(pd.path, loaded.labels, '>');
      } else if (token == "one_sw") {
        delay = one_sw_delay(loaded.matrix, q).expected_delay;
      } else if (token == "one_sw_modified") {
        delay = analytic_strategy_delay(StrategyKind::one_sw_modified, loaded.matrix, q);
      } else if (token == "one_sw_star") {
        const SpraySolution solution = one_sw_star(loaded.matrix, q);
        delay = solution.expected_delay;
        route = format_node_list({solution.relays.begin(), solution.relays.end()}, loaded.labels,
                                 '|');
      } else if (token.rfind("one_sw_r=", 0) == 0) {
        std::set<NodeId> relays;
        std::stringstream ss(token.substr(9));
        std::string label;
        while (std::getline(ss, label, '|')) relays.insert(resolve_node(loaded.labels, label));
        if (relays.empty()) throw std::invalid_argument("empty relay set in '" + token + "'");
        delay = one_sw_subset_delay(loaded.matrix, q, relays);
        route = format_node_list({relays.begin(), relays.end()}, loaded.labels, '|');
      } else {
        throw std::invalid_argument("unknown strategy '" + token + "'");
      }
      *out << loaded.labels[q.s] << ',' << loaded.labels[q.d] << ',' << token << ','
           << format_delay(delay) << ',' << route << '\n';
    }
  }
  if (out == &file) log << "analyzed " << queries.size() << " queries\n";
}

void run_synth(const RunConfig& config, std::ostream& log) {
  SynthSpec spec;
  spec.n = config.nodes;
  spec.horizon = config.horizon_seconds;
  spec.seed = config.seed;
  spec.contact_duration = config.contact_duration;
  std::vector<std::pair<std::string, std::string>> metadata;
  metadata.emplace_back("generator", "synthetic exponential t-DTN");
  if (!config.rates_input.empty()) {
    const LoadedRates loaded = load_rate_matrix(config.rates_input);
    spec.n = static_cast<int>(loaded.labels.size());
    spec.rate_source = loaded.matrix;
    metadata.emplace_back("rate_source", "file " + config.rates_input);
  } else if (config.const_lambda > 0.0) {
    spec.rate_source = ConstantRate{config.const_lambda};
    metadata.emplace_back("rate_source", "constant");
    metadata.emplace_back("lambda", std::to_string(config.const_lambda));
  } else {
    spec.rate_source = GammaRates{config.alpha, config.b};
    metadata.emplace_back("rate_source", "gamma");
    metadata.emplace_back("alpha", std::to_string(config.alpha));
    metadata.emplace_back("b", std::to_string(config.b));
  }
  metadata.emplace_back("nodes", std::to_string(spec.n));
  metadata.emplace_back("seed", std::to_string(spec.seed));
  metadata.emplace_back("contact_duration", std::to_string(spec.contact_duration));

  ContactTrace trace;
  if (spec.n == 0) {
    trace.t_end = spec.horizon;  // empty network, empty trace
  } else {
    trace = generate_trace(spec);
  }
  if (config.output.empty()) throw std::invalid_argument("missing --output");
  auto out = open_output(config.output);
  write_contact_csv(out, trace, metadata);
  log << "generated " << trace.events.size() << " contacts among " << spec.n << " nodes\n";
}

void run_simulate(const RunConfig& config, std::ostream& log) {
  const ContactTrace trace = load_input_trace(config);

  ReplayOptions replay_options;
  RateMatrix rates;
  if (config.rates_prefix_fraction > 0.0) {
    // Honesty mode: rates from the leading fraction of the horizon only,
    // bundles created at the split point.
    if (!(config.rates_prefix_fraction < 1.0))
      throw std::invalid_argument("--rates-prefix-fraction must lie in (0,1)");
    if (!config.rates_input.empty())
      throw std::invalid_argument("--rates and --rates-prefix-fraction are exclusive");
    const double split = trace.t_begin + config.rates_prefix_fraction * trace.horizon_length();
    ContactTrace prefix;
    prefix.labels = trace.labels;
    prefix.t_begin = trace.t_begin;
    prefix.t_end = split;
    for (const ContactEvent& ev : trace.events)
      if (ev.end <= split) prefix.events.push_back(ev);
    rates = rates_from_table(filtered_table(prefix, config));
    replay_options.creation_time = split;
    log << "rates estimated on [" << trace.t_begin << ", " << split
        << "); bundles created at " << split << "\n";
  } else if (!config.rates_input.empty()) {
    rates = load_rate_matrix(config.rates_input, &trace.labels).matrix;
  } else {
    // Paper-style prior pass: rates from the filtered trace.
    rates = rates_from_table(filtered_table(trace, config));
  }

  // Contacts are replayed from the original trace by default; the filter is a
  // modelling device. --replay-filtered switches to the merged trace.
  const ContactTrace* replay_trace = &trace;
  ContactTrace merged;
  if (config.replay_filtered) {
    merged = merge_short_contacts(trace, config.pingpong_seconds, parse_convention(config));
    replay_trace = &merged;
  }

  const std::vector<DelayQuery> queries = make_queries(config, trace.labels);

  std::vector<std::string> tokens = config.strategies;
  if (tokens.empty()) tokens = {"wait", "one_sw_modified", "one_sw_star", "med"};

  std::vector<StrategySummary> summaries;
  std::ofstream details;
  if (!config.details_output.empty()) {
    details = open_output(config.details_output);
    details << "bundle_id,s,d,strategy,delivered,delay_s,hops\n";
  }
  for (const std::string& token : tokens) {
    const auto kind = strategy_from_string(token);
    if (!kind) throw std::invalid_argument("unknown strategy '" + token + "'");
    StrategyConfig strategy;
    strategy.kind = *kind;
    strategy.rates = &rates;
    const SimulationReport report = replay(*replay_trace, queries, strategy, replay_options);
    summaries.push_back(report.summary);
    if (details.is_open()) {
      std::ostringstream block;
      write_bundle_details(block, report, trace.labels);
      const std::string text = block.str();
      details << text.substr(text.find('\n') + 1);  // skip the repeated header
    }
  }

  if (!config.output.empty()) {
    auto out = open_output(config.output);
    write_simulation_summary(out, summaries);
  }
  write_simulation_summary(log, summaries);
}

}  // namespace tdtn
