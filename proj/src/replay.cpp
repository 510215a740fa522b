#include "tdtn/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>

namespace tdtn {

const char* to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::wait: return "wait";
    case StrategyKind::one_sw_modified: return "one_sw_modified";
    case StrategyKind::one_sw_star: return "one_sw_star";
    case StrategyKind::med: return "med";
  }
  return "?";
}

std::optional<StrategyKind> strategy_from_string(const std::string& token) {
  if (token == "wait") return StrategyKind::wait;
  if (token == "one_sw_modified") return StrategyKind::one_sw_modified;
  if (token == "one_sw_star") return StrategyKind::one_sw_star;
  if (token == "med") return StrategyKind::med;
  return std::nullopt;
}

double analytic_strategy_delay(StrategyKind kind, const Eigen::Ref<const RateMatrix>& m,
                               const DelayQuery& q) {
  switch (kind) {
    case StrategyKind::wait:
      return wait_delay(m, q);
    case StrategyKind::med:
      return med_path(m, q).expected_delay;
    case StrategyKind::one_sw_modified: {
      std::set<NodeId> eligible;
      const int n = static_cast<int>(m.rows());
      for (NodeId r = 0; r < n; ++r) {
        if (r == q.s || m(q.s, r) <= 0.0) continue;
        if (r == q.d || m(r, q.d) > 0.0) eligible.insert(r);
      }
      if (eligible.empty()) return infinite_delay();
      return one_sw_subset_delay(m, q, eligible);
    }
    case StrategyKind::one_sw_star:
      return one_sw_star(m, q).expected_delay;
  }
  return infinite_delay();
}

namespace {

// Per-bundle routing state fixed at creation.
struct BundlePlan {
  std::set<NodeId> spray_set;    // 1-SW*: R*
  std::vector<NodeId> path;      // MED: planned node sequence
  std::size_t path_pos = 0;      // MED: custodian's index in path
  double moved_at = -std::numeric_limits<double>::infinity();
};

enum class Action { keep, transfer, deliver };

}  // namespace

SimulationReport replay(const ContactTrace& trace, const std::vector<DelayQuery>& queries,
                        const StrategyConfig& strategy, const ReplayOptions& options) {
  const int n = trace.node_count();
  const bool needs_rates = strategy.kind != StrategyKind::wait;
  if (needs_rates && strategy.rates == nullptr)
    throw std::invalid_argument("replay: strategy requires a rate matrix");
  if (strategy.rates != nullptr && strategy.rates->rows() != n)
    throw std::invalid_argument("replay: rate matrix size does not match trace");
  const double creation = options.creation_time.value_or(trace.t_begin);

  SimulationReport report;
  report.summary.kind = strategy.kind;
  report.summary.bundles = static_cast<int>(queries.size());
  report.bundles.reserve(queries.size());
  std::vector<BundlePlan> plans(queries.size());
  std::vector<std::vector<int>> holdings(static_cast<std::size_t>(n));

  for (std::size_t i = 0; i < queries.size(); ++i) {
    const DelayQuery& q = queries[i];
    if (q.s < 0 || q.s >= n || q.d < 0 || q.d >= n)
      throw std::invalid_argument("replay: query node outside trace");
    if (q.s == q.d) throw std::invalid_argument("replay: source equals destination");
    Bundle bundle;
    bundle.id = static_cast<int>(i);
    bundle.source = q.s;
    bundle.destination = q.d;
    bundle.creation_time = creation;
    bundle.custodian = q.s;
    report.bundles.push_back(std::move(bundle));
    holdings[static_cast<std::size_t>(q.s)].push_back(static_cast<int>(i));

    if (strategy.kind == StrategyKind::one_sw_star)
      plans[i].spray_set = one_sw_star(*strategy.rates, q).relays;
    else if (strategy.kind == StrategyKind::med)
      plans[i].path = med_path(*strategy.rates, q).path;
  }

  const auto decide = [&](const Bundle& bundle, const BundlePlan& plan, NodeId peer) -> Action {
    // Delivery preempts every rule except MED with the shortcut disabled.
    if (peer == bundle.destination) {
      if (strategy.kind == StrategyKind::med && !strategy.destination_shortcut) {
        const bool next_hop = plan.path_pos + 1 < plan.path.size() &&
                              plan.path[plan.path_pos + 1] == peer;
        return next_hop ? Action::deliver : Action::keep;
      }
      return Action::deliver;
    }
    switch (strategy.kind) {
      case StrategyKind::wait:
        return Action::keep;
      case StrategyKind::one_sw_modified:
        if (bundle.custodian != bundle.source) return Action::keep;  // relay waits for d
        return (*strategy.rates)(peer, bundle.destination) > 0.0 ? Action::transfer : Action::keep;
      case StrategyKind::one_sw_star:
        if (bundle.custodian != bundle.source) return Action::keep;
        return plan.spray_set.count(peer) ? Action::transfer : Action::keep;
      case StrategyKind::med: {
        const bool next_hop = plan.path_pos + 1 < plan.path.size() &&
                              plan.path[plan.path_pos + 1] == peer;
        return next_hop ? Action::transfer : Action::keep;
      }
    }
    return Action::keep;
  };

  std::vector<int> snapshot;
  for (const ContactEvent& ev : trace.events) {
    for (const NodeId holder : {std::min(ev.a, ev.b), std::max(ev.a, ev.b)}) {
      const NodeId peer = holder == ev.a ? ev.b : ev.a;
      snapshot = holdings[static_cast<std::size_t>(holder)];
      for (const int idx : snapshot) {
        Bundle& bundle = report.bundles[static_cast<std::size_t>(idx)];
        BundlePlan& plan = plans[static_cast<std::size_t>(idx)];
        if (bundle.delivered || bundle.custodian != holder) continue;
        if (ev.start < bundle.creation_time) continue;
        // Received at this very instant: may only move on to the destination.
        if (plan.moved_at == ev.start && peer != bundle.destination) continue;

        const Action action = decide(bundle, plan, peer);
        if (action == Action::keep) continue;
        bundle.hop_log.push_back({ev.start, holder, peer});
        auto& list = holdings[static_cast<std::size_t>(holder)];
        list.erase(std::remove(list.begin(), list.end(), idx), list.end());
        if (action == Action::deliver) {
          bundle.delivered = true;
          bundle.delivery_time = ev.start;
          bundle.custodian = peer;
          continue;
        }
        bundle.custodian = peer;
        plan.moved_at = ev.start;
        if (strategy.kind == StrategyKind::med) ++plan.path_pos;
        holdings[static_cast<std::size_t>(peer)].push_back(idx);
      }
    }
  }

  // Table-style metrics.
  std::vector<double> delays;
  double hop_sum = 0.0;
  for (const Bundle& bundle : report.bundles) {
    if (!bundle.delivered) continue;
    delays.push_back(bundle.delay());
    hop_sum += bundle.hop_count();
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  StrategySummary& s = report.summary;
  s.delivered = static_cast<int>(delays.size());
  s.delivery_ratio_pct =
      s.bundles > 0 ? 100.0 * static_cast<double>(s.delivered) / s.bundles : nan;
  constexpr double day = 86400.0;
  if (!delays.empty()) {
    std::sort(delays.begin(), delays.end());
    double sum = 0.0;
    for (double d : delays) sum += d;
    s.mean_delay_days = sum / static_cast<double>(delays.size()) / day;
    const std::size_t mid = delays.size() / 2;
    s.median_delay_days =
        (delays.size() % 2 ? delays[mid] : 0.5 * (delays[mid - 1] + delays[mid])) / day;
    s.mean_hop_count = hop_sum / static_cast<double>(delays.size());
  } else {
    s.mean_delay_days = s.median_delay_days = s.mean_hop_count = nan;
  }
  if (strategy.rates != nullptr && !queries.empty()) {
    const double cap = trace.t_end - creation;  // simulated period per bundle
    double sum = 0.0;
    for (const DelayQuery& q : queries) {
      const double value = analytic_strategy_delay(strategy.kind, *strategy.rates, q);
      sum += std::isinf(value) ? cap : value;
    }
    s.theoretical_delay_days = sum / static_cast<double>(queries.size()) / day;
  } else {
    s.theoretical_delay_days = nan;
  }
  return report;
}

void write_simulation_summary(std::ostream& out, std::span<const StrategySummary> rows) {
  out << "strategy,delivery_ratio_pct,a_delay_days,m_delay_days,th_delay_days,hop_count\n";
  char buf[40];
  const auto fmt = [&buf](double v) -> std::string {
    if (std::isnan(v)) return "";
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
  };
  for (const StrategySummary& s : rows)
    out << to_string(s.kind) << ',' << fmt(s.delivery_ratio_pct) << ',' << fmt(s.mean_delay_days)
        << ',' << fmt(s.median_delay_days) << ',' << fmt(s.theoretical_delay_days) << ','
        << fmt(s.mean_hop_count) << '\n';
}

void write_bundle_details(std::ostream& out, const SimulationReport& report,
                          const std::vector<std::string>& labels) {
  out << "bundle_id,s,d,strategy,delivered,delay_s,hops\n";
  char buf[40];
  for (const Bundle& b : report.bundles) {
    out << b.id << ',' << labels[b.source] << ',' << labels[b.destination] << ','
        << to_string(report.summary.kind) << ',' << (b.delivered ? 1 : 0) << ',';
    if (b.delivered) {
      std::snprintf(buf, sizeof(buf), "%.17g", b.delay());
      out << buf;
    }
    out << ',' << b.hop_count() << '\n';
  }
}

}  // namespace tdtn
