#include "tdtn/rate_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace tdtn {

bool is_valid_rate_matrix(const Eigen::Ref<const RateMatrix>& m, double tolerance) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) < 0.0 || !std::isfinite(m(i, j))) return false;
      if (std::abs(m(i, j) - m(j, i)) > tolerance) return false;
    }
  }
  return true;
}

RateMatrix rates_from_table(const InterContactTable& table, const std::set<PairKey>& pairs) {
  const int n = table.node_count();
  RateMatrix m = RateMatrix::Zero(n, n);
  for (const PairKey& key : pairs) {
    const auto it = table.pairs.find(key);
    if (it == table.pairs.end() || !it->second.has_mean()) continue;
    const double lambda = 1.0 / it->second.mean();
    m(key.first, key.second) = lambda;
    m(key.second, key.first) = lambda;
  }
  return m;
}

RateMatrix rates_from_table(const InterContactTable& table) {
  std::set<PairKey> all;
  for (const auto& [key, ps] : table.pairs)
    if (ps.has_mean()) all.insert(key);
  return rates_from_table(table, all);
}

double wait_delay(const Eigen::Ref<const RateMatrix>& m, const DelayQuery& q) {
  const double lambda = m(q.s, q.d);
  return lambda > 0.0 ? 1.0 / lambda : infinite_delay();
}

PathDelay med_path(const Eigen::Ref<const RateMatrix>& m, const DelayQuery& q) {
  const int n = static_cast<int>(m.rows());
  std::vector<double> dist(n, infinite_delay());
  std::vector<NodeId> prev(n, -1);
  std::vector<bool> done(n, false);
  dist[q.s] = 0.0;

  using Entry = std::pair<double, NodeId>;  // orders by (distance, node id)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  heap.push({0.0, q.s});
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = true;
    if (u == q.d) break;
    for (NodeId v = 0; v < n; ++v) {
      if (v == u || done[v]) continue;
      const double lambda = m(u, v);
      if (lambda <= 0.0) continue;
      const double alt = du + 1.0 / lambda;
      if (alt < dist[v] || (alt == dist[v] && prev[v] > u)) {
        dist[v] = alt;
        prev[v] = u;
        heap.push({alt, v});
      }
    }
  }

  PathDelay result;
  result.expected_delay = dist[q.d];
  if (!std::isfinite(dist[q.d])) return result;
  for (NodeId v = q.d; v != -1; v = prev[v]) result.path.push_back(v);
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

OneSwDelay one_sw_delay(const Eigen::Ref<const RateMatrix>& m, const DelayQuery& q) {
  const int n = static_cast<int>(m.rows());
  double lambda_big = 0.0;
  double relay_sum = 0.0;
  for (NodeId r = 0; r < n; ++r) {
    if (r == q.s) continue;
    const double lambda_sr = m(q.s, r);
    if (lambda_sr <= 0.0) continue;
    lambda_big += lambda_sr;
    if (r == q.d) continue;
    const double lambda_rd = m(r, q.d);
    if (lambda_rd <= 0.0) return {infinite_delay(), false};  // bundle can strand at r
    relay_sum += lambda_sr / lambda_rd;
  }
  if (lambda_big <= 0.0) return {infinite_delay(), true};
  return {(1.0 + relay_sum) / lambda_big, false};
}

double one_sw_subset_delay(const Eigen::Ref<const RateMatrix>& m, const DelayQuery& q,
                           const std::set<NodeId>& relays) {
  double lambda_big = 0.0;
  double relay_sum = 0.0;
  for (NodeId r : relays) {
    if (r == q.s) throw std::invalid_argument("relay set must not contain the source");
    const double lambda_sr = m(q.s, r);
    if (lambda_sr <= 0.0) continue;  // never the first encounter
    lambda_big += lambda_sr;
    if (r == q.d) continue;  // 1/lambda_dd = 0
    const double lambda_rd = m(r, q.d);
    if (lambda_rd <= 0.0) return infinite_delay();
    relay_sum += lambda_sr / lambda_rd;
  }
  if (lambda_big <= 0.0) return infinite_delay();
  return (1.0 + relay_sum) / lambda_big;
}

SpraySolution one_sw_star(const Eigen::Ref<const RateMatrix>& m, const DelayQuery& q) {
  const int n = static_cast<int>(m.rows());
  struct Candidate {
    NodeId r;
    double cost;    // 1/lambda_rd, 0 for d itself
    double weight;  // lambda_sr
  };
  std::vector<Candidate> candidates;
  for (NodeId r = 0; r < n; ++r) {
    if (r == q.s) continue;
    const double lambda_sr = m(q.s, r);
    if (lambda_sr <= 0.0) continue;
    double cost;
    if (r == q.d) {
      cost = 0.0;
    } else {
      const double lambda_rd = m(r, q.d);
      if (lambda_rd <= 0.0) continue;  // would make the expectation infinite
      cost = 1.0 / lambda_rd;
    }
    candidates.push_back({r, cost, lambda_sr});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return x.cost != y.cost ? x.cost < y.cost : x.r < y.r;
  });

  SpraySolution best;
  best.expected_delay = infinite_delay();
  double numerator = 1.0;  // 1 + sum of weight * cost
  double denominator = 0.0;
  for (const Candidate& c : candidates) {
    if (!(c.cost < best.expected_delay)) break;  // prefix rule: adding it cannot improve
    numerator += c.weight * c.cost;
    denominator += c.weight;
    best.relays.insert(c.r);
    best.expected_delay = numerator / denominator;
    best.lambda_big = denominator;
  }
  if (best.relays.empty()) {
    best.expected_delay = infinite_delay();
    best.lambda_big = 0.0;
  }
  return best;
}

SprayDecomposition spray_decomposition(const Eigen::Ref<const RateMatrix>& m, NodeId s) {
  const int n = static_cast<int>(m.rows());
  SprayDecomposition out;
  Eigen::VectorXd row = m.row(s).transpose();
  row(s) = 0.0;
  out.lambda_big = row.sum();
  if (out.lambda_big <= 0.0) throw std::domain_error("source has no contacts");
  out.probabilities = row / out.lambda_big;
  return out;
}

// ---------------------------------------------------------------------------
// I/O
// ---------------------------------------------------------------------------

namespace {

std::string format_rate(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string format_delay(double seconds) {
  if (std::isinf(seconds)) return "inf";
  return format_rate(seconds);
}

void write_rate_matrix(std::ostream& out, const Eigen::Ref<const RateMatrix>& m,
                       const std::vector<std::string>& labels) {
  out << "i,j,lambda_per_second\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (m(i, j) > 0.0)
        out << labels[static_cast<std::size_t>(i)] << ',' << labels[static_cast<std::size_t>(j)]
            << ',' << format_rate(m(i, j)) << '\n';
}

LoadedRates read_rate_matrix(std::istream& in, const std::vector<std::string>* roster) {
  struct Triple {
    std::string i, j;
    double lambda;
    std::size_t line;
  };
  std::vector<Triple> triples;
  std::string line;
  std::size_t number = 0;
  bool header_seen = false;
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> ids;
  const bool fixed = roster != nullptr;
  if (fixed) {
    labels = *roster;
    for (std::size_t i = 0; i < labels.size(); ++i) ids[labels[i]] = static_cast<NodeId>(i);
  }

  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw ParseError(number, "expected i,j,lambda_per_second");
    Triple t;
    t.i = line.substr(0, c1);
    t.j = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string field = line.substr(c2 + 1);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), t.lambda);
    if (ec != std::errc{} || ptr != field.data() + field.size())
      throw ParseError(number, "cannot parse rate '" + field + "'");
    if (!(t.lambda >= 0.0) || !std::isfinite(t.lambda))
      throw ParseError(number, "rate must be finite and non-negative");
    t.line = number;
    if (fixed) {
      if (!ids.count(t.i)) throw ParseError(number, "unknown node '" + t.i + "' (not in roster)");
      if (!ids.count(t.j)) throw ParseError(number, "unknown node '" + t.j + "' (not in roster)");
    } else {
      ids.emplace(t.i, -1);
      ids.emplace(t.j, -1);
    }
    triples.push_back(std::move(t));
  }

  if (!fixed) {
    labels.clear();
    labels.reserve(ids.size());
    for (const auto& [label, _] : ids) labels.push_back(label);
    std::sort(labels.begin(), labels.end());
    for (std::size_t i = 0; i < labels.size(); ++i) ids[labels[i]] = static_cast<NodeId>(i);
  }

  LoadedRates out;
  out.labels = std::move(labels);
  const int n = static_cast<int>(out.labels.size());
  out.matrix = RateMatrix::Zero(n, n);
  for (const Triple& t : triples) {
    const NodeId i = ids.at(t.i);
    const NodeId j = ids.at(t.j);
    if (i == j) throw ParseError(t.line, "self pair '" + t.i + "'");
    out.matrix(i, j) = t.lambda;
    out.matrix(j, i) = t.lambda;
  }
  return out;
}

LoadedRates load_rate_matrix(const std::string& path, const std::vector<std::string>* roster) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_rate_matrix(in, roster);
}

}  // namespace tdtn
