#include "tdtn/stat_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace tdtn {

const char* to_string(PairClass c) {
  switch (c) {
    case PairClass::exponential: return "exponential";
    case PairClass::power_law: return "power-law";
    case PairClass::both: return "both";
    case PairClass::neither: return "neither";
    case PairClass::insufficient_data: return "insufficient-data";
  }
  return "?";
}

ExponentialFit fit_exponential(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("fit_exponential: no samples");
  double sum = 0.0;
  for (double s : samples) {
    if (!(s > 0.0)) throw std::invalid_argument("fit_exponential: samples must be positive");
    sum += s;
  }
  ExponentialFit fit;
  fit.sample_count = static_cast<int>(samples.size());
  fit.lambda = static_cast<double>(samples.size()) / sum;
  return fit;
}

double csvm_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("csvm_statistic: no samples");
  std::stable_sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double omega2 = 1.0 / (12.0 * n);
  double previous = -1.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double f = cdf(samples[k]);
    if (!(f >= 0.0 && f <= 1.0)) throw std::domain_error("csvm_statistic: CDF outside [0,1]");
    if (f < previous) throw std::domain_error("csvm_statistic: CDF not monotone on samples");
    previous = f;
    const double expected = (2.0 * static_cast<double>(k + 1) - 1.0) / (2.0 * n);
    const double dev = f - expected;
    omega2 += dev * dev;
  }
  return omega2;
}

double csvm_critical_value(double significance, CsvmCase test_case) {
  struct Row {
    double significance, critical;
  };
  // Asymptotic upper percentage points of omega^2 (Stephens); the second
  // table is the exponential case with the rate estimated from the sample.
  static constexpr Row known[] = {
      {0.15, 0.284}, {0.10, 0.347}, {0.05, 0.461}, {0.025, 0.581}, {0.01, 0.743}};
  static constexpr Row fitted[] = {
      {0.15, 0.149}, {0.10, 0.177}, {0.05, 0.224}, {0.025, 0.273}, {0.01, 0.337}};
  const Row* table = test_case == CsvmCase::parameters_known ? known : fitted;
  constexpr int rows = 5;
  if (!(significance > 0.0 && significance < 1.0))
    throw std::invalid_argument("significance must lie in (0,1)");
  if (significance >= table[0].significance) return table[0].critical;
  if (significance <= table[rows - 1].significance) return table[rows - 1].critical;
  for (int i = 0; i + 1 < rows; ++i) {
    if (significance <= table[i].significance && significance >= table[i + 1].significance) {
      const double w =
          (table[i].significance - significance) / (table[i].significance - table[i + 1].significance);
      return table[i].critical + w * (table[i + 1].critical - table[i].critical);
    }
  }
  return table[rows - 1].critical;
}

namespace {

double lomax_profile_shape(std::span<const double> samples, double b, double max_shape) {
  double sum_log1p = 0.0;
  for (double x : samples) sum_log1p += std::log1p(x / b);
  if (sum_log1p <= 0.0) return max_shape;
  return std::min(static_cast<double>(samples.size()) / sum_log1p, max_shape);
}

double lomax_log_likelihood(std::span<const double> samples, double b, double max_shape) {
  const double alpha = lomax_profile_shape(samples, b, max_shape);
  const double n = static_cast<double>(samples.size());
  double sum_log = 0.0;
  for (double x : samples) sum_log += std::log(x + b);
  return n * std::log(alpha) + n * alpha * std::log(b) - (alpha + 1.0) * sum_log;
}

}  // namespace

ParetoFit fit_pareto_mle(std::span<const double> samples, double max_shape, double cutoff) {
  std::vector<double> kept;
  kept.reserve(samples.size());
  for (double x : samples)
    if (x >= cutoff) kept.push_back(x);
  if (kept.empty()) throw std::invalid_argument("fit_pareto_mle: no samples above cutoff");

  std::vector<double> sorted = kept;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double scale = median > 0.0 ? median : 1.0;

  // Profile likelihood over log b: coarse grid then golden-section refinement.
  const double lo = std::log(scale) - 8.0;
  const double hi = std::log(scale) + 12.0;
  double best_logb = lo;
  double best_ll = -std::numeric_limits<double>::infinity();
  constexpr int grid = 96;
  for (int i = 0; i <= grid; ++i) {
    const double logb = lo + (hi - lo) * static_cast<double>(i) / grid;
    const double ll = lomax_log_likelihood(kept, std::exp(logb), max_shape);
    if (ll > best_ll) {
      best_ll = ll;
      best_logb = logb;
    }
  }
  const double step = (hi - lo) / grid;
  double a = best_logb - step;
  double b_ = best_logb + step;
  constexpr double golden = 0.3819660112501051;
  double x1 = a + golden * (b_ - a);
  double x2 = b_ - golden * (b_ - a);
  double f1 = lomax_log_likelihood(kept, std::exp(x1), max_shape);
  double f2 = lomax_log_likelihood(kept, std::exp(x2), max_shape);
  for (int it = 0; it < 80; ++it) {
    if (f1 > f2) {
      b_ = x2;
      x2 = x1;
      f2 = f1;
      x1 = a + golden * (b_ - a);
      f1 = lomax_log_likelihood(kept, std::exp(x1), max_shape);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = b_ - golden * (b_ - a);
      f2 = lomax_log_likelihood(kept, std::exp(x2), max_shape);
    }
  }
  ParetoFit fit;
  fit.b = std::exp(0.5 * (a + b_));
  fit.alpha = lomax_profile_shape(kept, fit.b, max_shape);
  return fit;
}

FitVerdict classify_pair(PairKey pair, std::span<const double> samples,
                         const ClassifyOptions& options) {
  if (!(options.critical_value > 0.0))
    throw std::invalid_argument("classify_pair: critical value must be > 0");
  FitVerdict verdict;
  verdict.pair = pair;
  verdict.sample_count = static_cast<int>(samples.size());
  verdict.lambda = std::numeric_limits<double>::quiet_NaN();
  verdict.omega2_exponential = std::numeric_limits<double>::quiet_NaN();
  verdict.omega2_powerlaw = std::numeric_limits<double>::quiet_NaN();
  if (verdict.sample_count < options.min_samples) {
    verdict.classification = PairClass::insufficient_data;
    return verdict;
  }
  std::vector<double> data(samples.begin(), samples.end());

  const ExponentialFit exp_fit = fit_exponential(data);
  verdict.lambda = exp_fit.lambda;
  verdict.omega2_exponential = csvm_statistic(
      data, [&](double x) { return 1.0 - std::exp(-exp_fit.lambda * x); });

  bool powerlaw_ok = false;
  try {
    const ParetoFit pl = fit_pareto_mle(data, options.powerlaw_max_shape, options.powerlaw_cutoff);
    verdict.omega2_powerlaw = csvm_statistic(
        data, [&](double x) { return 1.0 - std::pow(pl.b / (x + pl.b), pl.alpha); });
    powerlaw_ok = verdict.omega2_powerlaw <= options.critical_value;
  } catch (const std::exception&) {
    verdict.omega2_powerlaw = std::numeric_limits<double>::infinity();
  }

  const bool exponential_ok = verdict.omega2_exponential <= options.critical_value;
  if (exponential_ok && powerlaw_ok)
    verdict.classification = PairClass::both;
  else if (exponential_ok)
    verdict.classification = PairClass::exponential;
  else if (powerlaw_ok)
    verdict.classification = PairClass::power_law;
  else
    verdict.classification = PairClass::neither;
  return verdict;
}

GammaFit fit_gamma_rates(std::span<const double> lambdas) {
  if (lambdas.size() < 2) throw std::invalid_argument("fit_gamma_rates: need at least 2 values");
  double sum = 0.0;
  for (double l : lambdas) {
    if (!(l > 0.0)) throw std::invalid_argument("fit_gamma_rates: values must be positive");
    sum += l;
  }
  const double n = static_cast<double>(lambdas.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double l : lambdas) ss += (l - mean) * (l - mean);
  const double variance = ss / (n - 1.0);
  if (!(variance > 0.0)) throw std::domain_error("fit_gamma_rates: zero variance");
  GammaFit fit;
  fit.b = mean / variance;
  fit.alpha = mean * mean / variance;
  return fit;
}

double AggregateDistribution::ccdf(double t) const {
  const auto it = std::upper_bound(values.begin(), values.end(), t);
  const std::size_t idx = static_cast<std::size_t>(it - values.begin());
  if (idx >= values.size()) return 0.0;
  return suffix_[idx] / total_weight;
}

AggregateDistribution aggregate_tail(const InterContactTable& table,
                                     const std::set<PairKey>& pairs,
                                     AggregateWeighting weighting) {
  if (pairs.empty()) throw std::invalid_argument("aggregate_tail: empty pair set");
  AggregateDistribution agg;
  std::vector<std::pair<double, double>> weighted;  // (value, weight)
  double total = 0.0;
  for (const PairKey& key : pairs) {
    const auto it = table.pairs.find(key);
    if (it == table.pairs.end() || it->second.samples.empty()) continue;
    const PairSamples& ps = it->second;
    const double w = weighting == AggregateWeighting::pooled
                         ? 1.0
                         : 1.0 / static_cast<double>(ps.samples.size());
    for (double s : ps.samples) weighted.emplace_back(s, w);
    total += weighting == AggregateWeighting::pooled ? static_cast<double>(ps.samples.size()) : 1.0;
  }
  if (weighted.empty()) throw std::invalid_argument("aggregate_tail: no samples");
  std::sort(weighted.begin(), weighted.end());
  agg.values.reserve(weighted.size());
  agg.weights.reserve(weighted.size());
  for (const auto& [v, w] : weighted) {
    agg.values.push_back(v);
    agg.weights.push_back(w);
  }
  agg.total_weight = total;
  agg.suffix_.assign(agg.values.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = agg.values.size(); i-- > 0;) {
    acc += agg.weights[i];
    agg.suffix_[i] = acc;
  }
  return agg;
}

double pareto_tail(double alpha, double b, double t) {
  if (!(alpha > 0.0) || !(b > 0.0)) throw std::invalid_argument("pareto_tail: alpha,b must be > 0");
  if (t < 0.0) throw std::invalid_argument("pareto_tail: t must be >= 0");
  return std::pow(b / (t + b), alpha);
}

PowerLawFit fit_powerlaw_points(std::span<const std::pair<double, double>> points) {
  std::vector<std::pair<double, double>> logs;
  logs.reserve(points.size());
  for (const auto& [t, p] : points) {
    if (!(t > 0.0) || !(p > 0.0)) continue;
    logs.emplace_back(std::log(t), std::log(p));
  }
  std::sort(logs.begin(), logs.end());
  logs.erase(std::unique(logs.begin(), logs.end(),
                         [](const auto& x, const auto& y) { return x.first == y.first; }),
             logs.end());
  if (logs.size() < 3) throw std::invalid_argument("fit_powerlaw: need at least 3 distinct points");

  Eigen::MatrixXd design(static_cast<Eigen::Index>(logs.size()), 2);
  Eigen::VectorXd response(static_cast<Eigen::Index>(logs.size()));
  for (std::size_t i = 0; i < logs.size(); ++i) {
    design(static_cast<Eigen::Index>(i), 0) = 1.0;
    design(static_cast<Eigen::Index>(i), 1) = logs[i].first;
    response(static_cast<Eigen::Index>(i)) = logs[i].second;
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(response);
  PowerLawFit fit;
  fit.c = std::exp(beta(0));
  fit.delta = beta(1);
  return fit;
}

PowerLawFit fit_powerlaw_tail(const AggregateDistribution& distribution,
                              const PowerLawFitOptions& options) {
  if (distribution.values.empty()) throw std::invalid_argument("fit_powerlaw: empty distribution");
  // Weighted quantile cuts over the pooled samples.
  const double low_target = options.trim_low * distribution.total_weight;
  const double high_target = (1.0 - options.trim_high) * distribution.total_weight;
  double acc = 0.0;
  double low_value = distribution.values.front();
  double high_value = distribution.values.back();
  bool low_set = false;
  for (std::size_t i = 0; i < distribution.values.size(); ++i) {
    acc += distribution.weights[i];
    if (!low_set && acc >= low_target) {
      low_value = distribution.values[i];
      low_set = true;
    }
    if (acc <= high_target) high_value = distribution.values[i];
  }
  std::vector<std::pair<double, double>> points;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (double v : distribution.values) {
    if (v < low_value || v > high_value || v == previous) continue;
    previous = v;
    const double p = distribution.ccdf(v);
    if (p > 0.0) points.emplace_back(v, p);
  }
  return fit_powerlaw_points(points);
}

void write_verdicts(std::ostream& out, std::span<const FitVerdict> verdicts,
                    const std::vector<std::string>& labels) {
  out << "i,j,N,lambda,omega2_exp,omega2_pl,classification\n";
  char buf[40];
  const auto fmt = [&buf](double v) -> std::string {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return "inf";
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
  };
  for (const FitVerdict& v : verdicts)
    out << labels[v.pair.first] << ',' << labels[v.pair.second] << ',' << v.sample_count << ','
        << fmt(v.lambda) << ',' << fmt(v.omega2_exponential) << ',' << fmt(v.omega2_powerlaw)
        << ',' << to_string(v.classification) << '\n';
}

}  // namespace tdtn
