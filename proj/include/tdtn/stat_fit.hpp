#pragma once

// Per-pair distribution fitting and hypothesis testing: exponential and
// heavy-tail power-law fits, the Cramer-von Mises omega^2 statistic, the
// gamma fit over rate parameters, and the aggregate inter-contact tail with
// its Pareto form and log-log power-law regression.

#include <functional>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tdtn/trace.hpp"

namespace tdtn {

struct ExponentialFit {
  double lambda = 0.0;  // per second, 1/mean
  int sample_count = 0;
};

// Tail model f(x) = c * x^delta (delta < 0 for a decreasing tail).
struct PowerLawFit {
  double c = 0.0;
  double delta = 0.0;
};

// Rate-parameter distribution p(lambda) = lambda^{alpha-1} b^alpha
// e^{-b lambda} / Gamma(alpha): shape alpha, rate-scale b, mean alpha/b.
struct GammaFit {
  double alpha = 0.0;
  double b = 0.0;
};

// Shifted Pareto (Lomax) hypothesis for a single pair:
// F(x) = 1 - (b/(x+b))^alpha on x >= 0.
struct ParetoFit {
  double alpha = 0.0;
  double b = 0.0;
};

enum class PairClass { exponential, power_law, both, neither, insufficient_data };

const char* to_string(PairClass c);

struct FitVerdict {
  PairKey pair{};
  int sample_count = 0;
  double lambda = 0.0;              // fitted exponential rate
  double omega2_exponential = 0.0;  // CSVM statistic vs the exponential fit
  double omega2_powerlaw = 0.0;     // CSVM statistic vs the power-law fit
  PairClass classification = PairClass::insufficient_data;
};

// lambda = 1/mean(samples). Throws std::invalid_argument on an empty list.
ExponentialFit fit_exponential(std::span<const double> samples);

// Cramer-Smirnov-Von-Mises statistic
//   omega^2 = 1/(12N) + sum_k (F(x_(k)) - (2k-1)/(2N))^2
// over the order statistics. Throws std::domain_error when the hypothesis CDF
// is non-monotone or outside [0,1] on the samples.
double csvm_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Critical-value tables for omega^2 (asymptotic upper percentage points,
// Stephens). parameters_known assumes a fully specified hypothesis;
// exponential_fitted applies when lambda is estimated from the same sample,
// which is what the classification pipeline does. Linear interpolation
// between tabulated significance levels, clamped at the table ends.
enum class CsvmCase { parameters_known, exponential_fitted };
double csvm_critical_value(double significance, CsvmCase test_case);

struct ClassifyOptions {
  double critical_value = 0.224;  // csvm_critical_value(0.05, exponential_fitted)
  int min_samples = 20;           // below this the verdict is insufficient-data
  double powerlaw_max_shape = 3.0;
  double powerlaw_cutoff = 0.0;  // fit the power law on samples >= cutoff
};

// Maximum-likelihood Lomax fit with the shape constrained to the heavy-tail
// regime (alpha <= max_shape); an unconstrained shape degenerates to the
// exponential limit b -> infinity on light-tailed data.
ParetoFit fit_pareto_mle(std::span<const double> samples, double max_shape = 3.0,
                         double cutoff = 0.0);

FitVerdict classify_pair(PairKey pair, std::span<const double> samples,
                         const ClassifyOptions& options = {});

// Method of moments under the (alpha, b) parameterization: b = mean/variance,
// alpha = mean^2/variance, with the unbiased sample variance. Throws on fewer
// than two values or zero variance.
GammaFit fit_gamma_rates(std::span<const double> lambdas);

// Pooled inter-contact samples over a set of pairs, with a weighted empirical
// CCDF (strictly-greater convention).
//   pooled:    every sample has weight 1 (each sample counts equally)
//   pair_mean: each pair's samples share weight 1/m_p (each pair counts
//              equally; the consistent estimator of the unweighted
//              lambda-mixture tail)
enum class AggregateWeighting { pooled, pair_mean };

struct AggregateDistribution {
  std::vector<double> values;   // ascending
  std::vector<double> weights;  // parallel to values
  double total_weight = 0.0;

  double ccdf(double t) const;  // P(theta > t)
  std::size_t sample_count() const { return values.size(); }

 private:
  friend AggregateDistribution aggregate_tail(const InterContactTable&, const std::set<PairKey>&,
                                              AggregateWeighting);
  std::vector<double> suffix_;  // suffix weight sums, one past each index
};

AggregateDistribution aggregate_tail(const InterContactTable& table,
                                     const std::set<PairKey>& pairs,
                                     AggregateWeighting weighting = AggregateWeighting::pooled);

// Analytic aggregate tail P(theta > t) = (b/(t+b))^alpha for gamma-distributed
// rates.
double pareto_tail(double alpha, double b, double t);

struct PowerLawFitOptions {
  double trim_low = 0.10;   // drop the smallest 10% of the weight
  double trim_high = 0.01;  // drop the largest 1% of the weight
};

// Least-squares line on (log t, log CCDF(t)) over the trimmed range of the
// empirical distribution. Throws on fewer than 3 distinct points.
PowerLawFit fit_powerlaw_tail(const AggregateDistribution& distribution,
                              const PowerLawFitOptions& options = {});

// Same regression on explicit (t, ccdf) points.
PowerLawFit fit_powerlaw_points(std::span<const std::pair<double, double>> points);

// Verdict report: one record per pair,
// i,j,N,lambda,omega2_exp,omega2_pl,classification.
void write_verdicts(std::ostream& out, std::span<const FitVerdict> verdicts,
                    const std::vector<std::string>& labels);

}  // namespace tdtn
