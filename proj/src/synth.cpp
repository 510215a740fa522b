#include "tdtn/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "tdtn/rng.hpp"

namespace tdtn {

namespace {

// Distinct stream domains so rate sampling and event generation never share
// draws even under the same user seed.
constexpr std::uint64_t kRateDomain = 0x9d8a7b2c3e4f5061ULL;
constexpr std::uint64_t kTraceDomain = 0x1f2e3d4c5b6a7988ULL;

std::vector<std::string> make_labels(int n) {
  int width = 1;
  for (int v = n - 1; v >= 10; v /= 10) ++width;
  width = std::clamp(width, 3, 10);
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(std::max(n, 0)));
  char buf[32];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "n%0*d", width, i);
    labels.emplace_back(buf);
  }
  return labels;
}

}  // namespace

RateMatrix sample_rates(const SynthSpec& spec) {
  if (spec.n < 0) throw std::invalid_argument("sample_rates: negative node count");
  if (const auto* explicit_rates = std::get_if<RateMatrix>(&spec.rate_source)) {
    if (explicit_rates->rows() != spec.n || explicit_rates->cols() != spec.n)
      throw std::invalid_argument("sample_rates: explicit matrix size does not match n");
    return *explicit_rates;
  }
  RateMatrix m = RateMatrix::Zero(spec.n, spec.n);
  if (const auto* constant = std::get_if<ConstantRate>(&spec.rate_source)) {
    if (constant->lambda < 0.0) throw std::invalid_argument("sample_rates: negative rate");
    for (int i = 0; i < spec.n; ++i)
      for (int j = i + 1; j < spec.n; ++j) m(i, j) = m(j, i) = constant->lambda;
    return m;
  }
  const auto& gamma = std::get<GammaRates>(spec.rate_source);
  if (!(gamma.alpha > 0.0) || !(gamma.b > 0.0))
    throw std::invalid_argument("sample_rates: gamma parameters must be positive");
  for (int i = 0; i < spec.n; ++i) {
    for (int j = i + 1; j < spec.n; ++j) {
      Rng rng(pair_stream_seed(spec.seed ^ kRateDomain, i, j));
      m(i, j) = m(j, i) = rng.gamma(gamma.alpha, gamma.b);
    }
  }
  return m;
}

ContactTrace generate_trace(const Eigen::Ref<const RateMatrix>& rates, double horizon,
                            std::uint64_t seed, double contact_duration) {
  if (!(horizon > 0.0)) throw std::invalid_argument("generate_trace: horizon must be > 0");
  if (contact_duration < 0.0) throw std::invalid_argument("generate_trace: negative duration");
  const int n = static_cast<int>(rates.rows());

  std::vector<ContactEvent> events;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double lambda = rates(i, j);
      if (lambda <= 0.0) continue;
      Rng rng(pair_stream_seed(seed ^ kTraceDomain, i, j));
      for (double t = rng.exponential(lambda); t <= horizon; t += rng.exponential(lambda)) {
        ContactEvent ev;
        ev.a = i;
        ev.b = j;
        ev.start = t;
        ev.end = std::min(t + contact_duration, horizon);
        events.push_back(ev);
      }
    }
  }
  ContactTrace trace = make_canonical_trace(make_labels(n), std::move(events));
  trace.t_begin = 0.0;
  trace.t_end = horizon;
  return trace;
}

ContactTrace generate_trace(const SynthSpec& spec) {
  const RateMatrix rates = sample_rates(spec);
  return generate_trace(rates, spec.horizon, spec.seed, spec.contact_duration);
}

}  // namespace tdtn
