#pragma once

// Synthetic exponential t-DTN generation: a sampled (or given) rate matrix
// and Poisson contact processes per pair over a horizon. Generation is
// deterministic in the seed; every pair draws from its own substream keyed by
// (seed, i, j), so traces are reproducible pair by pair and independent of n.

#include <cstdint>
#include <variant>

#include "tdtn/rate_model.hpp"
#include "tdtn/trace.hpp"

namespace tdtn {

struct GammaRates {
  double alpha = 2.26;
  double b = 113766.9;  // rate-scale: mean lambda = alpha/b
};

struct ConstantRate {
  double lambda = 0.0;
};

struct SynthSpec {
  int n = 0;
  std::variant<GammaRates, ConstantRate, RateMatrix> rate_source = GammaRates{};
  double horizon = 0.0;  // seconds, > 0
  std::uint64_t seed = 0;
  double contact_duration = 0.0;  // 0 = instantaneous contacts
};

// One independent lambda draw per unordered pair (or the explicit matrix).
RateMatrix sample_rates(const SynthSpec& spec);

// Poisson contact instants per pair with rate lambda_ij on [0, horizon]; the
// first contact is exponential(lambda) from 0, successive gaps exponential.
// Contacts carry the given duration (clamped to the horizon) and the trace is
// canonicalized, so overlapping intervals of a pair merge.
ContactTrace generate_trace(const Eigen::Ref<const RateMatrix>& rates, double horizon,
                            std::uint64_t seed, double contact_duration = 0.0);

ContactTrace generate_trace(const SynthSpec& spec);

}  // namespace tdtn
