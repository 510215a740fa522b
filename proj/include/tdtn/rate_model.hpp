#pragma once

// The lambda matrix and the closed-form single-copy routing analytics:
// direct-wait delay, minimum-expected-delay paths over the 1/lambda graph,
// one-relay spray-and-wait (full, subset-restricted, and optimal-subset), and
// the source spraying decomposition. Delays are seconds; an unreachable
// outcome is +infinity and serializes as the literal "inf".

#include <Eigen/Dense>
#include <iosfwd>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "tdtn/trace.hpp"

namespace tdtn {

// Symmetric n x n matrix of contact rates (per second). The diagonal is zero
// by convention and never read; lambda(i,j) == 0 encodes a pair that never
// meets.
using RateMatrix = Eigen::MatrixXd;

inline double infinite_delay() { return std::numeric_limits<double>::infinity(); }

bool is_valid_rate_matrix(const Eigen::Ref<const RateMatrix>& m, double tolerance = 0.0);

struct DelayQuery {
  NodeId s = 0;
  NodeId d = 0;
};

struct PathDelay {
  std::vector<NodeId> path;  // s..d; empty when unreachable
  double expected_delay = 0.0;
};

struct SpraySolution {
  std::set<NodeId> relays;      // subset R (may contain d)
  double expected_delay = 0.0;  // +inf when no finite subset exists
  double lambda_big = 0.0;      // sum of lambda_sr over R
};

struct SprayDecomposition {
  double lambda_big = 0.0;         // total encounter rate of the source
  Eigen::VectorXd probabilities;   // per node, lambda_sr / lambda_big; 0 at s
};

// lambda_ij = 1 / mean_ij for the given pairs (0 elsewhere). Pairs without a
// defined mean are skipped. The matrix is n x n with n from the table.
RateMatrix rates_from_table(const InterContactTable& table, const std::set<PairKey>& pairs);
RateMatrix rates_from_table(const InterContactTable& table);  // every pair with a mean

// Expected direct-wait delivery delay: 1/lambda_sd, +inf when the pair never
// meets.
double wait_delay(const Eigen::Ref<const RateMatrix>& m, const DelayQuery& q);

// Lowest-weight path under weights 1/lambda_ij and its expected delay (the
// sum of hop weights). Ties broken toward smaller node ids.
PathDelay med_path(const Eigen::Ref<const RateMatrix>& m, const DelayQuery& q);

// One-relay spray-and-wait over all neighbours of s. A reachable relay that
// never meets d makes the expectation infinite (the bundle can strand there).
// `source_isolated` distinguishes a source with no contacts at all.
struct OneSwDelay {
  double expected_delay = 0.0;
  bool source_isolated = false;
};
OneSwDelay one_sw_delay(const Eigen::Ref<const RateMatrix>& m, const DelayQuery& q);

// Spray restricted to relay subset R (1/lambda_dd taken as 0 when d is in R).
double one_sw_subset_delay(const Eigen::Ref<const RateMatrix>& m, const DelayQuery& q,
                           const std::set<NodeId>& relays);

// Optimal relay subset: candidates sorted by ascending relay cost 1/lambda_rd
// (d first, cost 0), added while the cost is below the running objective.
// The prefix rule is exact for this ratio objective; the test suite checks it
// against exhaustive subset enumeration.
SpraySolution one_sw_star(const Eigen::Ref<const RateMatrix>& m, const DelayQuery& q);

// Total encounter rate of s and the first-encounter probabilities.
// Throws std::domain_error when s meets nobody.
SprayDecomposition spray_decomposition(const Eigen::Ref<const RateMatrix>& m, NodeId s);

// ---------------------------------------------------------------------------
// Matrix I/O: sparse triples `i,j,lambda_per_second`, one line per unordered
// pair, labels as node names. Node ids are assigned in lexicographic label
// order on load unless a roster is given.
// ---------------------------------------------------------------------------

void write_rate_matrix(std::ostream& out, const Eigen::Ref<const RateMatrix>& m,
                       const std::vector<std::string>& labels);

struct LoadedRates {
  RateMatrix matrix;
  std::vector<std::string> labels;
};
LoadedRates read_rate_matrix(std::istream& in, const std::vector<std::string>* roster = nullptr);
LoadedRates load_rate_matrix(const std::string& path,
                             const std::vector<std::string>* roster = nullptr);

// Formats a delay for reports: plain decimal seconds, or "inf".
std::string format_delay(double seconds);

}  // namespace tdtn
