#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "comprate/construction.hpp"
#include "comprate/model.hpp"

namespace comprate {

enum class Measure { agnostic_excess, uniform_convergence };

// Short flag spelling: "ag" / "uc".
const char* measure_name(Measure m) noexcept;
std::optional<Measure> parse_measure(std::string_view name) noexcept;

// Coefficient of the guaranteed excess-risk floor, 1/(16 e^4).
double excess_floor_constant() noexcept;

// Per-block code sets reachable from a sample.
//   order-independent: sampled indices inside block t plus the block-start
//   default, sorted ascending.
//   order-dependent: every block shares the sorted set of all sampled
//   support indices; codes with a zero suffix are reachable in addition
//   (shorter sequences pad with zeros) and are handled implicitly by the
//   operations below.
struct CandidateSets {
    Variant variant = Variant::order_independent;
    std::vector<std::vector<std::uint64_t>> per_block;
};

// Empirical-risk-minimizing reconstruction reachable from the sample.
struct ErmResult {
    CodeVector code;
    CompressionSet argument;           // realizes `code` through reconstruct()
    std::uint64_t misclassified = 0;   // training errors of `code` on the sample
};

struct TrialOutcome {
    CodeVector erm_code;
    double erm_true_risk = 0.0;
    double reachable_min_risk = 0.0;
    double excess = 0.0;                // erm_true_risk - reachable_min_risk, >= 0
    std::optional<double> uc_sup;       // only for Measure::uniform_convergence
};

struct RateEstimate {
    Measure measure = Measure::agnostic_excess;
    Variant variant = Variant::order_independent;
    std::uint64_t n = 0;
    std::uint64_t k = 0;
    std::uint64_t m = 0;
    double epsilon = 0.0;
    std::uint64_t trials = 0;
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t seed = 0;
};

struct RatePoint {
    std::uint64_t n = 0;
    std::uint64_t k = 0;
    double rate = 0.0;
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> points;  // (abscissa, ordinate) actually fit
};

CandidateSets candidate_sets(const Sample& sample, const BlockGeometry& g);

// Blockwise ERM over the reachable class; ties go to the smallest code
// (per block, and to the shortest zero-padded form for the order-dependent
// scheme, i.e. the lexicographically smallest code vector).
ErmResult erm_blockwise(const Sample& sample, const BlockGeometry& g);

// Brute-force ERM: applies the reconstruction to every compression set /
// sequence drawn from the sample. Oracle for erm_blockwise; guarded by an
// n^k <= 1e7 enumeration budget (resource_limit_error beyond it).
CodeVector erm_naive(const Sample& sample, const BlockGeometry& g);

// Every code the reconstruction can produce from the sample, one entry per
// enumerated compression set / sequence (duplicates preserved). Same
// enumeration budget as erm_naive.
std::vector<CodeVector> enumerate_reachable_codes(const Sample& sample, const BlockGeometry& g);

// Exact minimum of true risk over the reachable class, via the per-block
// decomposition (plus the zero-suffix cuts for the order-dependent scheme).
double reachable_min_true_risk(const Sample& sample, const SignMatrix& sigma,
                               const BlockGeometry& g,
                               std::optional<double> epsilon_override = {});

// Exact sup over the reachable class of |empirical risk - true risk|,
// via the signed per-block decomposition.
double uc_sup_exact(const Sample& sample, const SignMatrix& sigma, const BlockGeometry& g,
                    std::optional<double> epsilon_override = {});

// Seed of trial i under a master seed.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) noexcept;

// One integrand sample: draw signs and data, run ERM, evaluate the exact
// excess (and the uniform-convergence supremum when asked for). Pure in the
// seed. `epsilon_override` is a test hook forcing the label bias.
TrialOutcome run_trial(Measure measure, std::uint64_t n, std::uint64_t k, Variant variant,
                       std::uint64_t seed, std::optional<double> epsilon_override = {});

// Monte Carlo estimate over `trials` independent trials with seeds
// trial_seed(master_seed, i). Trials may run concurrently; results land in
// per-trial slots and are reduced in index order, so the estimate is
// bit-identical regardless of scheduling.
RateEstimate monte_carlo(Measure measure, std::uint64_t n, std::uint64_t k, Variant variant,
                         std::uint64_t trials, std::uint64_t master_seed,
                         std::optional<double> epsilon_override = {});

// Mean and standard error (sample stddev / sqrt(count)) reduced in index
// order; exact for constant input.
std::pair<double, double> mean_and_standard_error(std::span<const double> values);

// Least-squares line of y = rate^2 * n / k against x = log2(n/k)
// (order-independent) or x = log2(n) (order-dependent). A positive slope
// evidences the logarithmic factor in the rate; slope ~ 0 its absence.
FitResult fit_rate_law(std::span<const RatePoint> points, Variant variant);

// Finite-class envelope sqrt(2 (k ln(e n / k) + ln 2) / n) for the
// order-independent scheme, with ln(n) replacing ln(e n / k) for the
// order-dependent one. Requires n > k.
double upper_bound_uc(std::uint64_t n, std::uint64_t k, Variant variant);

}  // namespace comprate
