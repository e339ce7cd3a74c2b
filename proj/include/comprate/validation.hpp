#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "comprate/construction.hpp"
#include "comprate/model.hpp"

namespace comprate::validation {

struct SuiteResult {
    std::string name;
    std::uint64_t cases = 0;
    std::uint64_t failures = 0;
    std::vector<std::string> notes;  // first failure details, recorded observations

    bool passed() const noexcept { return failures == 0; }
};

struct Options {
    std::uint64_t seed = 20;
    // Deliberately corrupts one bit of the blockwise ERM result inside the
    // oracle-equivalence suite; the suite must then fail. Exists to prove
    // the suite can detect a broken implementation.
    bool inject_fault = false;
};

SuiteResult check_model_identities(std::uint64_t seed);
SuiteResult check_monte_carlo_consistency(std::uint64_t seed);
SuiteResult check_construction_coherence(std::uint64_t seed);
SuiteResult check_algebraic_identities(std::uint64_t seed);
SuiteResult check_binomial_law(std::uint64_t seed);
SuiteResult check_optimal_code(std::uint64_t seed);
SuiteResult check_oracle_equivalence(std::uint64_t seed, bool inject_fault = false);
SuiteResult check_trial_contracts(std::uint64_t seed);
SuiteResult check_rate_floor(std::uint64_t seed);

// Runs every suite above in a fixed order.
std::vector<SuiteResult> run_all(const Options& options);

// Upper tail of the chi-squared distribution with df degrees of freedom.
double chi_square_upper_tail(double statistic, unsigned df);

// Brute-force references built from enumeration plus the plain risk
// operations only; independent of the decomposition-based estimators.
double brute_force_min_true_risk(const Sample& sample, const FiniteLabelDistribution& P,
                                 const BlockGeometry& g);
double brute_force_uc_sup(const Sample& sample, const FiniteLabelDistribution& P,
                          const BlockGeometry& g);

}  // namespace comprate::validation
