#include "comprate/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "comprate/estimators.hpp"
#include "comprate/report.hpp"
#include "comprate/rng.hpp"

namespace comprate::validation {

namespace {

constexpr double kTol = 1e-12;

void record_failure(SuiteResult& r, const std::string& msg) {
    ++r.failures;
    if (r.notes.size() < 8) r.notes.push_back(msg);
}

void check(SuiteResult& r, bool ok, const std::string& msg) {
    ++r.cases;
    if (!ok) record_failure(r, msg);
}

CodeVector random_code(const BlockGeometry& g, SplitMix64& rng) {
    CodeVector code;
    code.codes.resize(g.k);
    for (std::uint64_t t = 1; t <= g.k; ++t) {
        code.codes[t - 1] = g.code_base(t) + rng.next_below(g.m);
    }
    return code;
}

Hypothesis random_hypothesis(std::uint64_t size, SplitMix64& rng) {
    Hypothesis h(size);
    for (auto& v : h) v = static_cast<Label>(rng.next_u64() & 1u);
    return h;
}

// All m^k code vectors of a (small) geometry.
std::vector<CodeVector> all_code_vectors(const BlockGeometry& g) {
    std::vector<CodeVector> out;
    CodeVector code;
    code.codes.assign(g.k, 0);
    std::vector<std::uint64_t> digits(g.k, 0);
    for (;;) {
        for (std::uint64_t t = 1; t <= g.k; ++t) code.codes[t - 1] = g.code_base(t) + digits[t - 1];
        out.push_back(code);
        std::uint64_t pos = 0;
        while (pos < g.k && ++digits[pos] == g.m) digits[pos++] = 0;
        if (pos == g.k) break;
    }
    return out;
}

struct TrialData {
    SignMatrix sigma;
    FiniteLabelDistribution P;
    Sample sample;
};

TrialData draw_trial_data(const BlockGeometry& g, std::uint64_t seed) {
    SignMatrix sigma = sample_sign_matrix(g, derive_seed(seed, 0));
    FiniteLabelDistribution P = build_distribution(sigma, g);
    Sample sample = sample_dataset(P, g.n, derive_seed(seed, 1));
    return TrialData{std::move(sigma), std::move(P), std::move(sample)};
}

}  // namespace

double chi_square_upper_tail(double statistic, unsigned df) {
    return boost::math::gamma_q(static_cast<double>(df) / 2.0, statistic / 2.0);
}

double brute_force_min_true_risk(const Sample& sample, const FiniteLabelDistribution& P,
                                 const BlockGeometry& g) {
    double best = std::numeric_limits<double>::infinity();
    for (const CodeVector& code : enumerate_reachable_codes(sample, g)) {
        best = std::min(best, true_risk(code_to_hypothesis(code, g), P));
    }
    return best;
}

double brute_force_uc_sup(const Sample& sample, const FiniteLabelDistribution& P,
                          const BlockGeometry& g) {
    double sup = 0.0;
    for (const CodeVector& code : enumerate_reachable_codes(sample, g)) {
        const Hypothesis h = code_to_hypothesis(code, g);
        sup = std::max(sup, std::abs(empirical_risk(h, sample) - true_risk(h, P)));
    }
    return sup;
}

SuiteResult check_model_identities(std::uint64_t seed) {
    SuiteResult r;
    r.name = "model-identities";
    SplitMix64 rng(seed);
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t size = 1 + rng.next_below(64);
        std::vector<double> eta(size);
        for (auto& e : eta) e = rng.next_unit();
        const FiniteLabelDistribution P(std::move(eta));
        const Hypothesis h = random_hypothesis(size, rng);

        const double risk = true_risk(h, P);
        check(r, risk >= 0.0 && risk <= 1.0, "true risk outside [0,1]");
        check(r, std::abs(true_risk(complement(h), P) - (1.0 - risk)) <= kTol,
              "label-flip symmetry violated");

        const Sample sample = sample_dataset(P, 50, rng.next_u64());
        const double emp = empirical_risk(h, sample);
        const double scaled = emp * 50.0;
        check(r, std::abs(scaled - std::round(scaled)) <= 1e-9,
              "empirical risk is not a multiple of 1/n");

        // Average of conditional risks over an equal partition equals the risk.
        std::uint64_t cells = 1;
        for (std::uint64_t d : {std::uint64_t{2}, std::uint64_t{4}, std::uint64_t{8}}) {
            if (size % d == 0) cells = d;
        }
        const std::uint64_t cell_size = size / cells;
        double avg = 0.0;
        for (std::uint64_t c = 0; c < cells; ++c) {
            std::vector<std::uint64_t> subset(cell_size);
            std::iota(subset.begin(), subset.end(), c * cell_size);
            avg += conditional_risk(h, P, subset);
        }
        avg /= static_cast<double>(cells);
        check(r, std::abs(avg - risk) <= kTol, "conditional decomposition violated");
    }
    return r;
}

SuiteResult check_monte_carlo_consistency(std::uint64_t seed) {
    SuiteResult r;
    r.name = "monte-carlo-consistency";
    SplitMix64 rng(seed);
    std::vector<double> eta(8);
    for (auto& e : eta) e = 0.2 + 0.6 * rng.next_unit();
    const FiniteLabelDistribution P(std::move(eta));
    const Hypothesis h = random_hypothesis(8, rng);
    const double risk = true_risk(h, P);

    constexpr int kSamples = 10000;
    constexpr std::uint64_t kSize = 100;
    std::vector<double> risks(kSamples);
    for (int i = 0; i < kSamples; ++i) {
        risks[i] = empirical_risk(h, sample_dataset(P, kSize, rng.next_u64()));
    }
    const auto [mean, se] = mean_and_standard_error(risks);
    check(r, se > 0.0 && std::abs(mean - risk) <= 5.0 * se,
          "mean empirical risk deviates from true risk by more than 5 standard errors");
    r.notes.push_back("mean=" + format_double(mean) + " true=" + format_double(risk) +
                      " se=" + format_double(se));
    return r;
}

SuiteResult check_construction_coherence(std::uint64_t seed) {
    SuiteResult r;
    r.name = "construction-coherence";
    SplitMix64 rng(seed);
    const BlockGeometry geoms[] = {
        make_geometry(32, 2, Variant::order_independent),
        make_geometry(16, 2, Variant::order_independent),  // m=8: partial sub-blocks
        make_geometry(16, 2, Variant::order_dependent),
        make_geometry(8, 2, Variant::order_dependent),  // block 4, width 3: partial
    };
    for (const BlockGeometry& g : geoms) {
        for (int i = 0; i < 50; ++i) {
            const CodeVector code = random_code(g, rng);
            const Hypothesis h = code_to_hypothesis(code, g);
            bool agree = true;
            for (std::uint64_t j = 0; j < g.support_size; ++j) {
                const std::uint64_t t = g.block_of(j);
                if (h[j] != eval_block_hypothesis(t, code.codes[t - 1], j, g)) agree = false;
            }
            check(r, agree, "code_to_hypothesis disagrees with eval_block_hypothesis");
        }
    }

    // Multiset reconstruction ignores order, duplication and labels.
    const BlockGeometry& oi = geoms[0];
    for (int i = 0; i < 100; ++i) {
        CompressionSet s;
        s.variant = Variant::order_independent;
        const std::uint64_t count = rng.next_below(oi.k + 1);
        for (std::uint64_t c = 0; c < count; ++c) s.members.push_back(rng.next_below(oi.support_size));
        const CodeVector base = reconstruct_multiset(s, oi);

        CompressionSet shuffled = s;
        for (std::size_t a = shuffled.members.size(); a > 1; --a) {
            std::swap(shuffled.members[a - 1], shuffled.members[rng.next_below(a)]);
        }
        check(r, reconstruct_multiset(shuffled, oi) == base,
              "multiset reconstruction depends on member order");

        if (!s.members.empty() && s.members.size() < oi.k) {
            CompressionSet duplicated = s;
            duplicated.members.push_back(duplicated.members[0]);
            check(r, reconstruct_multiset(duplicated, oi) == base,
                  "multiset reconstruction depends on duplication");
        }
    }
    return r;
}

SuiteResult check_algebraic_identities(std::uint64_t seed) {
    SuiteResult r;
    r.name = "algebraic-identities";
    SplitMix64 rng(seed);
    struct Case {
        BlockGeometry g;
        int draws;
    };
    const Case cases[] = {
        {make_geometry(32, 2, Variant::order_independent), 1000},
        {make_geometry(16, 2, Variant::order_dependent), 1000},
        {make_geometry(16, 2, Variant::order_independent), 250},  // partial sub-blocks
        {make_geometry(8, 2, Variant::order_dependent), 250},     // partial sub-blocks
    };
    for (const Case& c : cases) {
        const BlockGeometry& g = c.g;
        const double eps = epsilon(g);
        const bool divisible = g.block_size % g.bit_width == 0;
        if (divisible) {
            for (unsigned pos = 0; pos < g.bit_width; ++pos) {
                check(r,
                      std::abs(g.bit_class_weight(pos) - 1.0 / static_cast<double>(g.bit_width)) <=
                          1e-15,
                      "divisible geometry must have uniform bit class weights");
            }
        }
        for (int i = 0; i < c.draws; ++i) {
            const SignMatrix sigma = sample_sign_matrix(g, rng.next_u64());
            const FiniteLabelDistribution P = build_distribution(sigma, g);
            const CodeVector code = random_code(g, rng);
            const Hypothesis h = code_to_hypothesis(code, g);

            // R(h) = (1/k) sum_t R_t(h), for reconstructed and arbitrary h.
            double avg = 0.0;
            for (std::uint64_t t = 1; t <= g.k; ++t) {
                avg += conditional_risk(h, P, g.block_indices(t));
            }
            avg /= static_cast<double>(g.k);
            check(r, std::abs(avg - true_risk(h, P)) <= kTol, "risk decomposition violated");

            const Hypothesis any = random_hypothesis(g.support_size, rng);
            double avg_any = 0.0;
            for (std::uint64_t t = 1; t <= g.k; ++t) {
                avg_any += conditional_risk(any, P, g.block_indices(t));
            }
            avg_any /= static_cast<double>(g.k);
            check(r, std::abs(avg_any - true_risk(any, P)) <= kTol,
                  "risk decomposition violated for arbitrary hypothesis");

            // Excess of a block code over the block optimum is eps times the
            // weighted bit mismatch count.
            const std::uint64_t t = 1 + rng.next_below(g.k);
            const CodeVector best = optimal_code(sigma, g);
            const Hypothesis h_best = code_to_hypothesis(best, g);
            const auto block = g.block_indices(t);
            const double gap =
                conditional_risk(h, P, block) - conditional_risk(h_best, P, block);
            const std::uint64_t diff =
                (code.codes[t - 1] - g.code_base(t)) ^ (best.codes[t - 1] - g.code_base(t));
            double weighted = 0.0;
            for (unsigned pos = 0; pos < g.bit_width; ++pos) {
                if ((diff >> pos) & 1u) weighted += g.bit_class_weight(pos);
            }
            check(r, std::abs(gap - eps * weighted) <= kTol, "weighted bit-excess identity violated");
        }
    }
    return r;
}

SuiteResult check_binomial_law(std::uint64_t seed) {
    SuiteResult r;
    r.name = "binomial-law";
    SplitMix64 rng(seed);
    struct Case {
        BlockGeometry g;
        const char* name;
    };
    const Case cases[] = {
        {make_geometry(32, 2, Variant::order_independent), "oi n=32 k=2"},
        {make_geometry(16, 2, Variant::order_dependent), "od n=16 k=2"},
    };
    constexpr std::uint64_t kDraws = 100000;
    for (const Case& c : cases) {
        const BlockGeometry& g = c.g;
        const SignMatrix sigma = sample_sign_matrix(g, rng.next_u64());
        const std::uint64_t t = 1;
        const unsigned w = g.bit_width;
        std::vector<std::uint64_t> observed(w + 1, 0);
        for (std::uint64_t i = 0; i < kDraws; ++i) {
            // A uniformly drawn code: for the order-independent scheme, a
            // uniform point of block t; for the order-dependent one, a uniform
            // support point.
            const std::uint64_t code = g.variant == Variant::order_independent
                                           ? g.block_start(t) + rng.next_below(g.block_size)
                                           : rng.next_below(g.m);
            ++observed[hamming_delta(t, code, sigma, g)];
        }
        double statistic = 0.0;
        double coeff = 1.0;  // binomial(w, l)
        for (unsigned l = 0; l <= w; ++l) {
            const double expected = static_cast<double>(kDraws) * coeff * std::ldexp(1.0, -int(w));
            const double d = static_cast<double>(observed[l]) - expected;
            statistic += d * d / expected;
            coeff = coeff * static_cast<double>(w - l) / static_cast<double>(l + 1);
        }
        const double p = chi_square_upper_tail(statistic, w);
        check(r, p > 0.001, std::string("hamming distance not Binomial(w,1/2) on ") + c.name);
        r.notes.push_back(std::string(c.name) + ": chi2=" + format_double(statistic) +
                          " p=" + format_double(p));
    }
    return r;
}

SuiteResult check_optimal_code(std::uint64_t seed) {
    SuiteResult r;
    r.name = "optimal-code";
    SplitMix64 rng(seed);
    const BlockGeometry geoms[] = {
        make_geometry(6, 2, Variant::order_independent),
        make_geometry(8, 2, Variant::order_independent),
        make_geometry(8, 2, Variant::order_dependent),
        make_geometry(16, 2, Variant::order_dependent),
    };
    for (const BlockGeometry& g : geoms) {
        const double eps = epsilon(g);
        const std::vector<CodeVector> everything = all_code_vectors(g);
        for (int i = 0; i < 20; ++i) {
            const SignMatrix sigma = sample_sign_matrix(g, rng.next_u64());
            const FiniteLabelDistribution P = build_distribution(sigma, g);
            const CodeVector best = optimal_code(sigma, g);
            const double best_risk = true_risk(code_to_hypothesis(best, g), P);
            check(r, std::abs(best_risk - 0.5 * (1.0 - eps)) <= kTol,
                  "optimal code risk differs from (1-eps)/2");
            bool beaten = false;
            for (const CodeVector& code : everything) {
                if (true_risk(code_to_hypothesis(code, g), P) < best_risk - 1e-15) beaten = true;
            }
            check(r, !beaten, "a code vector beats optimal_code");
        }
    }
    return r;
}

SuiteResult check_oracle_equivalence(std::uint64_t seed, bool inject_fault) {
    SuiteResult r;
    r.name = "oracle-equivalence";
    struct Config {
        std::uint64_t n, k;
    };
    const Config configs[] = {{4, 1}, {6, 2}, {8, 2}};
    const Variant variants[] = {Variant::order_independent, Variant::order_dependent};
    SplitMix64 rng(seed);
    for (Variant variant : variants) {
        for (const Config& cfg : configs) {
            const BlockGeometry g = make_geometry(cfg.n, cfg.k, variant);
            for (int trial = 0; trial < 200; ++trial) {
                const TrialData data = draw_trial_data(g, rng.next_u64());

                ErmResult erm = erm_blockwise(data.sample, g);
                check(r, reconstruct(erm.argument, g) == erm.code,
                      "ERM compression set does not reconstruct the ERM code");
                if (inject_fault) {
                    erm.code.codes[0] ^= 1;  // simulated implementation bug
                }
                const CodeVector naive = erm_naive(data.sample, g);
                const double fast = empirical_risk(code_to_hypothesis(erm.code, g), data.sample);
                const double brute = empirical_risk(code_to_hypothesis(naive, g), data.sample);
                check(r, fast == brute, "blockwise ERM and brute-force ERM risks differ");
                check(r,
                      static_cast<double>(erm.misclassified) /
                              static_cast<double>(data.sample.size()) ==
                          brute,
                      "blockwise ERM misclassified count disagrees with brute force");

                const double min_fast = reachable_min_true_risk(data.sample, data.sigma, g);
                const double min_brute = brute_force_min_true_risk(data.sample, data.P, g);
                check(r, std::abs(min_fast - min_brute) <= kTol,
                      "reachable_min_true_risk disagrees with enumeration");

                const double sup_fast = uc_sup_exact(data.sample, data.sigma, g);
                const double sup_brute = brute_force_uc_sup(data.sample, data.P, g);
                check(r, std::abs(sup_fast - sup_brute) <= kTol,
                      "uc_sup_exact disagrees with enumeration");
            }
        }
    }
    return r;
}

SuiteResult check_trial_contracts(std::uint64_t seed) {
    SuiteResult r;
    r.name = "trial-contracts";
    SplitMix64 rng(seed);
    struct Config {
        std::uint64_t n, k;
        Variant variant;
    };
    const Config configs[] = {{32, 2, Variant::order_independent},
                              {16, 2, Variant::order_dependent}};
    for (const Config& cfg : configs) {
        const BlockGeometry g = make_geometry(cfg.n, cfg.k, cfg.variant);
        for (int i = 0; i < 100; ++i) {
            const std::uint64_t s = rng.next_u64();
            const TrialOutcome a = run_trial(Measure::uniform_convergence, cfg.n, cfg.k,
                                             cfg.variant, s);
            check(r, a.excess >= 0.0, "trial excess is negative");
            const TrialOutcome b = run_trial(Measure::uniform_convergence, cfg.n, cfg.k,
                                             cfg.variant, s);
            check(r,
                  a.erm_code == b.erm_code && a.erm_true_risk == b.erm_true_risk &&
                      a.reachable_min_risk == b.reachable_min_risk && a.excess == b.excess &&
                      a.uc_sup == b.uc_sup,
                  "run_trial is not a pure function of its seed");

            // Decomposition consistency against the plain risk operations.
            const TrialData data = draw_trial_data(g, s);
            const ErmResult erm = erm_blockwise(data.sample, g);
            const Hypothesis h = code_to_hypothesis(erm.code, g);
            check(r,
                  empirical_risk(h, data.sample) ==
                      static_cast<double>(erm.misclassified) /
                          static_cast<double>(data.sample.size()),
                  "blockwise error count disagrees with empirical_risk");
            check(r, std::abs(true_risk(h, data.P) - a.erm_true_risk) <= kTol,
                  "decomposed ERM true risk disagrees with true_risk");
        }

        // Epsilon forced to zero: every hypothesis has risk 1/2 and the
        // excess vanishes exactly.
        for (int i = 0; i < 20; ++i) {
            const TrialOutcome t =
                run_trial(Measure::agnostic_excess, cfg.n, cfg.k, cfg.variant, rng.next_u64(), 0.0);
            check(r, t.excess == 0.0, "excess not exactly zero under the epsilon=0 hook");
        }

        // Monte Carlo purity and per-trial seed derivation.
        const RateEstimate e1 = monte_carlo(Measure::agnostic_excess, cfg.n, cfg.k, cfg.variant,
                                            50, seed);
        const RateEstimate e2 = monte_carlo(Measure::agnostic_excess, cfg.n, cfg.k, cfg.variant,
                                            50, seed);
        check(r, e1.mean == e2.mean && e1.std_error == e2.std_error,
              "monte_carlo is not a pure function of its arguments");
        std::vector<double> manual(50);
        for (std::uint64_t i = 0; i < 50; ++i) {
            manual[i] =
                run_trial(Measure::agnostic_excess, cfg.n, cfg.k, cfg.variant, trial_seed(seed, i))
                    .excess;
        }
        const auto [mean, se] = mean_and_standard_error(manual);
        check(r, mean == e1.mean && se == e1.std_error,
              "monte_carlo trial seeds deviate from the derivation contract");
    }
    return r;
}

SuiteResult check_rate_floor(std::uint64_t seed) {
    SuiteResult r;
    r.name = "rate-floor";
    struct Config {
        std::uint64_t n, k;
        Variant variant;
    };
    const Config configs[] = {
        {64, 2, Variant::order_independent},  {256, 2, Variant::order_independent},
        {256, 4, Variant::order_independent}, {1024, 4, Variant::order_independent},
        {64, 2, Variant::order_dependent},    {256, 2, Variant::order_dependent},
    };
    const double floor_coeff = excess_floor_constant();
    double smallest_ratio_holding = std::numeric_limits<double>::infinity();
    for (const Config& cfg : configs) {
        const BlockGeometry g = make_geometry(cfg.n, cfg.k, cfg.variant);
        const double eps = epsilon(g);
        check(r, eps <= 0.5, "rate-floor config has eps > 1/2");
        const RateEstimate est =
            monte_carlo(Measure::agnostic_excess, cfg.n, cfg.k, cfg.variant, 400, seed);
        const bool holds = est.mean >= floor_coeff * eps;
        check(r, holds, std::string("mean excess below the floor at ") + variant_name(cfg.variant) +
                            " n=" + format_u64(cfg.n) + " k=" + format_u64(cfg.k));
        check(r, est.mean > 0.0 && est.mean < eps, "mean excess outside (0, eps)");
        if (holds) {
            smallest_ratio_holding = std::min(
                smallest_ratio_holding, static_cast<double>(cfg.n) / static_cast<double>(cfg.k));
        }
    }
    r.notes.push_back("smallest tested n/k with the floor holding: " +
                      format_double(smallest_ratio_holding));
    return r;
}

std::vector<SuiteResult> run_all(const Options& options) {
    std::vector<SuiteResult> results;
    results.push_back(check_model_identities(options.seed));
    results.push_back(check_monte_carlo_consistency(derive_seed(options.seed, 1)));
    results.push_back(check_construction_coherence(derive_seed(options.seed, 2)));
    results.push_back(check_algebraic_identities(derive_seed(options.seed, 3)));
    results.push_back(check_binomial_law(derive_seed(options.seed, 4)));
    results.push_back(check_optimal_code(derive_seed(options.seed, 5)));
    results.push_back(check_oracle_equivalence(derive_seed(options.seed, 6), options.inject_fault));
    results.push_back(check_trial_contracts(derive_seed(options.seed, 7)));
    results.push_back(check_rate_floor(derive_seed(options.seed, 8)));
    return results;
}

}  // namespace comprate::validation
