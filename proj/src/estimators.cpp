#include "comprate/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "comprate/errors.hpp"
#include "comprate/rng.hpp"

namespace comprate {

namespace {

// Sampled label counts per (block, bit position). h_{t,i} predicts the same
// label on every point of a bit class, so these tallies determine every
// reachable code's training error in O(bit_width).
struct ClassTallies {
    std::vector<std::uint32_t> ones;   // size k * bit_width, row-major by block
    std::vector<std::uint32_t> zeros;
};

ClassTallies tally_sample(const Sample& sample, const BlockGeometry& g) {
    ClassTallies t;
    t.ones.assign(g.k * g.bit_width, 0);
    t.zeros.assign(g.k * g.bit_width, 0);
    for (const LabeledExample& ex : sample) {
        if (ex.instance_index >= g.support_size) {
            throw std::invalid_argument("sample index outside the geometry's support");
        }
        const std::uint64_t slot =
            (g.block_of(ex.instance_index) - 1) * g.bit_width + g.bit_position(ex.instance_index);
        if (ex.label) {
            ++t.ones[slot];
        } else {
            ++t.zeros[slot];
        }
    }
    return t;
}

// Training errors of the block-t sub-hypothesis with bit pattern `pattern`
// on the sample points of block t.
std::uint64_t block_error_count(const ClassTallies& t, const BlockGeometry& g, std::uint64_t blk,
                                std::uint64_t pattern) {
    const std::uint32_t* ones = t.ones.data() + (blk - 1) * g.bit_width;
    const std::uint32_t* zeros = t.zeros.data() + (blk - 1) * g.bit_width;
    std::uint64_t errors = 0;
    for (unsigned r = 0; r < g.bit_width; ++r) {
        errors += ((pattern >> r) & 1u) ? zeros[r] : ones[r];
    }
    return errors;
}

// Closed-form conditional risks of the planted distribution. Every point of
// block t predicted with its majority label errs with probability
// (1 - eps)/2; each mismatched bit position adds eps times the class weight.
struct BlockRiskModel {
    double eps = 0.0;
    double base_risk = 0.0;                  // (1 - eps) / 2
    std::vector<double> weight;              // bit class weight per position
    std::vector<std::uint64_t> opt_pattern;  // per block, bits of the sign matrix

    BlockRiskModel(const SignMatrix& sigma, const BlockGeometry& g, double eps_in) {
        if (sigma.k != g.k || sigma.bit_width != g.bit_width) {
            throw std::invalid_argument("sign matrix does not match geometry");
        }
        eps = eps_in;
        base_risk = 0.5 - 0.5 * eps;
        weight.resize(g.bit_width);
        for (unsigned r = 0; r < g.bit_width; ++r) weight[r] = g.bit_class_weight(r);
        opt_pattern.resize(g.k);
        for (std::uint64_t t = 1; t <= g.k; ++t) {
            std::uint64_t p = 0;
            for (unsigned r = 0; r < g.bit_width; ++r) {
                if (sigma.sign(t, r) > 0) p |= std::uint64_t{1} << r;
            }
            opt_pattern[t - 1] = p;
        }
    }

    double block_true_risk(std::uint64_t blk, std::uint64_t pattern) const {
        std::uint64_t diff = pattern ^ opt_pattern[blk - 1];
        double excess = 0.0;
        while (diff != 0) {
            const unsigned r = static_cast<unsigned>(std::countr_zero(diff));
            excess += weight[r];
            diff &= diff - 1;
        }
        return base_risk + eps * excess;
    }
};

double resolve_epsilon(const BlockGeometry& g, std::optional<double> epsilon_override) {
    const double eps = epsilon_override ? *epsilon_override : epsilon(g);
    if (!(eps >= 0.0 && eps <= 1.0)) {
        throw config_error("epsilon must lie in [0,1]");
    }
    return eps;
}

void check_enumeration_budget(const Sample& sample, const BlockGeometry& g) {
    const double count = std::pow(static_cast<double>(sample.size()), static_cast<double>(g.k));
    if (!(count <= 1e7)) {
        throw resource_limit_error("enumeration requires n^k <= 1e7");
    }
}

// True risk of a full code vector through the same per-block closed form
// used by reachable_min_true_risk, so ERM excess stays exactly nonnegative.
double decomposed_true_risk(const CodeVector& code, const BlockRiskModel& model,
                            const BlockGeometry& g) {
    double sum = 0.0;
    for (std::uint64_t t = 1; t <= g.k; ++t) {
        sum += model.block_true_risk(t, code.codes[t - 1] - g.code_base(t));
    }
    return sum / static_cast<double>(g.k);
}

void parallel_for_index(std::uint64_t count, const std::function<void(std::uint64_t)>& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::uint64_t workers = std::min<std::uint64_t>(hw, count);
    if (workers <= 1) {
        for (std::uint64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::mutex error_mutex;
    std::exception_ptr first_error;
    const std::uint64_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint64_t w = 0; w < workers; ++w) {
        const std::uint64_t begin = w * chunk;
        const std::uint64_t end = std::min(count, begin + chunk);
        pool.emplace_back([&, begin, end] {
            try {
                for (std::uint64_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

const char* measure_name(Measure m) noexcept {
    return m == Measure::agnostic_excess ? "ag" : "uc";
}

std::optional<Measure> parse_measure(std::string_view name) noexcept {
    if (name == "ag") return Measure::agnostic_excess;
    if (name == "uc") return Measure::uniform_convergence;
    return std::nullopt;
}

double excess_floor_constant() noexcept { return 1.0 / (16.0 * std::exp(4.0)); }

CandidateSets candidate_sets(const Sample& sample, const BlockGeometry& g) {
    if (sample.empty()) {
        throw std::invalid_argument("candidate_sets: sample must be nonempty");
    }
    std::vector<std::uint8_t> seen(g.support_size, 0);
    for (const LabeledExample& ex : sample) {
        if (ex.instance_index >= g.support_size) {
            throw std::invalid_argument("candidate_sets: sample index outside support");
        }
        seen[ex.instance_index] = 1;
    }
    CandidateSets cs;
    cs.variant = g.variant;
    cs.per_block.resize(g.k);
    if (g.variant == Variant::order_independent) {
        for (std::uint64_t t = 1; t <= g.k; ++t) {
            auto& block = cs.per_block[t - 1];
            const std::uint64_t base = g.block_start(t);
            block.push_back(base);  // default code, always reachable
            for (std::uint64_t off = 0; off < g.block_size; ++off) {
                const std::uint64_t j = base + off;
                if (seen[j] && j != base) block.push_back(j);
            }
        }
    } else {
        std::vector<std::uint64_t> sampled;
        for (std::uint64_t j = 0; j < g.support_size; ++j) {
            if (seen[j]) sampled.push_back(j);
        }
        for (auto& block : cs.per_block) block = sampled;
    }
    return cs;
}

ErmResult erm_blockwise(const Sample& sample, const BlockGeometry& g) {
    if (sample.empty()) {
        throw std::invalid_argument("erm_blockwise: sample must be nonempty");
    }
    const CandidateSets cs = candidate_sets(sample, g);
    const ClassTallies tallies = tally_sample(sample, g);

    ErmResult result;
    result.code.codes.resize(g.k);
    result.argument.variant = g.variant;

    if (g.variant == Variant::order_independent) {
        std::uint64_t total = 0;
        for (std::uint64_t t = 1; t <= g.k; ++t) {
            const std::uint64_t base = g.code_base(t);
            std::uint64_t best_code = 0;
            std::uint64_t best_err = std::numeric_limits<std::uint64_t>::max();
            for (std::uint64_t cand : cs.per_block[t - 1]) {  // ascending: ties -> smallest code
                const std::uint64_t err = block_error_count(tallies, g, t, cand - base);
                if (err < best_err) {
                    best_err = err;
                    best_code = cand;
                }
            }
            result.code.codes[t - 1] = best_code;
            total += best_err;
            if (best_code != base) result.argument.members.push_back(best_code);
        }
        result.misclassified = total;
        return result;
    }

    // Order-dependent: per-block best over the sampled candidates, then the
    // best zero-suffix cut. Cuts scan ascending so ties give the shortest
    // sequence, i.e. the lexicographically smallest code vector.
    std::vector<std::uint64_t> best_code(g.k), best_err(g.k), zero_err(g.k);
    for (std::uint64_t t = 1; t <= g.k; ++t) {
        std::uint64_t bc = 0;
        std::uint64_t be = std::numeric_limits<std::uint64_t>::max();
        for (std::uint64_t cand : cs.per_block[t - 1]) {
            const std::uint64_t err = block_error_count(tallies, g, t, cand);
            if (err < be) {
                be = err;
                bc = cand;
            }
        }
        best_code[t - 1] = bc;
        best_err[t - 1] = be;
        zero_err[t - 1] = block_error_count(tallies, g, t, 0);
    }
    std::uint64_t best_cut = 0;
    std::uint64_t best_total = std::numeric_limits<std::uint64_t>::max();
    for (std::uint64_t cut = 0; cut <= g.k; ++cut) {
        std::uint64_t total = 0;
        for (std::uint64_t t = 1; t <= g.k; ++t) {
            total += (t <= cut) ? best_err[t - 1] : zero_err[t - 1];
        }
        if (total < best_total) {
            best_total = total;
            best_cut = cut;
        }
    }
    for (std::uint64_t t = 1; t <= g.k; ++t) {
        result.code.codes[t - 1] = (t <= best_cut) ? best_code[t - 1] : 0;
    }
    result.argument.members.assign(best_code.begin(), best_code.begin() + best_cut);
    result.misclassified = best_total;
    return result;
}

std::vector<CodeVector> enumerate_reachable_codes(const Sample& sample, const BlockGeometry& g) {
    if (sample.empty()) {
        throw std::invalid_argument("enumerate_reachable_codes: sample must be nonempty");
    }
    check_enumeration_budget(sample, g);
    const std::uint64_t n = sample.size();
    std::vector<CodeVector> codes;
    CompressionSet s;
    s.variant = g.variant;

    if (g.variant == Variant::order_independent) {
        // All position subsets of size 0..k.
        std::vector<std::uint64_t> chosen;
        auto recurse = [&](auto&& self, std::uint64_t start) -> void {
            s.members.clear();
            for (std::uint64_t p : chosen) s.members.push_back(sample[p].instance_index);
            codes.push_back(reconstruct_multiset(s, g));
            if (chosen.size() == g.k) return;
            for (std::uint64_t p = start; p < n; ++p) {
                chosen.push_back(p);
                self(self, p + 1);
                chosen.pop_back();
            }
        };
        recurse(recurse, 0);
    } else {
        // All position sequences of length 0..k, order and repetition free.
        std::vector<std::uint64_t> chosen;
        auto recurse = [&](auto&& self) -> void {
            s.members.clear();
            for (std::uint64_t p : chosen) s.members.push_back(sample[p].instance_index);
            codes.push_back(reconstruct_sequence(s, g));
            if (chosen.size() == g.k) return;
            for (std::uint64_t p = 0; p < n; ++p) {
                chosen.push_back(p);
                self(self);
                chosen.pop_back();
            }
        };
        recurse(recurse);
    }
    return codes;
}

CodeVector erm_naive(const Sample& sample, const BlockGeometry& g) {
    const std::vector<CodeVector> codes = enumerate_reachable_codes(sample, g);
    const auto training_errors = [&](const CodeVector& code) {
        const Hypothesis h = code_to_hypothesis(code, g);
        std::uint64_t wrong = 0;
        for (const LabeledExample& ex : sample) {
            wrong += (h[ex.instance_index] != ex.label) ? 1 : 0;
        }
        return wrong;
    };
    const CodeVector* best = &codes.front();  // enumeration always yields the empty set
    std::uint64_t best_wrong = training_errors(*best);
    for (const CodeVector& code : codes) {
        const std::uint64_t wrong = training_errors(code);
        if (wrong < best_wrong || (wrong == best_wrong && code < *best)) {
            best_wrong = wrong;
            best = &code;
        }
    }
    return *best;
}

double reachable_min_true_risk(const Sample& sample, const SignMatrix& sigma,
                               const BlockGeometry& g, std::optional<double> epsilon_override) {
    const double eps = resolve_epsilon(g, epsilon_override);
    const BlockRiskModel model(sigma, g, eps);
    const CandidateSets cs = candidate_sets(sample, g);

    if (g.variant == Variant::order_independent) {
        double sum = 0.0;
        for (std::uint64_t t = 1; t <= g.k; ++t) {
            const std::uint64_t base = g.code_base(t);
            double best = std::numeric_limits<double>::infinity();
            for (std::uint64_t cand : cs.per_block[t - 1]) {
                best = std::min(best, model.block_true_risk(t, cand - base));
            }
            sum += best;
        }
        return sum / static_cast<double>(g.k);
    }

    std::vector<double> best_true(g.k), zero_true(g.k);
    for (std::uint64_t t = 1; t <= g.k; ++t) {
        double best = std::numeric_limits<double>::infinity();
        for (std::uint64_t cand : cs.per_block[t - 1]) {
            best = std::min(best, model.block_true_risk(t, cand));
        }
        best_true[t - 1] = best;
        zero_true[t - 1] = model.block_true_risk(t, 0);
    }
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::uint64_t cut = 0; cut <= g.k; ++cut) {
        double sum = 0.0;
        for (std::uint64_t t = 1; t <= g.k; ++t) {
            sum += (t <= cut) ? best_true[t - 1] : zero_true[t - 1];
        }
        best_sum = std::min(best_sum, sum);
    }
    return best_sum / static_cast<double>(g.k);
}

double uc_sup_exact(const Sample& sample, const SignMatrix& sigma, const BlockGeometry& g,
                    std::optional<double> epsilon_override) {
    if (sample.empty()) {
        throw std::invalid_argument("uc_sup_exact: sample must be nonempty");
    }
    const double eps = resolve_epsilon(g, epsilon_override);
    const BlockRiskModel model(sigma, g, eps);
    const CandidateSets cs = candidate_sets(sample, g);
    const ClassTallies tallies = tally_sample(sample, g);
    const double n = static_cast<double>(sample.size());
    const double k = static_cast<double>(g.k);

    // Signed deviation contribution of one block's code choice.
    auto deviation = [&](std::uint64_t t, std::uint64_t pattern) {
        return static_cast<double>(block_error_count(tallies, g, t, pattern)) / n -
               model.block_true_risk(t, pattern) / k;
    };

    if (g.variant == Variant::order_independent) {
        double hi = 0.0;
        double lo = 0.0;
        for (std::uint64_t t = 1; t <= g.k; ++t) {
            const std::uint64_t base = g.code_base(t);
            double block_hi = -std::numeric_limits<double>::infinity();
            double block_lo = std::numeric_limits<double>::infinity();
            for (std::uint64_t cand : cs.per_block[t - 1]) {
                const double d = deviation(t, cand - base);
                block_hi = std::max(block_hi, d);
                block_lo = std::min(block_lo, d);
            }
            hi += block_hi;
            lo += block_lo;
        }
        return std::max(hi, -lo);
    }

    std::vector<double> max_dev(g.k), min_dev(g.k), zero_dev(g.k);
    for (std::uint64_t t = 1; t <= g.k; ++t) {
        double block_hi = -std::numeric_limits<double>::infinity();
        double block_lo = std::numeric_limits<double>::infinity();
        for (std::uint64_t cand : cs.per_block[t - 1]) {
            const double d = deviation(t, cand);
            block_hi = std::max(block_hi, d);
            block_lo = std::min(block_lo, d);
        }
        max_dev[t - 1] = block_hi;
        min_dev[t - 1] = block_lo;
        zero_dev[t - 1] = deviation(t, 0);
    }
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (std::uint64_t cut = 0; cut <= g.k; ++cut) {
        double cut_hi = 0.0;
        double cut_lo = 0.0;
        for (std::uint64_t t = 1; t <= g.k; ++t) {
            cut_hi += (t <= cut) ? max_dev[t - 1] : zero_dev[t - 1];
            cut_lo += (t <= cut) ? min_dev[t - 1] : zero_dev[t - 1];
        }
        hi = std::max(hi, cut_hi);
        lo = std::min(lo, cut_lo);
    }
    return std::max(hi, -lo);
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) noexcept {
    return derive_seed(master_seed, trial_index);
}

TrialOutcome run_trial(Measure measure, std::uint64_t n, std::uint64_t k, Variant variant,
                       std::uint64_t seed, std::optional<double> epsilon_override) {
    const BlockGeometry g = make_geometry(n, k, variant);
    const double eps = resolve_epsilon(g, epsilon_override);
    const SignMatrix sigma = sample_sign_matrix(g, derive_seed(seed, 0));
    const FiniteLabelDistribution P = build_distribution(sigma, g, eps);
    const Sample sample = sample_dataset(P, n, derive_seed(seed, 1));

    const BlockRiskModel model(sigma, g, eps);
    TrialOutcome out;
    ErmResult erm = erm_blockwise(sample, g);
    out.erm_true_risk = decomposed_true_risk(erm.code, model, g);
    out.reachable_min_risk = reachable_min_true_risk(sample, sigma, g, eps);
    out.excess = out.erm_true_risk - out.reachable_min_risk;
    out.erm_code = std::move(erm.code);
    if (measure == Measure::uniform_convergence) {
        out.uc_sup = uc_sup_exact(sample, sigma, g, eps);
    }
    return out;
}

RateEstimate monte_carlo(Measure measure, std::uint64_t n, std::uint64_t k, Variant variant,
                         std::uint64_t trials, std::uint64_t master_seed,
                         std::optional<double> epsilon_override) {
    if (trials < 2) {
        throw std::invalid_argument("monte_carlo: trials must be >= 2");
    }
    const BlockGeometry g = make_geometry(n, k, variant);  // surface config errors up front
    const double eps = resolve_epsilon(g, epsilon_override);

    std::vector<double> values(trials);
    parallel_for_index(trials, [&](std::uint64_t i) {
        const TrialOutcome t =
            run_trial(measure, n, k, variant, trial_seed(master_seed, i), epsilon_override);
        values[i] = measure == Measure::agnostic_excess ? t.excess : *t.uc_sup;
    });
    const auto [mean, se] = mean_and_standard_error(values);

    RateEstimate est;
    est.measure = measure;
    est.variant = variant;
    est.n = n;
    est.k = k;
    est.m = g.m;
    est.epsilon = eps;
    est.trials = trials;
    est.mean = mean;
    est.std_error = se;
    est.seed = master_seed;
    return est;
}

std::pair<double, double> mean_and_standard_error(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("mean_and_standard_error: no values");
    }
    // Welford in index order: exact for constant input, deterministic always.
    double mean = 0.0;
    double m2 = 0.0;
    double count = 0.0;
    for (double v : values) {
        count += 1.0;
        const double d1 = v - mean;
        mean += d1 / count;
        m2 += d1 * (v - mean);
    }
    if (values.size() < 2) return {mean, 0.0};
    const double variance = m2 / (count - 1.0);
    return {mean, std::sqrt(variance / count)};
}

FitResult fit_rate_law(std::span<const RatePoint> points, Variant variant) {
    if (points.size() < 3) {
        throw std::invalid_argument("fit_rate_law: need at least 3 points");
    }
    FitResult fit;
    fit.points.reserve(points.size());
    for (const RatePoint& p : points) {
        if (p.n == 0 || p.k == 0) {
            throw std::invalid_argument("fit_rate_law: n and k must be positive");
        }
        if (!(p.rate > 0.0)) {
            throw std::invalid_argument("fit_rate_law: rates must be positive");
        }
        const double x = variant == Variant::order_independent
                             ? std::log2(static_cast<double>(p.n) / static_cast<double>(p.k))
                             : std::log2(static_cast<double>(p.n));
        const double y =
            p.rate * p.rate * static_cast<double>(p.n) / static_cast<double>(p.k);
        fit.points.emplace_back(x, y);
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& [x, y] : fit.points) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= static_cast<double>(fit.points.size());
    mean_y /= static_cast<double>(fit.points.size());
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto& [x, y] : fit.points) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("fit_rate_law: degenerate abscissas (all equal)");
    }
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    if (syy > 0.0) {
        double ss_res = 0.0;
        for (const auto& [x, y] : fit.points) {
            const double r = y - (fit.intercept + fit.slope * x);
            ss_res += r * r;
        }
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    } else {
        fit.r_squared = 1.0;  // all ordinates equal: the flat line fits exactly
    }
    return fit;
}

double upper_bound_uc(std::uint64_t n, std::uint64_t k, Variant variant) {
    if (k == 0 || n <= k) {
        throw std::invalid_argument("upper_bound_uc: requires n > k >= 1");
    }
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    const double class_log = variant == Variant::order_independent
                                 ? kd * (1.0 + std::log(nd / kd))
                                 : kd * std::log(nd);
    return std::sqrt(2.0 * (class_log + std::log(2.0)) / nd);
}

}  // namespace comprate
