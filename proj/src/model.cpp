#include "comprate/model.hpp"

#include <stdexcept>

#include "comprate/rng.hpp"

namespace comprate {

FiniteLabelDistribution::FiniteLabelDistribution(std::vector<double> eta) : eta_(std::move(eta)) {
    if (eta_.empty()) {
        throw std::invalid_argument("FiniteLabelDistribution: support must be nonempty");
    }
    for (double e : eta_) {
        if (!(e >= 0.0 && e <= 1.0)) {
            throw std::invalid_argument("FiniteLabelDistribution: eta outside [0,1]");
        }
    }
}

double true_risk(const Hypothesis& h, const FiniteLabelDistribution& P) {
    if (h.size() != P.support_size()) {
        throw std::invalid_argument("true_risk: hypothesis length does not match support size");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) {
        sum += point_error_probability(h[j], P.etas()[j]);
    }
    return sum / static_cast<double>(h.size());
}

double empirical_risk(const Hypothesis& h, const Sample& sample) {
    if (sample.empty()) {
        throw std::invalid_argument("empirical_risk: sample must be nonempty");
    }
    std::uint64_t wrong = 0;
    for (const LabeledExample& ex : sample) {
        if (ex.instance_index >= h.size()) {
            throw std::invalid_argument("empirical_risk: instance index outside hypothesis support");
        }
        wrong += (h[ex.instance_index] != ex.label) ? 1 : 0;
    }
    return static_cast<double>(wrong) / static_cast<double>(sample.size());
}

double conditional_risk(const Hypothesis& h, const FiniteLabelDistribution& P,
                        std::span<const std::uint64_t> subset) {
    if (subset.empty()) {
        throw std::invalid_argument("conditional_risk: subset must be nonempty");
    }
    if (h.size() != P.support_size()) {
        throw std::invalid_argument("conditional_risk: hypothesis length does not match support size");
    }
    double sum = 0.0;
    for (std::uint64_t j : subset) {
        if (j >= h.size()) {
            throw std::invalid_argument("conditional_risk: subset index outside support");
        }
        sum += point_error_probability(h[j], P.etas()[j]);
    }
    return sum / static_cast<double>(subset.size());
}

Sample sample_dataset(const FiniteLabelDistribution& P, std::uint64_t n, std::uint64_t seed) {
    if (n == 0) {
        throw std::invalid_argument("sample_dataset: n must be positive");
    }
    SplitMix64 rng(seed);
    Sample sample;
    sample.reserve(n);
    const std::uint64_t support = P.support_size();
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t j = rng.next_below(support);
        const Label y = rng.next_bernoulli(P.etas()[j]) ? 1 : 0;
        sample.push_back(LabeledExample{j, y});
    }
    return sample;
}

Hypothesis complement(const Hypothesis& h) {
    Hypothesis out(h.size());
    for (std::size_t j = 0; j < h.size(); ++j) out[j] = h[j] ? 0 : 1;
    return out;
}

}  // namespace comprate
