#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace comprate {

// Binary label, 0 or 1.
using Label = std::uint8_t;

struct LabeledExample {
    std::uint64_t instance_index = 0;  // index j of the support point x_j
    Label label = 0;
};

// Ordered i.i.d. sample Z_1..Z_n. Order is preserved; order-dependent
// schemes read it.
using Sample = std::vector<LabeledExample>;

// Total label assignment on the experiment support, indexed by support point.
using Hypothesis = std::vector<Label>;

// Distribution over labeled points: X uniform on a finite support of N
// points, P(Y=1 | X=x_j) = eta[j].
class FiniteLabelDistribution {
public:
    explicit FiniteLabelDistribution(std::vector<double> eta);

    std::uint64_t support_size() const noexcept { return eta_.size(); }
    double eta(std::uint64_t j) const { return eta_.at(j); }
    std::span<const double> etas() const noexcept { return eta_; }

private:
    std::vector<double> eta_;
};

// Probability that predicting `predicted` at a point with conditional
// label probability eta_j is wrong.
inline double point_error_probability(Label predicted, double eta_j) noexcept {
    return predicted ? 1.0 - eta_j : eta_j;
}

// R(h;P) = P(h(X) != Y), computed exactly over the support.
double true_risk(const Hypothesis& h, const FiniteLabelDistribution& P);

// Fraction of sample points h misclassifies; a multiple of 1/n.
double empirical_risk(const Hypothesis& h, const Sample& sample);

// Risk of h under P conditioned on X falling in `subset`.
double conditional_risk(const Hypothesis& h, const FiniteLabelDistribution& P,
                        std::span<const std::uint64_t> subset);

// n i.i.d. draws from P; a pure function of the seed.
Sample sample_dataset(const FiniteLabelDistribution& P, std::uint64_t n, std::uint64_t seed);

// Pointwise label flip.
Hypothesis complement(const Hypothesis& h);

}  // namespace comprate
