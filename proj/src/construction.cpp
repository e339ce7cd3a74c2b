#include "comprate/construction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string_view>

#include "comprate/errors.hpp"
#include "comprate/rng.hpp"

namespace comprate {

namespace {

void check_block_index(std::uint64_t t, const BlockGeometry& g) {
    if (t < 1 || t > g.k) {
        throw std::invalid_argument("block index must lie in 1..k");
    }
}

void check_code_for_block(std::uint64_t t, std::uint64_t i, const BlockGeometry& g) {
    if (g.variant == Variant::order_independent) {
        const std::uint64_t base = g.code_base(t);
        if (i < base || i >= base + g.m) {
            throw std::invalid_argument("order-independent code must lie in its block");
        }
    } else if (i >= g.m) {
        throw std::invalid_argument("order-dependent code must lie in 0..m-1");
    }
}

std::uint64_t optimal_pattern(const SignMatrix& sigma, std::uint64_t t) {
    std::uint64_t pattern = 0;
    for (unsigned r = 0; r < sigma.bit_width; ++r) {
        if (sigma.sign(t, r) > 0) pattern |= std::uint64_t{1} << r;
    }
    return pattern;
}

}  // namespace

const char* variant_name(Variant v) noexcept {
    return v == Variant::order_independent ? "oi" : "od";
}

std::optional<Variant> parse_variant(std::string_view name) noexcept {
    if (name == "oi") return Variant::order_independent;
    if (name == "od") return Variant::order_dependent;
    return std::nullopt;
}

std::vector<std::uint64_t> BlockGeometry::block_indices(std::uint64_t t) const {
    std::vector<std::uint64_t> out(block_size);
    std::iota(out.begin(), out.end(), block_start(t));
    return out;
}

Label bit(std::uint64_t i, unsigned r) {
    if (r >= 63) {
        throw std::invalid_argument("bit: position must be below 63");
    }
    return static_cast<Label>((i >> r) & 1u);
}

BlockGeometry make_geometry(std::uint64_t n, std::uint64_t k, Variant variant) {
    if (n == 0) throw config_error("geometry requires n >= 1");
    if (k == 0) throw config_error("geometry requires k >= 1");

    BlockGeometry g;
    g.variant = variant;
    g.n = n;
    g.k = k;
    if (variant == Variant::order_independent) {
        if (n / 2 < k) throw config_error("order-independent geometry requires n >= 2k");
        g.m = std::bit_floor(n / k);
        g.support_size = k * g.m;
        g.block_size = g.m;
    } else {
        if (n < 2) throw config_error("order-dependent geometry requires n >= 2");
        g.m = std::bit_floor(n);
        if (g.m % k != 0) {
            throw config_error("order-dependent geometry requires k to divide 2^floor(log2(n))");
        }
        g.support_size = g.m;
        g.block_size = g.m / k;
    }
    g.bit_width = static_cast<unsigned>(std::countr_zero(g.m));
    if (g.bit_width >= 63) throw config_error("geometry requires m < 2^63");
    if (variant == Variant::order_dependent && g.block_size < g.bit_width) {
        throw config_error("order-dependent geometry requires m/k >= log2(m)");
    }
    return g;
}

double epsilon(const BlockGeometry& g) {
    if (g.n == 0 || g.k == 0 || g.block_size == 0 || g.bit_width == 0) {
        throw config_error("epsilon: geometry is not initialized");
    }
    const double eps = std::sqrt(static_cast<double>(g.k) * static_cast<double>(g.bit_width) /
                                 static_cast<double>(g.n));
    if (eps > 1.0) {
        throw config_error("epsilon exceeds 1: n is too small for k * log2(m)");
    }
    return eps;
}

std::int8_t SignMatrix::sign(std::uint64_t t, unsigned r) const {
    if (t < 1 || t > k || r >= bit_width) {
        throw std::invalid_argument("SignMatrix: entry index out of range");
    }
    return entries[(t - 1) * bit_width + r];
}

Label eval_block_hypothesis(std::uint64_t t, std::uint64_t i, std::uint64_t j,
                            const BlockGeometry& g) {
    check_block_index(t, g);
    if (j >= g.support_size || g.block_of(j) != t) {
        throw std::invalid_argument("eval_block_hypothesis: support index outside block");
    }
    check_code_for_block(t, i, g);
    return bit(i - g.code_base(t), g.bit_position(j));
}

Hypothesis code_to_hypothesis(const CodeVector& code, const BlockGeometry& g) {
    if (code.codes.size() != g.k) {
        throw std::invalid_argument("code_to_hypothesis: code vector must have k entries");
    }
    for (std::uint64_t t = 1; t <= g.k; ++t) {
        check_code_for_block(t, code.codes[t - 1], g);
    }
    Hypothesis h(g.support_size);
    for (std::uint64_t t = 1; t <= g.k; ++t) {
        const std::uint64_t pattern = code.codes[t - 1] - g.code_base(t);
        const std::uint64_t start = g.block_start(t);
        for (std::uint64_t off = 0; off < g.block_size; ++off) {
            h[start + off] = static_cast<Label>((pattern >> (off % g.bit_width)) & 1u);
        }
    }
    return h;
}

CodeVector reconstruct_multiset(const CompressionSet& s, const BlockGeometry& g) {
    if (s.variant != Variant::order_independent || g.variant != Variant::order_independent) {
        throw std::invalid_argument("reconstruct_multiset: order-independent inputs required");
    }
    if (s.members.size() > g.k) {
        throw std::invalid_argument("reconstruct_multiset: compression set larger than k");
    }
    constexpr std::uint64_t kMissed = std::numeric_limits<std::uint64_t>::max();
    std::vector<std::uint64_t> smallest(g.k, kMissed);
    for (std::uint64_t idx : s.members) {
        if (idx >= g.support_size) {
            throw std::invalid_argument("reconstruct_multiset: member outside support");
        }
        std::uint64_t& slot = smallest[g.block_of(idx) - 1];
        slot = std::min(slot, idx);
    }
    CodeVector code;
    code.codes.resize(g.k);
    for (std::uint64_t t = 1; t <= g.k; ++t) {
        code.codes[t - 1] = smallest[t - 1] == kMissed ? g.code_base(t) : smallest[t - 1];
    }
    return code;
}

CodeVector reconstruct_sequence(const CompressionSet& s, const BlockGeometry& g) {
    if (s.variant != Variant::order_dependent || g.variant != Variant::order_dependent) {
        throw std::invalid_argument("reconstruct_sequence: order-dependent inputs required");
    }
    if (s.members.size() > g.k) {
        throw std::invalid_argument("reconstruct_sequence: sequence longer than k");
    }
    CodeVector code;
    code.codes.reserve(g.k);
    for (std::uint64_t idx : s.members) {
        if (idx < g.support_size) code.codes.push_back(idx);
    }
    code.codes.resize(g.k, 0);
    return code;
}

CodeVector reconstruct(const CompressionSet& s, const BlockGeometry& g) {
    return g.variant == Variant::order_independent ? reconstruct_multiset(s, g)
                                                   : reconstruct_sequence(s, g);
}

SignMatrix sample_sign_matrix(const BlockGeometry& g, std::uint64_t seed) {
    SignMatrix sigma;
    sigma.k = g.k;
    sigma.bit_width = g.bit_width;
    sigma.entries.resize(g.k * g.bit_width);
    SplitMix64 rng(seed);
    for (std::int8_t& e : sigma.entries) e = rng.next_sign();
    return sigma;
}

FiniteLabelDistribution build_distribution(const SignMatrix& sigma, const BlockGeometry& g,
                                           std::optional<double> epsilon_override) {
    if (sigma.k != g.k || sigma.bit_width != g.bit_width) {
        throw std::invalid_argument("build_distribution: sign matrix does not match geometry");
    }
    const double eps = epsilon_override ? *epsilon_override : epsilon(g);
    if (!(eps >= 0.0 && eps <= 1.0)) {
        throw config_error("build_distribution: epsilon must lie in [0,1]");
    }
    std::vector<double> eta(g.support_size);
    for (std::uint64_t t = 1; t <= g.k; ++t) {
        const std::uint64_t start = g.block_start(t);
        for (std::uint64_t off = 0; off < g.block_size; ++off) {
            const unsigned r = static_cast<unsigned>(off % g.bit_width);
            eta[start + off] = 0.5 + 0.5 * eps * static_cast<double>(sigma.sign(t, r));
        }
    }
    return FiniteLabelDistribution(std::move(eta));
}

CodeVector optimal_code(const SignMatrix& sigma, const BlockGeometry& g) {
    if (sigma.k != g.k || sigma.bit_width != g.bit_width) {
        throw std::invalid_argument("optimal_code: sign matrix does not match geometry");
    }
    CodeVector code;
    code.codes.resize(g.k);
    for (std::uint64_t t = 1; t <= g.k; ++t) {
        code.codes[t - 1] = g.code_base(t) + optimal_pattern(sigma, t);
    }
    return code;
}

unsigned hamming_delta(std::uint64_t t, std::uint64_t i, const SignMatrix& sigma,
                       const BlockGeometry& g) {
    check_block_index(t, g);
    check_code_for_block(t, i, g);
    if (sigma.k != g.k || sigma.bit_width != g.bit_width) {
        throw std::invalid_argument("hamming_delta: sign matrix does not match geometry");
    }
    const std::uint64_t pattern = i - g.code_base(t);
    return static_cast<unsigned>(std::popcount(pattern ^ optimal_pattern(sigma, t)));
}

}  // namespace comprate
