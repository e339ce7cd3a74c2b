#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "comprate/model.hpp"

namespace comprate {

enum class Variant { order_independent, order_dependent };

// Short flag spelling: "oi" / "od".
const char* variant_name(Variant v) noexcept;
std::optional<Variant> parse_variant(std::string_view name) noexcept;

// Block layout shared by the two adversarial constructions.
//
// order-independent: support {0..k*m-1} split into k blocks of m points;
// the codes for block t are the indices of the block itself, so a code's
// bit pattern is its offset from the block start.
//
// order-dependent: support {0..m-1} split into k blocks of m/k points;
// codes are arbitrary support indices, used as raw bit patterns.
//
// Within a block, consecutive runs of bit_width points form sub-blocks;
// the final sub-block may be partial. A point's bit position r is its
// offset within its sub-block, and the bit class (t, r) collects every
// point of block t with position r. All points of one bit class carry the
// same predicted and planted labels.
struct BlockGeometry {
    Variant variant = Variant::order_independent;
    std::uint64_t n = 0;
    std::uint64_t k = 0;
    std::uint64_t m = 0;             // power of two, the size of the code space per block
    unsigned bit_width = 0;          // log2(m)
    std::uint64_t support_size = 0;  // k*m (order-independent), m (order-dependent)
    std::uint64_t block_size = 0;    // m (order-independent), m/k (order-dependent)

    // Blocks are 1-based (t in 1..k), bit positions 0-based (r in 0..bit_width-1).
    std::uint64_t block_start(std::uint64_t t) const noexcept { return (t - 1) * block_size; }
    std::uint64_t block_of(std::uint64_t j) const noexcept { return j / block_size + 1; }
    unsigned bit_position(std::uint64_t j) const noexcept {
        return static_cast<unsigned>((j % block_size) % bit_width);
    }
    std::uint64_t subblock_of(std::uint64_t j) const noexcept {
        return (j % block_size) / bit_width + 1;
    }
    // Base subtracted from a code to obtain its bit pattern.
    std::uint64_t code_base(std::uint64_t t) const noexcept {
        return variant == Variant::order_independent ? (t - 1) * m : 0;
    }
    // |C_{t,r}|: identical for every block; the trailing positions lose one
    // point when bit_width does not divide block_size.
    std::uint64_t bit_class_size(unsigned r) const noexcept {
        return block_size / bit_width + (r < block_size % bit_width ? 1 : 0);
    }
    double bit_class_weight(unsigned r) const noexcept {
        return static_cast<double>(bit_class_size(r)) / static_cast<double>(block_size);
    }
    std::vector<std::uint64_t> block_indices(std::uint64_t t) const;
};

// Coefficient of 2^r in the binary expansion of i. Requires r < 63.
Label bit(std::uint64_t i, unsigned r);

// Validated geometry for (n, k, variant); throws config_error naming the
// violated constraint.
//   order-independent: m = 2^floor(log2(n/k)), needs n >= 2k.
//   order-dependent:   m = 2^floor(log2(n)), needs k | m and m/k >= log2(m).
BlockGeometry make_geometry(std::uint64_t n, std::uint64_t k, Variant variant);

// sqrt(k * log2(m) / n); the label bias of the planted distribution.
// Throws config_error if the value exceeds 1.
double epsilon(const BlockGeometry& g);

// k x bit_width matrix of signs in {-1,+1}, one per bit class.
struct SignMatrix {
    std::uint64_t k = 0;
    unsigned bit_width = 0;
    std::vector<std::int8_t> entries;  // row-major by block

    std::int8_t sign(std::uint64_t t, unsigned r) const;  // t in 1..k, r in 0..bit_width-1
};

// Block codes (i_1, ..., i_k) identifying one reconstructed hypothesis.
struct CodeVector {
    std::vector<std::uint64_t> codes;

    friend bool operator==(const CodeVector&, const CodeVector&) = default;
    friend auto operator<=>(const CodeVector& a, const CodeVector& b) {
        return a.codes <=> b.codes;
    }
};

// Argument of a reconstruction: a multiset of support indices for the
// order-independent scheme, an ordered sequence for the order-dependent one.
// Labels play no role in reconstruction, so only indices are kept.
struct CompressionSet {
    Variant variant = Variant::order_independent;
    std::vector<std::uint64_t> members;
};

// Label of the block-t sub-hypothesis with code i at support point j
// (which must lie in block t).
Label eval_block_hypothesis(std::uint64_t t, std::uint64_t i, std::uint64_t j,
                            const BlockGeometry& g);

// Full label vector of the hypothesis identified by `code`; agrees with
// eval_block_hypothesis blockwise.
Hypothesis code_to_hypothesis(const CodeVector& code, const BlockGeometry& g);

// Order-independent reconstruction: per block, the smallest member index
// falling in the block, defaulting to the block start when the block is
// missed. Invariant to member order and duplication.
CodeVector reconstruct_multiset(const CompressionSet& s, const BlockGeometry& g);

// Order-dependent reconstruction: in-support members in sequence order,
// zero-padded up to k. Members outside the support are dropped.
CodeVector reconstruct_sequence(const CompressionSet& s, const BlockGeometry& g);

// Dispatch on the geometry's variant.
CodeVector reconstruct(const CompressionSet& s, const BlockGeometry& g);

// i.i.d. uniform signs; a pure function of the seed.
SignMatrix sample_sign_matrix(const BlockGeometry& g, std::uint64_t seed);

// The planted distribution: uniform marginal, eta_j = 1/2 + (eps/2) * sign
// of j's bit class. `epsilon_override` is a test hook replacing epsilon(g).
FiniteLabelDistribution build_distribution(const SignMatrix& sigma, const BlockGeometry& g,
                                           std::optional<double> epsilon_override = {});

// The risk-minimizing code vector: per block, the code whose bits follow
// the sign matrix's majority labels.
CodeVector optimal_code(const SignMatrix& sigma, const BlockGeometry& g);

// Number of bit positions where code i's pattern differs from the optimal
// pattern of block t.
unsigned hamming_delta(std::uint64_t t, std::uint64_t i, const SignMatrix& sigma,
                       const BlockGeometry& g);

}  // namespace comprate
