#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace corobts {

/// Exact rational in (0, 1/2], used for the layout cut fraction.
struct Rational {
    std::uint32_t num = 1;
    std::uint32_t den = 2;

    /// floor(num * h / den)
    [[nodiscard]] std::uint64_t floor_times(std::uint64_t h) const noexcept { return num * h / den; }
    [[nodiscard]] double to_double() const noexcept { return static_cast<double>(num) / den; }
    [[nodiscard]] std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

    /// Parses "p/q" or a plain integer; throws std::invalid_argument.
    static Rational parse(const std::string& text);
};

struct LayoutParams {
    Rational eps{1, 2};
    std::uint32_t height = 1; // H
    std::uint32_t arity_a = 2;
    std::uint32_t arity_b = 3;

    /// Throws precondition_fault when eps, a, b or H are out of range.
    void check() const;
};

/// max(floor(eps * h), 1): the height of the top part when cutting a
/// height-h tree. Throws std::domain_error for h < 2.
std::uint32_t cut_height(std::uint32_t h, Rational eps);

/// h[d] = height of the largest decomposition subtree rooted at depth d.
using HTable = std::vector<std::uint32_t>;

HTable build_h_table(std::uint32_t height, Rational eps);

/// (a^h - 1) / (a - 1). Throws std::overflow_error when it does not fit.
std::uint64_t ary_subtree_size(std::uint64_t a, std::uint32_t h);

/// a^e with overflow check.
std::uint64_t checked_pow(std::uint64_t a, std::uint32_t e);

/// Smallest power of two >= x (1 for x == 0).
std::uint64_t hyperceil(std::uint64_t x) noexcept;

/// floor(log2(x)) for x >= 1.
std::uint32_t floor_log2(std::uint64_t x) noexcept;

// ---------------------------------------------------------------------------
// Reference trees and the from-scratch layout, used by tests and checkers.
// ---------------------------------------------------------------------------

struct ExplicitTree {
    std::vector<std::vector<std::uint32_t>> children;
    std::uint32_t root = 0;

    std::uint32_t add_node() {
        children.emplace_back();
        return static_cast<std::uint32_t>(children.size() - 1);
    }

    /// Appends a complete a-ary tree of the given height and returns its root.
    std::uint32_t add_complete(std::uint32_t a, std::uint32_t height);

    static ExplicitTree complete(std::uint32_t a, std::uint32_t height);
};

/// vEB_eps order of the vertices reachable from `tree.root`. Throws
/// invariant_fault when leaves are not all on the same level.
std::vector<std::uint32_t> veb_permutation_oracle(const ExplicitTree& tree, Rational eps);

} // namespace corobts
