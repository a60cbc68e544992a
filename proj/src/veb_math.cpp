#include "corobts/veb_math.hpp"

#include "corobts/errors.hpp"
#include "corobts/slot.hpp"

#include <bit>
#include <limits>
#include <stdexcept>

namespace corobts {

Rational Rational::parse(const std::string& text) {
    const auto slash = text.find('/');
    try {
        std::size_t used = 0;
        if (slash == std::string::npos) {
            const auto v = std::stoul(text, &used);
            if (used != text.size()) throw std::invalid_argument("bad rational");
            return Rational{static_cast<std::uint32_t>(v), 1};
        }
        const auto num = std::stoul(text.substr(0, slash), &used);
        if (used != slash) throw std::invalid_argument("bad rational");
        const auto rest = text.substr(slash + 1);
        const auto den = std::stoul(rest, &used);
        if (used != rest.size() || den == 0) throw std::invalid_argument("bad rational");
        return Rational{static_cast<std::uint32_t>(num), static_cast<std::uint32_t>(den)};
    } catch (const std::logic_error&) {
        throw std::invalid_argument("cannot parse rational '" + text + "'");
    }
}

void LayoutParams::check() const {
    if (eps.num == 0 || eps.den == 0 || 2ull * eps.num > eps.den) {
        throw precondition_fault("eps must lie in (0, 1/2], got " + eps.str());
    }
    if (height < 1) throw precondition_fault("height must be >= 1");
    if (arity_a < 2 || arity_b <= arity_a) throw precondition_fault("arities must satisfy 2 <= a < b");
    if (arity_b > kMaxArity) throw precondition_fault("b exceeds the slot child capacity");
    if (height > std::numeric_limits<std::uint16_t>::max()) throw precondition_fault("height too large");
}

std::uint32_t cut_height(std::uint32_t h, Rational eps) {
    if (h < 2) throw std::domain_error("height-1 trees are never cut");
    const auto t = eps.floor_times(h);
    return t < 1 ? 1u : static_cast<std::uint32_t>(t);
}

HTable build_h_table(std::uint32_t height, Rational eps) {
    HTable h(height, 0);
    if (height == 0) return h;
    h[0] = height;
    for (std::uint32_t i = 0; i < height; ++i) {
        std::uint32_t top = h[i];
        while (top > 1) {
            const std::uint32_t whole = top;
            top = cut_height(top, eps);
            h[i + top] = whole - top;
        }
    }
    return h;
}

std::uint64_t checked_pow(std::uint64_t a, std::uint32_t e) {
    std::uint64_t r = 1;
    for (std::uint32_t i = 0; i < e; ++i) {
        if (r > std::numeric_limits<std::uint64_t>::max() / a) throw std::overflow_error("power overflows 64 bits");
        r *= a;
    }
    return r;
}

std::uint64_t ary_subtree_size(std::uint64_t a, std::uint32_t h) {
    if (a < 2 || h < 1) throw std::domain_error("ary_subtree_size needs a >= 2 and h >= 1");
    // Sum of a^i for i < h, accumulated so that a^h itself need not fit.
    std::uint64_t total = 0;
    std::uint64_t level = 1;
    for (std::uint32_t i = 0; i < h; ++i) {
        if (total > std::numeric_limits<std::uint64_t>::max() - level) throw std::overflow_error("subtree size overflows");
        total += level;
        if (i + 1 < h) {
            if (level > std::numeric_limits<std::uint64_t>::max() / a) throw std::overflow_error("subtree size overflows");
            level *= a;
        }
    }
    return total;
}

std::uint64_t hyperceil(std::uint64_t x) noexcept { return x <= 1 ? 1 : std::bit_ceil(x); }

std::uint32_t floor_log2(std::uint64_t x) noexcept {
    return static_cast<std::uint32_t>(std::bit_width(x) - 1);
}

std::uint32_t ExplicitTree::add_complete(std::uint32_t a, std::uint32_t height) {
    const auto root_id = add_node();
    if (height > 1) {
        for (std::uint32_t c = 0; c < a; ++c) {
            const auto child = add_complete(a, height - 1);
            children[root_id].push_back(child);
        }
    }
    return root_id;
}

ExplicitTree ExplicitTree::complete(std::uint32_t a, std::uint32_t height) {
    ExplicitTree t;
    t.root = t.add_complete(a, height);
    return t;
}

namespace {

void collect_at_depth(const ExplicitTree& t, std::uint32_t v, std::uint32_t depth,
                      std::vector<std::uint32_t>& out) {
    if (depth == 0) {
        out.push_back(v);
        return;
    }
    for (auto c : t.children[v]) collect_at_depth(t, c, depth - 1, out);
}

// Lays out the tree rooted at v truncated to `height` levels.
void layout(const ExplicitTree& t, std::uint32_t v, std::uint32_t height, Rational eps,
            std::vector<std::uint32_t>& out) {
    if (height == 1) {
        out.push_back(v);
        return;
    }
    const auto top = cut_height(height, eps);
    layout(t, v, top, eps, out);
    std::vector<std::uint32_t> bottoms;
    collect_at_depth(t, v, top, bottoms);
    for (auto b : bottoms) layout(t, b, height - top, eps, out);
}

// Returns the common leaf depth or throws.
std::uint32_t leaf_depth(const ExplicitTree& t, std::uint32_t v, std::uint32_t depth, std::int64_t& seen) {
    if (t.children[v].empty()) {
        if (seen >= 0 && seen != depth) throw invariant_fault("leaves are not all on the same level");
        seen = depth;
        return depth;
    }
    for (auto c : t.children[v]) leaf_depth(t, c, depth + 1, seen);
    return static_cast<std::uint32_t>(seen);
}

} // namespace

std::vector<std::uint32_t> veb_permutation_oracle(const ExplicitTree& tree, Rational eps) {
    std::vector<std::uint32_t> out;
    if (tree.children.empty()) return out;
    std::int64_t seen = -1;
    const auto height = leaf_depth(tree, tree.root, 0, seen) + 1;
    layout(tree, tree.root, height, eps, out);
    return out;
}

} // namespace corobts
