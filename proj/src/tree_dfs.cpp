#include "corobts/errors.hpp"
#include "corobts/tree_store.hpp"

namespace corobts {

Index TreeStore::leftmost_at(Index v, std::uint32_t d) const {
    while (depth(v) < d) v = child(v, 0);
    return v;
}

Index TreeStore::rightmost_at(Index v, std::uint32_t d) const {
    while (depth(v) < d) v = child(v, degree(v) - 1);
    return v;
}

// Same-level vertices are stored left to right, so the descendants of v on
// x's level form a contiguous run bracketed by v's outermost branches.
bool TreeStore::in_subtree(Index x, Index v) const {
    const auto dx = depth(x);
    if (dx < depth(v)) return false;
    return leftmost_at(v, dx) <= x && x <= rightmost_at(v, dx);
}

Index TreeStore::child_toward(Index v, Index x) const {
    const auto dx = depth(x);
    for (std::uint32_t r = degree(v); r-- > 0;) {
        const Index c = child(v, r);
        if (leftmost_at(c, dx) <= x) return c;
    }
    throw invariant_fault("vertex is not below the given ancestor");
}

std::uint32_t TreeStore::rank_of(Index parent, Index v) const {
    const Slot& s = slot(parent);
    for (std::uint32_t r = 0; r < s.child_count; ++r) {
        if (s.children[r] == v) return r;
    }
    throw invariant_fault("vertex is not a child of the given parent");
}

void TreeStore::recalculate_pointers(Index l, Index r, ChangeList& changes) {
    ++dfs_.calls;
    dfs_.last_visits = 0;
    const std::size_t cap = params_.height + 1;

    // Leftmost relocated vertex of each strictly deeper level, with the number
    // of relocated vertices preceding it.
    TrackedArray<std::pair<Index, std::uint64_t>> lefts(memory_, cap);
    std::size_t top = 0;
    std::uint64_t n = 0;
    std::int64_t d = -1;
    for (Index c = l;; ++c) {
        const Slot& s = pma_.read(c);
        if (s.occupied && s.has_relocation()) {
            if (d < s.depth) {
                lefts.write(top++) = {c, n};
                d = s.depth;
            }
            ++n;
        }
        if (c == r) break;
    }
    if (n == 0) return;

    TrackedArray<Index> stack(memory_, cap);
    std::size_t depth_s = 0;
    auto in_p = [&](Index v) { return l <= v && v <= r && pma_.read(v).has_relocation(); };
    auto new_pos = [&](Index v) {
        const Slot& s = pma_.read(v);
        return s.has_relocation() ? s.relocation : v;
    };
    auto enter = [&](Index v) {
        ++dfs_.last_visits;
        if (visit_log_ != nullptr) visit_log_->push_back(v);
    };

    Index target = lefts.read(top - 1).first;
    Index v = root_;
    enter(v);
    while (true) {
        if (in_p(v)) {
            if (v != root_) {
                const Index u = stack.read(depth_s - 1);
                changes.push({new_pos(u), rank_of(u, v), new_pos(v)});
            }
            --n;
            while (top > 0 && v < lefts.read(top - 1).first) --top;
            if (top > 0 && n == lefts.read(top - 1).second) {
                --top;
                if (n == 0) break;
                target = top > 0 ? lefts.read(top - 1).first : kNoIndex;
            }
            if (n == 0) break;
        }
        if (target == v) target = kNoIndex;
        if (target != kNoIndex) {
            while (!in_subtree(target, v)) {
                if (depth_s == 0) throw invariant_fault("DFS navigation left the tree");
                v = stack.read(--depth_s);
            }
            stack.write(depth_s++) = v;
            v = child_toward(v, target);
            enter(v);
            if (v == target) target = kNoIndex;
            continue;
        }
        // Plain DFS step: next unvisited child, staying inside the interval
        // once inside it.
        Index from = kNoIndex;
        bool moved = false;
        while (true) {
            const Slot& s = slot(v);
            std::uint32_t next = 0;
            if (from != kNoIndex) next = rank_of(v, from) + 1;
            const Index c = next < s.child_count ? s.children[next] : kNoIndex;
            if (c != kNoIndex && (!in_p(v) || in_p(c))) {
                stack.write(depth_s++) = v;
                v = c;
                enter(v);
                moved = true;
                break;
            }
            if (depth_s == 0) break;
            from = v;
            v = stack.read(--depth_s);
        }
        if (!moved) throw invariant_fault("DFS exhausted the tree with vertices left to visit");
    }
    dfs_.visits += dfs_.last_visits;
}

Index TreeStore::build_subtree(std::uint32_t d0, const InsertTable& table) {
    const std::uint32_t height = params_.height;
    const std::uint32_t a = params_.arity_a;
    const auto sizes = new_subtree_interval_sizes(d0);
    if (table.rows() != sizes.size()) throw precondition_fault("insert table has the wrong number of intervals");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (table.row_size(i) != sizes[i]) throw precondition_fault("insert table interval has the wrong size");
    }

    const std::size_t span = height - d0;
    TrackedArray<std::uint32_t> I(memory_, span, 0), J(memory_, span, 0), K(memory_, span, 0);
    // seeded[d]: J[d] already names the next vertex of level d. Only interval
    // starts and green-arrow targets are seeded; other first children continue
    // after the previous decomposition subtree on their level.
    std::vector<bool> seeded(span, false);
    {
        std::uint32_t i = 0;
        for (std::uint32_t d = d0; d < height;) {
            J.write(d - d0) = 0;
            seeded[d - d0] = true;
            const std::uint32_t hd = h_[d];
            for (std::uint32_t t = 0; t < hd; ++t) I.write(d++ - d0) = i;
            ++i;
        }
    }
    auto at = [&](std::uint32_t d) { return table.at(I.read(d - d0), J.read(d - d0)); };
    auto attach = [&](std::uint32_t d) {
        const Index child_cell = at(d + 1);
        Slot& p = pma_.write(at(d));
        p.children[p.child_count++] = child_cell;
    };
    auto continue_level = [&](std::uint32_t d) {
        // next vertex on level d follows the bottom of the previous
        // decomposition subtree rooted on that level
        J.write(d - d0) = J.read(d + h_[d] - 1 - d0) + 1;
    };

    K.write(0) = 0;
    std::int64_t d = d0;
    while (d >= static_cast<std::int64_t>(d0)) {
        const auto du = static_cast<std::uint32_t>(d);
        const std::uint32_t k = ++K.write(du - d0);
        if (k == 1) {
            Slot& s = pma_.write(at(du));
            s.depth = static_cast<std::uint16_t>(du);
            s.child_count = 0;
            seeded[du - d0] = false;
        }
        if (du == height - 1) {
            --d;
        } else if (k == 1) {
            std::uint32_t hp = h_[du];
            while (hp > 1) {
                hp = cut_height(hp, params_.eps);
                J.write(du + hp - d0) = J.read(du - d0) + static_cast<std::uint32_t>(ary_subtree_size(a, hp));
                seeded[du + hp - d0] = true;
            }
            if (!seeded[du + 1 - d0]) continue_level(du + 1);
            K.write(du + 1 - d0) = 0;
            attach(du);
            ++d;
        } else if (k <= a) {
            continue_level(du + 1);
            K.write(du + 1 - d0) = 0;
            attach(du);
            ++d;
        } else {
            --d;
        }
    }
    return table.at(0, 0);
}

} // namespace corobts
