#include "corobts/tree_store.hpp"

#include "corobts/errors.hpp"

#include <algorithm>
#include <utility>

namespace corobts {

TreeStore::TreeStore(LayoutParams params, BlockMemory* memory)
    : params_(params), memory_(memory), pma_(memory, 1) {
    params_.check();
    h_ = build_h_table(params_.height, params_.eps);
    const auto sizes = new_subtree_interval_sizes(0);
    std::vector<UpdateOp> ops{UpdateOp::insert_after(kBeforeAll, static_cast<Index>(sizes.front()))};
    const InsertTable table = pma_.batch_update(ops);
    root_ = build_subtree(0, table);
}

const Slot& TreeStore::slot(Index v) const {
    if (v >= pma_.size() || !pma_.peek(v).occupied) {
        throw navigation_fault("cell " + std::to_string(v) + " does not hold a vertex");
    }
    return pma_.read(v);
}

Index TreeStore::child(Index v, std::uint32_t rank) const {
    const Slot& s = slot(v);
    if (rank >= s.child_count) {
        throw navigation_fault("child rank " + std::to_string(rank) + " out of range (degree " +
                               std::to_string(s.child_count) + ")");
    }
    return s.children[rank];
}

Index TreeStore::walk(std::span<const std::uint32_t> ranks) const {
    Index v = root_;
    for (auto r : ranks) v = child(v, r);
    return v;
}

TreeStore::Finger& TreeStore::finger(FingerId f) {
    if (f.id >= fingers_.size() || !fingers_[f.id].in_use) throw finger_fault("unknown finger");
    return fingers_[f.id];
}

const TreeStore::Finger& TreeStore::finger(FingerId f) const {
    if (f.id >= fingers_.size() || !fingers_[f.id].in_use) throw finger_fault("unknown finger");
    return fingers_[f.id];
}

FingerId TreeStore::register_finger(std::vector<Index> path) {
    for (std::uint32_t i = 0; i < fingers_.size(); ++i) {
        if (fingers_[i].in_use) continue;
        fingers_[i] = Finger{std::move(path), true, true};
        return FingerId{i};
    }
    throw finger_fault("finger registry is full");
}

FingerId TreeStore::descend(std::span<const std::uint32_t> ranks) {
    std::vector<Index> path{root_};
    path.reserve(ranks.size() + 1);
    for (auto r : ranks) path.push_back(child(path.back(), r));
    return register_finger(std::move(path));
}

void TreeStore::set_finger_path(FingerId f, std::vector<Index> path) {
    auto& fg = finger(f);
    if (path.empty() || path.front() != root_) throw finger_fault("finger paths start at the root");
    fg.path = std::move(path);
    fg.valid = true;
}

const std::vector<Index>& TreeStore::finger_path(FingerId f) const {
    const auto& fg = finger(f);
    if (!fg.valid) throw finger_fault("finger pointed into a removed subtree");
    return fg.path;
}

bool TreeStore::finger_valid(FingerId f) const { return finger(f).valid; }

void TreeStore::release(FingerId f) { finger(f) = Finger{}; }

std::vector<Index> TreeStore::subtree_intervals_beginnings(Index v) const {
    std::vector<Index> out;
    const auto leaf_depth = params_.height - 1;
    while (true) {
        out.push_back(v);
        for (std::uint32_t i = 1, h = h_of(depth(v)); i < h; ++i) v = child(v, 0);
        if (depth(v) == leaf_depth) break;
        v = child(v, 0);
    }
    return out;
}

std::vector<Index> TreeStore::subtree_intervals_ends(Index v) const {
    std::vector<Index> out;
    const auto leaf_depth = params_.height - 1;
    while (true) {
        for (std::uint32_t i = 1, h = h_of(depth(v)); i < h; ++i) v = child(v, degree(v) - 1);
        out.push_back(v);
        if (depth(v) == leaf_depth) break;
        v = child(v, degree(v) - 1);
    }
    return out;
}

std::vector<std::uint64_t> TreeStore::new_subtree_interval_sizes(std::uint32_t d) const {
    if (d >= params_.height) throw precondition_fault("depth outside the tree");
    std::vector<std::uint64_t> out;
    std::uint64_t n = 1;
    while (d < params_.height) {
        out.push_back(n * ary_subtree_size(params_.arity_a, h_[d]));
        n *= checked_pow(params_.arity_a, h_[d]);
        d += h_[d];
    }
    return out;
}

InsertTable TreeStore::run_batch(const std::vector<UpdateOp>& ops, std::vector<Index*> watched) {
    watched.push_back(&root_);
    for (auto& f : fingers_) {
        if (!f.in_use || !f.valid) continue;
        for (auto& p : f.path) watched.push_back(&p);
    }
    std::vector<std::pair<Index*, Index>> pending;
    auto hook = [&](Index l, Index r, ChangeList& changes) {
        recalculate_pointers(l, r, changes);
        for (Index* p : watched) {
            if (*p < l || *p > r) continue;
            const Slot& s = pma_.peek(*p);
            if (s.has_relocation()) pending.emplace_back(p, s.relocation);
        }
    };
    InsertTable table = pma_.batch_update(ops, hook);
    for (auto [p, to] : pending) *p = to;
    return table;
}

Index TreeStore::insert_subtree(Index v, std::uint32_t c) {
    const Slot& s = slot(v);
    if (s.depth + 1u >= params_.height) throw height_fault("cannot insert a child under a leaf");
    if (s.child_count >= params_.arity_b) throw degree_fault("vertex already has b children");
    if (c > s.child_count) throw navigation_fault("child rank beyond current degree");
    const std::uint32_t d = s.depth;

    std::vector<Index> anchors;
    if (c > 0) {
        anchors = subtree_intervals_ends(child(v, c - 1));
    } else {
        anchors = subtree_intervals_beginnings(child(v, 0));
        for (auto& w : anchors) w = pma_.prev_occupied(w);
    }
    const auto sizes = new_subtree_interval_sizes(d + 1);
    std::vector<UpdateOp> ops;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        ops.push_back(UpdateOp::insert_after(anchors[i], static_cast<Index>(sizes[i])));
    }
    const InsertTable table = run_batch(ops, {&v});
    const Index w = build_subtree(d + 1, table);

    Slot& parent = pma_.write(v);
    for (std::uint32_t r = parent.child_count; r > c; --r) parent.children[r] = parent.children[r - 1];
    parent.children[c] = w;
    ++parent.child_count;
    return w;
}

void TreeStore::remove_subtree(Index v, std::uint32_t c) {
    const Slot& s = slot(v);
    if (s.depth + 1u >= params_.height) throw height_fault("a leaf has no subtree to remove");
    if (c >= s.child_count) throw navigation_fault("child rank beyond current degree");
    if (s.child_count <= params_.arity_a) throw degree_fault("vertex has only a children");
    const std::uint32_t d = s.depth;
    const Index gone = s.children[c];

    const auto first = subtree_intervals_beginnings(gone);
    const auto last = subtree_intervals_ends(gone);
    for (auto& f : fingers_) {
        if (f.in_use && f.valid && f.path.size() > d + 1 && f.path[d + 1] == gone) f.valid = false;
    }

    Slot& parent = pma_.write(v);
    for (std::uint32_t r = c; r + 1 < parent.child_count; ++r) parent.children[r] = parent.children[r + 1];
    --parent.child_count;
    parent.children[parent.child_count] = kNoIndex;

    std::vector<UpdateOp> ops;
    for (std::size_t i = 0; i < first.size(); ++i) ops.push_back(UpdateOp::remove_run(first[i], last[i]));
    run_batch(ops, {});
}

} // namespace corobts
