#include "corobts/persistent_array.hpp"

#include "corobts/errors.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace corobts {

BottomTree::BottomTree(BlockMemory* memory, const TreeStore& top) {
    const auto cells = top.live_cells();
    std::unordered_map<Index, Index> where;
    where.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) where.emplace(cells[i], static_cast<Index>(i));
    nodes_ = TrackedArray<Slot>(memory, cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        Slot s = top.pma().peek(cells[i]);
        for (std::uint32_t r = 0; r < s.child_count; ++r) s.children[r] = where.at(s.children[r]);
        nodes_.write(i) = s;
    }
}

PersistentArray::PersistentArray(std::uint32_t capacity, BlockMemory* memory, Rational eps)
    : memory_(memory), eps_(eps), capacity_(capacity) {
    if (capacity < 2 || !std::has_single_bit(capacity)) {
        throw precondition_fault("capacity must be a power of two >= 2");
    }
    height_ = static_cast<std::uint32_t>(std::bit_width(capacity)); // log2(U) + 1
    present_ = TrackedArray<std::int64_t>(memory_, capacity_, 0);
    counters_.gains_by_height.assign(height_ + 1, 0);
    build_top(0);
}

void PersistentArray::build_top(std::uint32_t time_lo) {
    top_ = std::make_unique<TreeStore>(LayoutParams{eps_, height_, 2, 3}, memory_);
    fill_subtree(top_->root(), 0, capacity_, time_lo);
    write_finger_ = top_->register_finger({top_->root()});
    read_finger_ = top_->register_finger({top_->root()});
    read_tree_ = SIZE_MAX;
    read_path_.clear();
    points_in_top_ = 0;
}

void PersistentArray::fill_subtree(Index root, std::uint32_t space_lo, std::uint32_t width, std::uint32_t time_lo) {
    struct Todo {
        Index v;
        std::uint32_t lo, width;
    };
    std::vector<Todo> todo{{root, space_lo, width}};
    while (!todo.empty()) {
        const Todo cur = todo.back();
        todo.pop_back();
        StNode n;
        n.space_lo = cur.lo;
        n.space_hi = cur.lo + cur.width;
        n.time_lo = time_lo;
        if (cur.width == 1) {
            n.boundary = present_.read(cur.lo);
        } else {
            if (top_->degree(cur.v) != 2) throw invariant_fault("fresh ST subtree is not binary");
            const std::uint32_t half = cur.width / 2;
            todo.push_back({top_->child(cur.v, 1), cur.lo + half, half});
            todo.push_back({top_->child(cur.v, 0), cur.lo, half});
        }
        put(cur.v, n);
    }
}

void PersistentArray::close_subtree(Index root, std::uint32_t time_hi) {
    std::vector<Index> todo{root};
    while (!todo.empty()) {
        const Index v = todo.back();
        todo.pop_back();
        StNode n = node(v);
        if (!n.open()) continue;
        n.time_hi = time_hi;
        put(v, n);
        for (std::uint32_t r = 0, deg = top_->degree(v); r < deg; ++r) todo.push_back(top_->child(v, r));
    }
}

std::vector<Index> PersistentArray::open_path_to(std::uint32_t cell) {
    std::vector<Index> path = top_->finger_path(write_finger_);
    while (path.size() > 1) {
        const StNode n = node(path.back());
        if (n.open() && n.space_lo <= cell && cell < n.space_hi) break;
        path.pop_back();
    }
    while (path.size() < height_) {
        const Index v = path.back();
        Index next = kNoIndex;
        for (std::uint32_t r = 0, deg = top_->degree(v); r < deg && next == kNoIndex; ++r) {
            const Index c = top_->child(v, r);
            const StNode n = node(c);
            if (n.open() && n.space_lo <= cell && cell < n.space_hi) next = c;
        }
        if (next == kNoIndex) throw invariant_fault("no open rectangle covers the written cell");
        path.push_back(next);
    }
    return path;
}

std::uint32_t PersistentArray::write(std::uint32_t cell, std::int64_t value) {
    while (cell >= capacity_) grow();
    present_.write(cell) = value;
    log_.push_back({cell, value});
    const auto t = static_cast<std::uint32_t>(log_.size());

    auto path = open_path_to(cell);
    StNode leaf = node(path.back());
    if (leaf.is_full) throw invariant_fault("open leaf already holds a point");
    leaf.has_point = 1;
    leaf.is_full = 1;
    leaf.point_version = t;
    leaf.point_value = value;
    put(path.back(), leaf);
    top_->set_finger_path(write_finger_, path);

    if (++points_in_top_ == capacity_) {
        rollover();
        return t;
    }

    // Fullness climbs until the first ancestor with fewer than two full children.
    std::size_t y = path.size() - 1;
    while (true) {
        if (y == 0) throw invariant_fault("root became full before the top tree held U points");
        --y;
        StNode n = node(path[y]);
        std::uint32_t full = 0;
        for (std::uint32_t r = 0, deg = top_->degree(path[y]); r < deg; ++r) full += node(top_->child(path[y], r)).is_full;
        if (full < 2) break;
        n.is_full = 1;
        put(path[y], n);
    }

    const Index full_child = path[y + 1];
    std::uint32_t rank = 0;
    while (top_->child(path[y], rank) != full_child) ++rank;
    const Index z = top_->insert_subtree(path[y], rank + 1);
    path = top_->finger_path(write_finger_);

    const StNode closed = node(path[y + 1]);
    close_subtree(path[y + 1], t + 1);
    fill_subtree(z, closed.space_lo, closed.space_hi - closed.space_lo, t + 1);

    path.resize(y + 1);
    path.push_back(z);
    while (path.size() < height_) {
        const Index v = path.back();
        const Index left = top_->child(v, 0);
        path.push_back(cell < node(left).space_hi ? left : top_->child(v, 1));
    }
    top_->set_finger_path(write_finger_, path);

    ++counters_.expansions;
    ++counters_.gains_by_height[height_ - 1 - y];
    return t;
}

std::int64_t PersistentArray::read_present(std::uint32_t cell) const {
    if (cell >= capacity_) throw std::out_of_range("cell " + std::to_string(cell) + " beyond capacity");
    return present_.read(cell);
}

std::int64_t PersistentArray::read_persistent(std::uint32_t cell, std::uint32_t version) {
    if (cell >= capacity_) throw std::out_of_range("cell " + std::to_string(cell) + " beyond capacity");
    if (version > version_count()) throw precondition_fault("version " + std::to_string(version) + " is in the future");
    if (version >= node(top_->root()).time_lo) return read_top(cell, version);
    auto it = std::upper_bound(bottoms_.begin(), bottoms_.end(), version,
                               [](std::uint32_t v, const BottomTree& b) { return v < b.time_lo(); });
    return read_bottom(static_cast<std::size_t>(it - bottoms_.begin()) - 1, cell, version);
}

namespace {

std::int64_t leaf_value(const StNode& n, std::uint32_t version) {
    return n.has_point && n.point_version <= version ? n.point_value : n.boundary;
}

} // namespace

std::int64_t PersistentArray::read_top(std::uint32_t cell, std::uint32_t version) {
    std::vector<Index> path = read_tree_ == bottoms_.size() ? top_->finger_path(read_finger_)
                                                            : std::vector<Index>{top_->root()};
    while (path.size() > 1 && !node(path.back()).contains(cell, version)) path.pop_back();
    while (path.size() < height_) {
        const Index v = path.back();
        Index next = kNoIndex;
        for (std::uint32_t r = 0, deg = top_->degree(v); r < deg && next == kNoIndex; ++r) {
            const Index c = top_->child(v, r);
            if (node(c).contains(cell, version)) next = c;
        }
        if (next == kNoIndex) throw invariant_fault("rectangles do not cover the queried point");
        path.push_back(next);
        ++counters_.read_steps;
    }
    const std::int64_t out = leaf_value(node(path.back()), version);
    top_->set_finger_path(read_finger_, std::move(path));
    read_tree_ = bottoms_.size();
    return out;
}

std::int64_t PersistentArray::read_bottom(std::size_t tree, std::uint32_t cell, std::uint32_t version) {
    const BottomTree& bt = bottoms_[tree];
    std::vector<Index> path = read_tree_ == tree ? std::move(read_path_) : std::vector<Index>{0};
    auto at = [&](Index i) { return bt.read(i).load<StNode>(); };
    while (path.size() > 1 && !at(path.back()).contains(cell, version)) path.pop_back();
    while (path.size() < height_) {
        const Slot& s = bt.read(path.back());
        Index next = kNoIndex;
        for (std::uint32_t r = 0; r < s.child_count && next == kNoIndex; ++r) {
            if (at(s.children[r]).contains(cell, version)) next = s.children[r];
        }
        if (next == kNoIndex) throw invariant_fault("bottom tree does not cover the queried point");
        path.push_back(next);
        ++counters_.read_steps;
    }
    const std::int64_t out = leaf_value(at(path.back()), version);
    read_path_ = std::move(path);
    read_tree_ = tree;
    return out;
}

void PersistentArray::rollover() {
    close_subtree(top_->root(), version_count() + 1);
    bottoms_.emplace_back(memory_, *top_);
    ++counters_.rollovers;
    build_top(version_count() + 1);
}

void PersistentArray::grow() {
    PersistentArray bigger(capacity_ * 2, memory_, eps_);
    for (const auto& e : log_) bigger.write(e.cell, e.value);
    bigger.counters_.doublings = counters_.doublings + 1;
    *this = std::move(bigger);
}

std::size_t PersistentArray::total_slots() const {
    std::size_t total = top_->pma().size();
    for (const auto& b : bottoms_) total += b.size();
    return total;
}

std::vector<std::string> PersistentArray::check_invariants() const {
    std::vector<std::string> out = top_->validate().violations;
    if (!out.empty()) return out;
    std::vector<Index> cells;
    const auto tree = top_->to_explicit(&cells);
    for (std::size_t id = 0; id < cells.size(); ++id) {
        const StNode n = top_->pma().peek(cells[id]).load<StNode>();
        const auto d = top_->pma().peek(cells[id]).depth;
        const std::string at = "node at cell " + std::to_string(cells[id]) + ": ";
        if (n.space_hi - n.space_lo != (1u << (height_ - 1 - d))) out.push_back(at + "width does not match height");
        if (n.open() && n.is_full) out.push_back(at + "open rectangle is full");
        std::uint32_t covered_lo = 0, covered_hi = 0;
        for (auto c : tree.children[id]) {
            const StNode k = top_->pma().peek(cells[c]).load<StNode>();
            if (k.space_lo < n.space_lo || k.space_hi > n.space_hi || k.time_lo < n.time_lo ||
                (!n.open() && (k.open() || k.time_hi > n.time_hi))) {
                out.push_back(at + "child rectangle leaves the parent");
            }
            if (k.space_lo == n.space_lo) ++covered_lo;
            if (k.space_hi == n.space_hi) ++covered_hi;
        }
        if (!tree.children[id].empty() && (covered_lo == 0 || covered_hi == 0)) {
            out.push_back(at + "children do not span the parent");
        }
    }
    return out;
}

void PersistentArray::export_snapshot(std::ostream& out, std::uint32_t version) {
    out << "version,cell,value\n";
    for (std::uint32_t c = 0; c < capacity_; ++c) out << version << ',' << c << ',' << read_persistent(c, version) << '\n';
}

void PersistentArray::export_log(std::ostream& out) const {
    for (const auto& e : log_) out << e.cell << ',' << e.value << '\n';
}

PersistentArray PersistentArray::import_log(std::istream& in, std::uint32_t capacity, BlockMemory* memory, Rational eps) {
    PersistentArray pa(capacity, memory, eps);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::uint32_t cell = 0;
        std::int64_t value = 0;
        char comma = 0;
        if (!(row >> cell >> comma >> value) || comma != ',') {
            throw std::invalid_argument("malformed log line " + std::to_string(lineno));
        }
        pa.write(cell, value);
    }
    return pa;
}

} // namespace corobts
