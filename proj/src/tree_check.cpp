#include "corobts/tree_store.hpp"

#include <cstdio>
#include <sstream>
#include <unordered_set>

namespace corobts {

std::vector<Index> TreeStore::live_cells() const {
    std::vector<Index> out;
    out.reserve(pma_.live_count());
    for (Index c = 0; c < pma_.size(); ++c) {
        if (pma_.peek(c).occupied) out.push_back(c);
    }
    return out;
}

ExplicitTree TreeStore::to_explicit(std::vector<Index>* cells) const {
    ExplicitTree t;
    std::vector<Index> where;
    std::vector<std::pair<Index, std::uint32_t>> todo{{root_, t.add_node()}};
    where.push_back(root_);
    while (!todo.empty()) {
        auto [cell, id] = todo.back();
        todo.pop_back();
        const Slot& s = pma_.peek(cell);
        for (std::uint32_t r = 0; r < s.child_count; ++r) {
            const auto cid = t.add_node();
            t.children[id].push_back(cid);
            where.push_back(s.children[r]);
            todo.emplace_back(s.children[r], cid);
        }
    }
    if (cells != nullptr) *cells = std::move(where);
    return t;
}

std::optional<std::vector<Index>> TreeStore::match_reference(const ExplicitTree& reference) const {
    std::vector<Index> cells(reference.children.size(), kNoIndex);
    std::vector<std::pair<std::uint32_t, Index>> todo{{reference.root, root_}};
    while (!todo.empty()) {
        auto [node, cell] = todo.back();
        todo.pop_back();
        if (cell >= pma_.size() || !pma_.peek(cell).occupied) return std::nullopt;
        const Slot& s = pma_.peek(cell);
        const auto& kids = reference.children[node];
        if (kids.size() != s.child_count) return std::nullopt;
        cells[node] = cell;
        for (std::size_t r = 0; r < kids.size(); ++r) todo.emplace_back(kids[r], s.children[r]);
    }
    return cells;
}

ValidationReport TreeStore::validate() const {
    ValidationReport rep;
    auto fail = [&](std::string msg) { rep.violations.push_back(std::move(msg)); };
    const auto cells = live_cells();
    const auto leaf_depth = params_.height - 1;

    if (cells.empty() || cells.front() != root_) fail("root is not the first live cell");
    if (root_ >= pma_.size() || !pma_.peek(root_).occupied) {
        fail("root cell is blank");
        return rep;
    }

    std::unordered_set<Index> seen{root_};
    std::vector<std::pair<Index, std::uint32_t>> todo{{root_, 0}};
    std::size_t edges = 0;
    bool structure_ok = true;
    while (!todo.empty()) {
        auto [v, expect] = todo.back();
        todo.pop_back();
        const Slot& s = pma_.peek(v);
        const std::string at = "cell " + std::to_string(v) + ": ";
        if (s.depth != expect) fail(at + "depth " + std::to_string(s.depth) + ", expected " + std::to_string(expect));
        if (s.has_relocation()) fail(at + "relocation not cleared");
        if (s.depth < leaf_depth && (s.child_count < params_.arity_a || s.child_count > params_.arity_b)) {
            fail(at + "degree " + std::to_string(s.child_count) + " outside [a, b]");
        }
        if (s.depth == leaf_depth && s.child_count != 0) fail(at + "leaf has children");
        for (std::size_t r = s.child_count; r < kMaxArity; ++r) {
            if (s.children[r] != kNoIndex) fail(at + "unused child entry " + std::to_string(r) + " is set");
        }
        for (std::uint32_t r = 0; r < s.child_count && r < kMaxArity; ++r) {
            const Index c = s.children[r];
            if (c >= pma_.size() || !pma_.peek(c).occupied) {
                fail(at + "child " + std::to_string(r) + " points to blank cell " + std::to_string(c));
                structure_ok = false;
                continue;
            }
            if (!seen.insert(c).second) {
                fail(at + "child " + std::to_string(r) + " reached twice");
                structure_ok = false;
                continue;
            }
            ++edges;
            todo.emplace_back(c, expect + 1);
        }
    }
    if (seen.size() != pma_.live_count()) {
        fail("reachable vertices " + std::to_string(seen.size()) + " but live_count " + std::to_string(pma_.live_count()));
        structure_ok = false;
    }
    if (edges + 1 != pma_.live_count()) fail("child edge count is not live_count - 1");

    if (structure_ok && rep.ok()) {
        std::vector<Index> where;
        const auto tree = to_explicit(&where);
        const auto order = veb_permutation_oracle(tree, params_.eps);
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (where[order[i]] != cells[i]) {
                fail("layout differs from vEB order at rank " + std::to_string(i));
                break;
            }
        }
    }

    for (const auto& f : fingers_) {
        if (!f.in_use || !f.valid) continue;
        if (f.path.empty() || f.path.front() != root_) {
            fail("finger does not start at the root");
            continue;
        }
        for (std::size_t i = 1; i < f.path.size(); ++i) {
            const Slot& p = pma_.peek(f.path[i - 1]);
            bool found = false;
            for (std::uint32_t r = 0; r < p.child_count; ++r) found = found || p.children[r] == f.path[i];
            if (!found) {
                fail("finger step " + std::to_string(i) + " is not a child edge");
                break;
            }
        }
    }

    for (auto& d : pma_.check_density()) fail("pma: " + d);
    return rep;
}

std::string TreeStore::dump() const {
    std::ostringstream os;
    char hex[3];
    for (Index c : live_cells()) {
        const Slot& s = pma_.peek(c);
        os << c << ',' << s.depth;
        for (std::uint32_t r = 0; r < params_.arity_b; ++r) {
            os << ',';
            if (r < s.child_count) os << s.children[r];
            else os << '-';
        }
        os << ',';
        for (auto b : s.payload) {
            std::snprintf(hex, sizeof hex, "%02x", static_cast<unsigned>(b));
            os << hex;
        }
        os << '\n';
    }
    return os.str();
}

} // namespace corobts
