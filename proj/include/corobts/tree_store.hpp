#pragma once

#include "corobts/block_memory.hpp"
#include "corobts/pma.hpp"
#include "corobts/slot.hpp"
#include "corobts/veb_math.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace corobts {

struct ValidationReport {
    std::vector<std::string> violations;
    [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

struct FingerId {
    std::uint32_t id = UINT32_MAX;
};

struct DfsStats {
    std::uint64_t calls = 0;
    std::uint64_t visits = 0;      // vertices entered, summed over calls
    std::uint64_t last_visits = 0; // vertices entered by the latest call
};

/// Bounded-arity tree of uniform depth stored in a PMA in vEB_eps order.
class TreeStore {
public:
    static constexpr std::size_t kFingerCapacity = 4;

    explicit TreeStore(LayoutParams params, BlockMemory* memory = nullptr);

    TreeStore(const TreeStore&) = delete;
    TreeStore& operator=(const TreeStore&) = delete;
    TreeStore(TreeStore&&) = default;
    TreeStore& operator=(TreeStore&&) = default;

    [[nodiscard]] Index root() const noexcept { return root_; }
    [[nodiscard]] const LayoutParams& params() const noexcept { return params_; }
    [[nodiscard]] const HTable& h_table() const noexcept { return h_; }
    [[nodiscard]] std::size_t vertex_count() const noexcept { return pma_.live_count(); }
    [[nodiscard]] PmaStore& pma() noexcept { return pma_; }
    [[nodiscard]] const PmaStore& pma() const noexcept { return pma_; }

    // Navigation. All reads go through the block memory.
    [[nodiscard]] std::uint32_t depth(Index v) const { return slot(v).depth; }
    [[nodiscard]] std::uint32_t degree(Index v) const { return slot(v).child_count; }
    [[nodiscard]] Index child(Index v, std::uint32_t rank) const;
    [[nodiscard]] Index walk(std::span<const std::uint32_t> ranks) const;

    // Fingers: registered root-to-vertex paths repaired across relocations.
    FingerId descend(std::span<const std::uint32_t> ranks);
    FingerId register_finger(std::vector<Index> path);
    void set_finger_path(FingerId f, std::vector<Index> path);
    [[nodiscard]] const std::vector<Index>& finger_path(FingerId f) const;
    [[nodiscard]] Index finger_target(FingerId f) const { return finger_path(f).back(); }
    [[nodiscard]] bool finger_valid(FingerId f) const;
    void release(FingerId f);

    Index insert_subtree(Index v, std::uint32_t c);
    void remove_subtree(Index v, std::uint32_t c);

    [[nodiscard]] std::vector<Index> subtree_intervals_beginnings(Index v) const;
    [[nodiscard]] std::vector<Index> subtree_intervals_ends(Index v) const;
    [[nodiscard]] std::vector<std::uint64_t> new_subtree_interval_sizes(std::uint32_t d) const;

    /// Appends the parent edge of every relocated vertex in cells [l, r].
    void recalculate_pointers(Index l, Index r, ChangeList& changes);
    Index build_subtree(std::uint32_t d0, const InsertTable& table);

    [[nodiscard]] const DfsStats& dfs_stats() const noexcept { return dfs_; }
    void set_visit_log(std::vector<Index>* log) noexcept { visit_log_ = log; }

    [[nodiscard]] const Payload& payload(Index v) const { return slot(v).payload; }
    [[nodiscard]] Payload& payload_mut(Index v) { return pma_.write(v).payload; }
    template <class T>
    [[nodiscard]] T load(Index v) const {
        return slot(v).template load<T>();
    }
    template <class T>
    void store(Index v, const T& value) {
        pma_.write(v).store(value);
    }

    [[nodiscard]] ValidationReport validate() const;

    /// Live cells in memory order.
    [[nodiscard]] std::vector<Index> live_cells() const;

    /// The stored tree as an explicit tree; `cells[i]` is the cell of node i.
    [[nodiscard]] ExplicitTree to_explicit(std::vector<Index>* cells = nullptr) const;

    /// If the stored tree has the same shape as `reference` (children matched
    /// by rank), returns the cell of every reference node.
    [[nodiscard]] std::optional<std::vector<Index>> match_reference(const ExplicitTree& reference) const;

    /// `cell,depth,child0..child{b-1},payload-hex` per live cell.
    [[nodiscard]] std::string dump() const;

private:
    struct Finger {
        std::vector<Index> path;
        bool in_use = false;
        bool valid = false;
    };

    [[nodiscard]] const Slot& slot(Index v) const;
    [[nodiscard]] Index leftmost_at(Index v, std::uint32_t d) const;
    [[nodiscard]] Index rightmost_at(Index v, std::uint32_t d) const;
    [[nodiscard]] bool in_subtree(Index x, Index v) const;
    [[nodiscard]] Index child_toward(Index v, Index x) const;
    [[nodiscard]] std::uint32_t rank_of(Index parent, Index v) const;
    [[nodiscard]] std::uint32_t h_of(std::uint32_t d) const { return h_[d]; }
    InsertTable run_batch(const std::vector<UpdateOp>& ops, std::vector<Index*> watched);
    Finger& finger(FingerId f);
    [[nodiscard]] const Finger& finger(FingerId f) const;

    LayoutParams params_;
    HTable h_;
    BlockMemory* memory_ = nullptr;
    PmaStore pma_;
    Index root_ = kNoIndex;
    std::array<Finger, kFingerCapacity> fingers_{};
    DfsStats dfs_;
    std::vector<Index>* visit_log_ = nullptr;
};

} // namespace corobts
