#pragma once

#include "corobts/block_memory.hpp"
#include "corobts/slot.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace corobts {

/// Anchor value for an INSERT placed in front of every existing cell.
inline constexpr Index kBeforeAll = kNoIndex - 1;

struct UpdateOp {
    enum class Kind : std::uint8_t { insert, remove };

    Kind kind = Kind::insert;
    Index anchor = kBeforeAll; // INSERT: new cells go after this one; REMOVE: first cell of the run
    Index count_or_end = 0;    // INSERT: number of new cells; REMOVE: last cell of the run

    static UpdateOp insert_after(Index anchor, Index count) { return {Kind::insert, anchor, count}; }
    static UpdateOp remove_run(Index first, Index last) { return {Kind::remove, first, last}; }
};

struct PlanInterval {
    Index l = 0;
    Index r = 0;
    std::uint64_t n = 0; // live cells after the batch

    friend bool operator==(const PlanInterval&, const PlanInterval&) = default;
};

struct IntervalPlan {
    std::vector<PlanInterval> intervals;
    std::size_t target_size = 0;
    bool resize = false;
};

/// M[i][j] = position of the j-th new cell of the i-th INSERT.
class InsertTable {
public:
    InsertTable() = default;
    InsertTable(BlockMemory* memory, std::vector<std::size_t> row_sizes);

    [[nodiscard]] std::size_t rows() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    [[nodiscard]] std::size_t row_size(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
    [[nodiscard]] std::size_t total() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }

    [[nodiscard]] Index at(std::size_t i, std::size_t j) const { return cells_.read(offsets_[i] + j); }
    void set(std::size_t i, std::size_t j, Index v) { cells_.write(offsets_[i] + j) = v; }
    [[nodiscard]] Index peek(std::size_t i, std::size_t j) const { return cells_.peek(offsets_[i] + j); }
    void rebase(const std::function<Index(Index)>& remap);

    [[nodiscard]] std::vector<std::vector<Index>> to_vectors() const;

private:
    std::vector<std::size_t> offsets_;
    TrackedArray<Index> cells_;
};

/// One child-pointer fix: set children[rank] of the cell at `parent`
/// (a post-move position) to `child` (also post-move).
struct Change {
    Index parent = kNoIndex;
    Index rank = 0;
    Index child = kNoIndex;

    friend bool operator==(const Change&, const Change&) = default;
};

/// Preallocated change list, one entry per possibly relocated cell.
class ChangeList {
public:
    ChangeList(BlockMemory* memory, std::size_t capacity) : entries_(memory, capacity == 0 ? 1 : capacity) {}

    void push(const Change& c);
    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] const Change& read(std::size_t i) const { return entries_.read(i); }
    [[nodiscard]] const Change& peek(std::size_t i) const { return entries_.peek(i); }

private:
    TrackedArray<Change> entries_;
    std::size_t size_ = 0;
};

/// Called once per plan interval between position computation and data
/// movement. Cells in [l, r] carry their relocation; the hook must not
/// mutate the store.
using RecalcHook = std::function<void(Index l, Index r, ChangeList& changes)>;

struct PmaCounters {
    std::uint64_t batches = 0;
    std::uint64_t rebuilds = 0;
    std::uint64_t cells_scanned = 0; // cells read while planning, placing and moving
    std::uint64_t slots_moved = 0;   // surviving cells whose position changed
    std::uint64_t last_scanned = 0;
    std::uint64_t last_plan_cells = 0;
    std::uint64_t last_plan_intervals = 0;
};

class PmaStore {
public:
    explicit PmaStore(BlockMemory* memory = nullptr, std::size_t initial_size = 1);

    /// Test factory: a store of `occupied.size()` cells (a power of two) with
    /// the given occupancy; occupied cells carry their index as payload.
    static PmaStore from_occupancy(BlockMemory* memory, const std::vector<bool>& occupied);

    [[nodiscard]] IntervalPlan get_intervals(const std::vector<UpdateOp>& batch);
    [[nodiscard]] InsertTable calc_new_positions(const std::vector<UpdateOp>& batch, const IntervalPlan& plan);
    InsertTable batch_update(const std::vector<UpdateOp>& batch, const RecalcHook& recalc = {});

    [[nodiscard]] std::size_t size() const noexcept { return cells_.size(); }
    [[nodiscard]] std::size_t live_count() const noexcept { return live_; }
    [[nodiscard]] std::size_t segment_size() const noexcept { return seg_; }
    [[nodiscard]] std::size_t segment_count() const noexcept { return cells_.size() / seg_; }
    [[nodiscard]] std::uint32_t levels() const noexcept { return levels_; }

    [[nodiscard]] const Slot& read(Index i) const { return cells_.read(i); }
    [[nodiscard]] Slot& write(Index i) { return cells_.write(i); }
    [[nodiscard]] const Slot& peek(Index i) const { return cells_.peek(i); }
    [[nodiscard]] Slot& peek_mut(Index i) { return cells_.peek_mut(i); }

    /// First occupied cell at or after / before `from`, kNoIndex if none.
    [[nodiscard]] Index next_occupied(Index from) const;
    [[nodiscard]] Index prev_occupied(Index before) const;

    /// Whether `count` live cells in a node of `width` cells at `level`
    /// respects that level's density bounds.
    [[nodiscard]] bool within_bounds(std::uint64_t count, std::uint64_t width, std::uint32_t level) const noexcept;

    /// Recounts every virtual node from the cells; lists violations.
    [[nodiscard]] std::vector<std::string> check_density() const;

    /// `index,occupied,depth,child0..child{arity-1}` per cell.
    [[nodiscard]] std::string dump(std::size_t arity) const;

    [[nodiscard]] const PmaCounters& counters() const noexcept { return counters_; }
    void reset_counters() noexcept { counters_ = {}; }
    [[nodiscard]] BlockMemory* memory() const noexcept { return memory_; }

private:
    struct Event {
        Index pos;
        std::int64_t delta;
    };

    void set_geometry(std::size_t size);
    void rebuild_count_tree();
    [[nodiscard]] std::size_t heap_index(std::uint32_t level, std::size_t block) const noexcept {
        return (segment_count() >> level) + block;
    }
    [[nodiscard]] std::int64_t event_sum(Index l, Index r) const;
    [[nodiscard]] bool node_fits(std::uint32_t level, std::size_t block) const;
    [[nodiscard]] bool spread_fits(std::uint64_t n, std::uint64_t width, std::uint32_t level) const;
    void validate_batch(const std::vector<UpdateOp>& batch) const;
    void collect_events(const std::vector<UpdateOp>& batch);
    void clear_relocations(const IntervalPlan& plan);
    void move_interval(const PlanInterval& iv);
    void refresh_counts(Index l, Index r, std::uint64_t n, std::uint32_t level);

    BlockMemory* memory_ = nullptr;
    TrackedArray<Slot> cells_;
    TrackedArray<std::uint32_t> counts_; // heap over virtual nodes, index 1 = root
    std::size_t seg_ = 1;
    std::uint32_t levels_ = 0;
    std::size_t live_ = 0;
    std::vector<Event> events_;
    std::vector<std::int64_t> event_prefix_;
    std::int64_t batch_delta_ = 0;
    PmaCounters counters_;
};

/// Smallest power of two >= ceil(4n/3), at least 1.
std::size_t rebuild_size(std::size_t live);

/// Segment length for an array of `size` cells.
std::size_t segment_size_for(std::size_t size);

} // namespace corobts
