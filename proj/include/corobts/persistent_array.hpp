#pragma once

#include "corobts/block_memory.hpp"
#include "corobts/tree_store.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace corobts {

inline constexpr std::uint32_t kOpen = UINT32_MAX;

/// Space-time rectangle stored in a slot payload. Space is [space_lo,
/// space_hi), time is [time_lo, time_hi) with kOpen meaning unbounded.
struct StNode {
    std::uint32_t space_lo = 0;
    std::uint32_t space_hi = 0;
    std::uint32_t time_lo = 0;
    std::uint32_t time_hi = kOpen;
    std::int64_t boundary = 0; // leaves: value of the cell at time_lo
    std::int64_t point_value = 0;
    std::uint32_t point_version = 0;
    std::uint8_t has_point = 0;
    std::uint8_t is_full = 0;

    [[nodiscard]] bool open() const noexcept { return time_hi == kOpen; }
    [[nodiscard]] bool contains(std::uint32_t cell, std::uint32_t version) const noexcept {
        return space_lo <= cell && cell < space_hi && time_lo <= version && version < time_hi;
    }
};
static_assert(sizeof(StNode) <= kPayloadBytes);

struct LogEntry {
    std::uint32_t cell = 0;
    std::int64_t value = 0;
};

/// A closed ST-tree with its holes removed; node 0 is the root.
class BottomTree {
public:
    BottomTree(BlockMemory* memory, const TreeStore& top);

    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] const Slot& read(Index i) const { return nodes_.read(i); }
    [[nodiscard]] const Slot& peek(Index i) const { return nodes_.peek(i); }
    [[nodiscard]] std::uint32_t time_lo() const { return nodes_.peek(0).load<StNode>().time_lo; }

private:
    TrackedArray<Slot> nodes_;
};

struct PersistCounters {
    std::vector<std::uint64_t> gains_by_height; // third children added, by inserted subtree height
    std::uint64_t expansions = 0;
    std::uint64_t rollovers = 0;
    std::uint64_t doublings = 0;
    std::uint64_t read_steps = 0; // nodes entered by persistent reads
};

class PersistentArray {
public:
    explicit PersistentArray(std::uint32_t capacity, BlockMemory* memory = nullptr, Rational eps = {1, 2});

    std::uint32_t write(std::uint32_t cell, std::int64_t value);
    [[nodiscard]] std::int64_t read_present(std::uint32_t cell) const;
    [[nodiscard]] std::int64_t read_persistent(std::uint32_t cell, std::uint32_t version);

    void rollover();
    void grow();

    [[nodiscard]] std::uint32_t capacity() const noexcept { return capacity_; }
    [[nodiscard]] std::uint32_t version_count() const noexcept { return static_cast<std::uint32_t>(log_.size()); }
    [[nodiscard]] const std::vector<LogEntry>& log() const noexcept { return log_; }
    [[nodiscard]] std::size_t bottom_tree_count() const noexcept { return bottoms_.size(); }
    [[nodiscard]] std::uint32_t points_in_top() const noexcept { return points_in_top_; }
    [[nodiscard]] const TreeStore& top_tree() const noexcept { return *top_; }
    [[nodiscard]] const PersistCounters& counters() const noexcept { return counters_; }

    /// Slots held by every ST-tree: the top tree's whole PMA plus the
    /// compacted bottom trees.
    [[nodiscard]] std::size_t total_slots() const;

    /// Structural checks of the top tree: rectangle partition, widths, no
    /// open full rectangle, and the tree store's own validation.
    [[nodiscard]] std::vector<std::string> check_invariants() const;

    void export_snapshot(std::ostream& out, std::uint32_t version);
    void export_log(std::ostream& out) const;
    static PersistentArray import_log(std::istream& in, std::uint32_t capacity, BlockMemory* memory = nullptr,
                                      Rational eps = {1, 2});

private:
    void build_top(std::uint32_t time_lo);
    void fill_subtree(Index root, std::uint32_t space_lo, std::uint32_t width, std::uint32_t time_lo);
    void close_subtree(Index root, std::uint32_t time_hi);
    [[nodiscard]] std::vector<Index> open_path_to(std::uint32_t cell);
    [[nodiscard]] std::int64_t read_top(std::uint32_t cell, std::uint32_t version);
    [[nodiscard]] std::int64_t read_bottom(std::size_t tree, std::uint32_t cell, std::uint32_t version);
    [[nodiscard]] StNode node(Index v) const { return top_->load<StNode>(v); }
    void put(Index v, const StNode& n) { top_->store(v, n); }

    BlockMemory* memory_ = nullptr;
    Rational eps_;
    std::uint32_t capacity_ = 0;
    std::uint32_t height_ = 0; // log2(U) + 1
    TrackedArray<std::int64_t> present_;
    std::vector<LogEntry> log_;
    std::unique_ptr<TreeStore> top_;
    std::vector<BottomTree> bottoms_;
    std::uint32_t points_in_top_ = 0;
    FingerId write_finger_{};
    FingerId read_finger_{};
    std::size_t read_tree_ = SIZE_MAX; // tree of the read finger; bottoms_.size() = top
    std::vector<Index> read_path_;     // read finger inside a bottom tree
    PersistCounters counters_;
};

} // namespace corobts
