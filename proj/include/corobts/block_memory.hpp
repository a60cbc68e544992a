#pragma once

#include <cstddef>
#include <cstdint>
#include <list>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace corobts {

struct BlockMemoryConfig {
    std::size_t block_size_slots = 64;  // B, in slots
    std::size_t cache_size_blocks = 1024; // M / B
    bool enabled = true;
};

struct TransferStats {
    std::uint64_t transfers = 0;
    std::uint64_t accesses = 0;
    std::uint64_t evictions = 0;

    friend bool operator==(const TransferStats&, const TransferStats&) = default;
};

/// Labels for one exported stats row.
struct StatsRowContext {
    std::uint64_t n = 0;
    std::string eps;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::size_t block_size = 0;
    std::size_t cache_blocks = 0;
    std::string operation;
};

inline constexpr const char* kStatsCsvHeader = "n,eps,a,b,block_size,cache_blocks,operation,transfers,accesses";

std::string stats_csv_row(const StatsRowContext& ctx, const TransferStats& stats);

enum class AccessKind : std::uint8_t { read, write };

struct ArenaHandle {
    std::uint32_t id = UINT32_MAX;
    [[nodiscard]] bool valid() const noexcept { return id != UINT32_MAX; }
};

/// Simulated two-level memory: every registered arena is laid out on its own
/// run of blocks, and accesses are replayed through an LRU cache of
/// `cache_size_blocks` blocks. Only block transfers are counted; data lives
/// wherever the owner keeps it.
class BlockMemory {
public:
    explicit BlockMemory(BlockMemoryConfig config = {});

    ArenaHandle register_arena(std::size_t length);
    void release_arena(ArenaHandle arena);

    void access(ArenaHandle arena, std::size_t index, AccessKind kind);

    void reset_stats() noexcept { stats_ = {}; }
    [[nodiscard]] TransferStats snapshot_stats() const noexcept { return stats_; }

    /// Evicts every resident block without touching the counters.
    void flush();

    void set_enabled(bool enabled) noexcept { config_.enabled = enabled; }
    [[nodiscard]] bool enabled() const noexcept { return config_.enabled; }
    [[nodiscard]] const BlockMemoryConfig& config() const noexcept { return config_; }
    [[nodiscard]] std::size_t resident_blocks() const noexcept { return lru_.size(); }

private:
    struct Arena {
        std::uint64_t first_block = 0;
        std::size_t length = 0;
        bool live = false;
    };

    void touch_block(std::uint64_t block);

    BlockMemoryConfig config_;
    TransferStats stats_;
    std::vector<Arena> arenas_;
    std::uint64_t next_block_ = 0;
    std::list<std::uint64_t> lru_; // front = most recently used
    std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator> where_;
};

/// A vector whose element accesses are reported to a BlockMemory, one slot
/// per element. `peek` bypasses accounting and is meant for checkers.
template <class T>
class TrackedArray {
public:
    TrackedArray() = default;

    TrackedArray(BlockMemory* memory, std::size_t length, const T& fill = T{})
        : data_(length, fill), memory_(memory) {
        if (memory_ != nullptr && length > 0) handle_ = memory_->register_arena(length);
    }

    TrackedArray(const TrackedArray&) = delete;
    TrackedArray& operator=(const TrackedArray&) = delete;

    TrackedArray(TrackedArray&& other) noexcept
        : data_(std::move(other.data_)), memory_(other.memory_), handle_(other.handle_) {
        other.memory_ = nullptr;
        other.handle_ = {};
    }

    TrackedArray& operator=(TrackedArray&& other) noexcept {
        if (this != &other) {
            release();
            data_ = std::move(other.data_);
            memory_ = other.memory_;
            handle_ = other.handle_;
            other.memory_ = nullptr;
            other.handle_ = {};
        }
        return *this;
    }

    ~TrackedArray() { release(); }

    [[nodiscard]] const T& read(std::size_t i) const {
        touch(i, AccessKind::read);
        return data_[i];
    }

    [[nodiscard]] T& write(std::size_t i) {
        touch(i, AccessKind::write);
        return data_[i];
    }

    [[nodiscard]] const T& peek(std::size_t i) const { return data_[i]; }
    [[nodiscard]] T& peek_mut(std::size_t i) { return data_[i]; }

    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
    [[nodiscard]] BlockMemory* memory() const noexcept { return memory_; }

private:
    void touch(std::size_t i, AccessKind kind) const {
        if (memory_ != nullptr && memory_->enabled()) memory_->access(handle_, i, kind);
    }

    void release() {
        if (memory_ != nullptr && handle_.valid()) memory_->release_arena(handle_);
        handle_ = {};
    }

    std::vector<T> data_;
    BlockMemory* memory_ = nullptr;
    ArenaHandle handle_{};
};

} // namespace corobts
