#include "corobts/block_memory.hpp"

#include <stdexcept>
#include <string>

namespace corobts {

BlockMemory::BlockMemory(BlockMemoryConfig config) : config_(config) {
    if (config_.block_size_slots == 0) throw std::invalid_argument("block_size_slots must be >= 1");
    if (config_.cache_size_blocks == 0) throw std::invalid_argument("cache_size_blocks must be >= 1");
}

ArenaHandle BlockMemory::register_arena(std::size_t length) {
    if (length == 0) throw std::invalid_argument("arena length must be >= 1");
    const std::size_t blocks = (length + config_.block_size_slots - 1) / config_.block_size_slots;
    arenas_.push_back({next_block_, length, true});
    next_block_ += blocks;
    return ArenaHandle{static_cast<std::uint32_t>(arenas_.size() - 1)};
}

void BlockMemory::release_arena(ArenaHandle arena) {
    if (arena.id < arenas_.size()) arenas_[arena.id].live = false;
}

void BlockMemory::access(ArenaHandle arena, std::size_t index, AccessKind) {
    if (arena.id >= arenas_.size() || !arenas_[arena.id].live || index >= arenas_[arena.id].length) {
        throw std::out_of_range("access outside registered arena (arena " + std::to_string(arena.id) +
                                ", index " + std::to_string(index) + ")");
    }
    if (!config_.enabled) return;
    ++stats_.accesses;
    touch_block(arenas_[arena.id].first_block + index / config_.block_size_slots);
}

void BlockMemory::touch_block(std::uint64_t block) {
    auto it = where_.find(block);
    if (it != where_.end()) {
        lru_.splice(lru_.begin(), lru_, it->second);
        return;
    }
    ++stats_.transfers;
    if (lru_.size() >= config_.cache_size_blocks) {
        where_.erase(lru_.back());
        lru_.pop_back();
        ++stats_.evictions;
    }
    lru_.push_front(block);
    where_.emplace(block, lru_.begin());
}

std::string stats_csv_row(const StatsRowContext& ctx, const TransferStats& stats) {
    return std::to_string(ctx.n) + ',' + ctx.eps + ',' + std::to_string(ctx.a) + ',' + std::to_string(ctx.b) + ',' +
           std::to_string(ctx.block_size) + ',' + std::to_string(ctx.cache_blocks) + ',' + ctx.operation + ',' +
           std::to_string(stats.transfers) + ',' + std::to_string(stats.accesses);
}

void BlockMemory::flush() {
    lru_.clear();
    where_.clear();
}

} // namespace corobts
