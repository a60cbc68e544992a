#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "corobts/block_memory.hpp"

#include <algorithm>
#include <deque>
#include <random>

using namespace corobts;

namespace {

// Plain LRU over global block ids; counts misses.
std::uint64_t lru_misses(const std::vector<std::uint64_t>& blocks, std::size_t capacity) {
    std::deque<std::uint64_t> q;
    std::uint64_t misses = 0;
    for (auto b : blocks) {
        auto it = std::find(q.begin(), q.end(), b);
        if (it != q.end()) {
            q.erase(it);
        } else {
            ++misses;
            if (q.size() == capacity) q.pop_back();
        }
        q.push_front(b);
    }
    return misses;
}

} // namespace

TEST_CASE("cold miss then same-block hit") {
    BlockMemory mem({4, 8, true});
    auto h = mem.register_arena(16);
    mem.access(h, 0, AccessKind::read);
    CHECK(mem.snapshot_stats().transfers == 1);
    mem.access(h, 3, AccessKind::write);
    CHECK(mem.snapshot_stats().transfers == 1);
    CHECK(mem.snapshot_stats().accesses == 2);
}

TEST_CASE("one-block cache thrashes on 0,4,0") {
    BlockMemory mem({4, 1, true});
    auto h = mem.register_arena(8);
    for (std::size_t i : {0, 4, 0}) mem.access(h, i, AccessKind::read);
    CHECK(mem.snapshot_stats().transfers == 3);
}

TEST_CASE("arena of 16 slots spans 4 blocks") {
    BlockMemory mem({4, 64, true});
    auto h = mem.register_arena(16);
    for (std::size_t i = 0; i < 16; ++i) mem.access(h, i, AccessKind::read);
    CHECK(mem.snapshot_stats().transfers == 4);
    CHECK(mem.resident_blocks() == 4);
}

TEST_CASE("arenas never share a block") {
    BlockMemory mem({4, 64, true});
    auto a = mem.register_arena(4);
    auto b = mem.register_arena(4);
    mem.access(a, 3, AccessKind::read);
    mem.access(b, 0, AccessKind::read);
    CHECK(mem.snapshot_stats().transfers == 2);

    auto c = mem.register_arena(5);
    mem.access(c, 4, AccessKind::read);
    mem.access(c, 0, AccessKind::read);
    CHECK(mem.snapshot_stats().transfers == 4);
}

TEST_CASE("flush keeps counters, reset keeps cache") {
    BlockMemory mem({4, 8, true});
    auto h = mem.register_arena(8);
    mem.access(h, 0, AccessKind::read);
    mem.flush();
    CHECK(mem.resident_blocks() == 0);
    CHECK(mem.snapshot_stats().transfers == 1);
    mem.access(h, 1, AccessKind::read);
    CHECK(mem.snapshot_stats().transfers == 2);
    mem.reset_stats();
    mem.access(h, 2, AccessKind::read);
    CHECK(mem.snapshot_stats() == TransferStats{0, 1, 0});
}

TEST_CASE("disabled memory counts nothing") {
    BlockMemory mem({4, 8, false});
    TrackedArray<int> arr(&mem, 8);
    arr.write(0) = 5;
    CHECK(arr.read(0) == 5);
    CHECK(mem.snapshot_stats().accesses == 0);
}

TEST_CASE("tracked array reads count, peeks do not") {
    BlockMemory mem({4, 8, true});
    TrackedArray<int> arr(&mem, 8, 7);
    CHECK(arr.peek(5) == 7);
    CHECK(mem.snapshot_stats().accesses == 0);
    CHECK(arr.read(5) == 7);
    CHECK(mem.snapshot_stats().accesses == 1);
}

TEST_CASE("random trace matches a plain LRU") {
    std::mt19937_64 rng(11);
    for (std::size_t cap : {1u, 2u, 3u, 7u}) {
        BlockMemory mem({4, cap, true});
        auto h = mem.register_arena(64);
        std::vector<std::uint64_t> blocks;
        for (int i = 0; i < 2000; ++i) {
            const auto slot = rng() % 64;
            mem.access(h, slot, AccessKind::read);
            blocks.push_back(slot / 4);
        }
        CHECK(mem.snapshot_stats().transfers == lru_misses(blocks, cap));
    }
}

TEST_CASE("stats csv row") {
    StatsRowContext ctx{1023, "1/2", 2, 4, 64, 1024, "descent"};
    CHECK(stats_csv_row(ctx, TransferStats{3, 11, 0}) == "1023,1/2,2,4,64,1024,descent,3,11");
    CHECK(std::string(kStatsCsvHeader) == "n,eps,a,b,block_size,cache_blocks,operation,transfers,accesses");
}

TEST_CASE("bad configuration and out-of-arena access") {
    CHECK_THROWS_AS(BlockMemory({0, 8, true}), std::invalid_argument);
    CHECK_THROWS_AS(BlockMemory({4, 0, true}), std::invalid_argument);
    BlockMemory mem({4, 8, true});
    auto h = mem.register_arena(5);
    CHECK_THROWS_AS(mem.access(h, 5, AccessKind::read), std::out_of_range);
    mem.release_arena(h);
    CHECK_THROWS_AS(mem.access(h, 0, AccessKind::read), std::out_of_range);
}
