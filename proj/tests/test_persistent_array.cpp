#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "corobts/errors.hpp"
#include "corobts/persistent_array.hpp"

#include <random>
#include <sstream>

using namespace corobts;

namespace {

// Replays the log over a plain array and compares every (cell, version).
bool matches_replay(PersistentArray& pa) {
    std::vector<std::int64_t> state(pa.capacity(), 0);
    for (std::uint32_t v = 0; v <= pa.version_count(); ++v) {
        if (v > 0) state[pa.log()[v - 1].cell] = pa.log()[v - 1].value;
        for (std::uint32_t c = 0; c < pa.capacity(); ++c) {
            if (pa.read_persistent(c, v) != state[c]) return false;
        }
    }
    for (std::uint32_t c = 0; c < pa.capacity(); ++c) {
        if (pa.read_present(c) != state[c]) return false;
    }
    return true;
}

} // namespace

TEST_CASE("construction") {
    PersistentArray four(4);
    CHECK(four.top_tree().vertex_count() == 7);
    CHECK(four.capacity() == 4);
    CHECK(PersistentArray(2).top_tree().vertex_count() == 3);
    for (std::uint32_t c = 0; c < 4; ++c) CHECK(four.read_persistent(c, 0) == 0);
    CHECK(four.check_invariants().empty());
    CHECK_THROWS_AS(PersistentArray(6), precondition_fault);
    CHECK_THROWS_AS(PersistentArray(1), precondition_fault);
}

TEST_CASE("first write fills a leaf and its parent gains an open leaf above it") {
    PersistentArray pa(4);
    CHECK(pa.write(2, 7) == 1);
    CHECK(pa.counters().expansions == 1);
    CHECK(pa.top_tree().vertex_count() == 8);
    CHECK(pa.read_persistent(2, 0) == 0);
    CHECK(pa.read_persistent(2, 1) == 7);
    CHECK(pa.read_present(2) == 7);
    CHECK(pa.read_present(1) == 0);
    CHECK(pa.check_invariants().empty());
}

TEST_CASE("filling two sibling leaves expands up to the root") {
    PersistentArray pa(4);
    pa.write(0, 1);
    pa.write(1, 2);
    CHECK(pa.counters().expansions == 2);
    CHECK(pa.top_tree().vertex_count() == 11);
    CHECK(pa.top_tree().degree(pa.top_tree().root()) == 3);
    CHECK(pa.counters().gains_by_height.at(1) == 1);
    CHECK(pa.counters().gains_by_height.at(2) == 1);
    CHECK(pa.check_invariants().empty());
    CHECK(matches_replay(pa));
}

TEST_CASE("present reads") {
    PersistentArray pa(8);
    pa.write(3, 5);
    pa.write(3, 6);
    CHECK(pa.read_present(3) == 6);
    CHECK(pa.read_present(4) == 0);
    CHECK(pa.read_persistent(3, 1) == 5);
    CHECK_THROWS_AS((void)pa.read_present(8), std::out_of_range);
    CHECK_THROWS_AS((void)pa.read_persistent(0, 3), precondition_fault);
}

TEST_CASE("rollover") {
    PersistentArray pa(2);
    pa.write(0, 4);
    pa.write(1, 5);
    CHECK(pa.bottom_tree_count() == 1);
    CHECK(pa.points_in_top() == 0);
    CHECK(matches_replay(pa));
    pa.write(1, 6);
    pa.write(0, 7);
    CHECK(pa.bottom_tree_count() == 2);
    CHECK(pa.counters().rollovers == 2);
    CHECK(matches_replay(pa));
}

TEST_CASE("doubling") {
    PersistentArray pa(2);
    pa.write(1, 1);
    pa.write(3, 9);
    CHECK(pa.capacity() == 4);
    CHECK(pa.counters().doublings == 1);
    CHECK(matches_replay(pa));
    pa.write(6, 2);
    CHECK(pa.capacity() == 8);
    CHECK(matches_replay(pa));

    PersistentArray empty(2);
    empty.grow();
    CHECK(empty.capacity() == 4);
    CHECK(empty.version_count() == 0);
    CHECK(empty.read_persistent(3, 0) == 0);
}

TEST_CASE("random writes match the replay oracle") {
    std::mt19937_64 rng(21);
    for (std::uint32_t u : {2u, 4u, 16u, 64u}) {
        PersistentArray pa(u);
        for (int i = 0; i < 600; ++i) {
            pa.write(static_cast<std::uint32_t>(rng() % u), static_cast<std::int64_t>(rng() % 100));
            if (i % 50 == 0) REQUIRE(pa.check_invariants().empty());
        }
        CAPTURE(u);
        CHECK(matches_replay(pa));
    }
}

TEST_CASE("warm read finger costs fewer transfers") {
    BlockMemory mem({8, 16, true});
    PersistentArray pa(256, &mem);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) pa.write(static_cast<std::uint32_t>(rng() % 256), i);
    (void)pa.read_persistent(100, 150);
    mem.flush();
    mem.reset_stats();
    (void)pa.read_persistent(100, 150);
    const auto cold = mem.snapshot_stats().transfers;
    mem.reset_stats();
    (void)pa.read_persistent(100, 150);
    const auto warm = mem.snapshot_stats().transfers;
    CHECK(warm < cold);
}

TEST_CASE("log round trip") {
    PersistentArray pa(4);
    pa.write(1, 3);
    pa.write(2, -8);
    std::stringstream log;
    pa.export_log(log);
    auto copy = PersistentArray::import_log(log, 4);
    CHECK(copy.version_count() == 2);
    CHECK(copy.read_persistent(2, 2) == -8);

    std::ostringstream snap;
    pa.export_snapshot(snap, 1);
    CHECK(snap.str() == "version,cell,value\n1,0,0\n1,1,3\n1,2,0\n1,3,0\n");
}
