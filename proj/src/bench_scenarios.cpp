#include "corobts/bench.hpp"

#include "corobts/persistent_array.hpp"
#include "corobts/pma.hpp"
#include "corobts/tree_store.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace corobts::bench {

void ScenarioSpec::check() const {
    if (scenario != "search" && scenario != "insert-remove" && scenario != "pma-churn" && scenario != "persist") {
        throw std::invalid_argument("unknown scenario '" + scenario + "'");
    }
    if (n == 0 || u == 0 || writes == 0 || reps == 0) throw std::invalid_argument("sizes must be positive");
    if (scenario == "persist" && (u < 2 || (u & (u - 1)) != 0)) throw std::invalid_argument("u must be a power of two >= 2");
    if (block_size == 0 || cache_blocks == 0) throw std::invalid_argument("block and cache sizes must be positive");
    LayoutParams{eps, 1, a, b}.check();
}

std::string csv_header() { return std::string(kStatsCsvHeader) + ",measured_quantity"; }

std::string csv_line(const Row& row) {
    char measured[64];
    std::snprintf(measured, sizeof measured, "%.6g", row.measured_quantity);
    return stats_csv_row({row.n, row.eps, row.a, row.b, row.block_size, row.cache_blocks, row.operation},
                         {row.transfers, row.accesses, 0}) +
           ',' + measured;
}

std::uint32_t height_for(std::uint64_t n, std::uint32_t a) {
    std::uint32_t h = 1;
    while (ary_subtree_size(a, h + 1) <= n) ++h;
    return h;
}

namespace {

Row base_row(const ScenarioSpec& s, std::uint64_t n, std::string op) {
    return Row{n, s.eps.str(), s.a, s.b, s.block_size, s.cache_blocks, std::move(op), 0, 0, 0};
}

// Picks a uniformly random root-to-depth path by ranks; memory accounting is
// suspended while choosing.
Index random_vertex(TreeStore& t, BlockMemory& mem, std::uint32_t depth, std::mt19937_64& rng) {
    const bool was = mem.enabled();
    mem.set_enabled(false);
    Index v = t.root();
    for (std::uint32_t d = 0; d < depth; ++d) v = t.child(v, static_cast<std::uint32_t>(rng() % t.degree(v)));
    mem.set_enabled(was);
    return v;
}

Index kth_live(const PmaStore& p, std::uint64_t k) {
    for (Index c = 0; c < p.size(); ++c) {
        if (p.peek(c).occupied && k-- == 0) return c;
    }
    throw std::out_of_range("rank beyond live count");
}

std::vector<Row> run_search(const ScenarioSpec& s) {
    const auto height = height_for(s.n, s.a);
    BlockMemory mem({s.block_size, s.cache_blocks, true});
    mem.set_enabled(false);
    TreeStore t(LayoutParams{s.eps, height, s.a, s.b}, &mem);
    mem.set_enabled(true);
    std::mt19937_64 rng(s.seed);
    const double log_b = std::log(static_cast<double>(t.vertex_count())) / std::log(static_cast<double>(s.block_size));
    std::vector<Row> rows;
    std::vector<std::uint32_t> ranks(height - 1);
    for (std::uint64_t i = 0; i < s.reps; ++i) {
        for (auto& r : ranks) r = static_cast<std::uint32_t>(rng() % s.a);
        if (!s.warm) mem.flush();
        mem.reset_stats();
        (void)t.walk(ranks);
        const auto st = mem.snapshot_stats();
        Row row = base_row(s, t.vertex_count(), "descent");
        row.transfers = st.transfers;
        row.accesses = st.accesses;
        row.measured_quantity = static_cast<double>(st.transfers) / log_b;
        rows.push_back(row);
    }
    return rows;
}

std::vector<Row> run_insert_remove(const ScenarioSpec& s) {
    const auto height = height_for(s.n, s.a);
    if (height < 2) throw std::invalid_argument("insert-remove needs a tree of height >= 2");
    BlockMemory mem({s.block_size, s.cache_blocks, true});
    mem.set_enabled(false);
    TreeStore t(LayoutParams{s.eps, height, s.a, s.b}, &mem);
    mem.set_enabled(true);
    std::mt19937_64 rng(s.seed);
    std::vector<Row> rows;
    for (std::uint64_t i = 0; i < s.reps; ++i) {
        const Index v = random_vertex(t, mem, height - 2, rng);
        const auto deg = t.degree(v);
        const bool insert = deg < s.b && (deg == s.a || rng() % 2 == 0);
        const auto rank = static_cast<std::uint32_t>(rng() % (insert ? deg + 1 : deg));
        if (!s.warm) mem.flush();
        mem.reset_stats();
        const auto moved_before = t.pma().counters().slots_moved;
        if (insert) t.insert_subtree(v, rank);
        else t.remove_subtree(v, rank);
        const auto st = mem.snapshot_stats();
        Row row = base_row(s, t.vertex_count(), insert ? "insert" : "remove");
        row.transfers = st.transfers;
        row.accesses = st.accesses;
        row.measured_quantity = static_cast<double>(t.pma().counters().slots_moved - moved_before);
        rows.push_back(row);
    }
    return rows;
}

std::vector<Row> run_pma_churn(const ScenarioSpec& s) {
    BlockMemory mem({s.block_size, s.cache_blocks, true});
    PmaStore p(&mem, 1);
    p.batch_update({UpdateOp::insert_after(kBeforeAll, static_cast<Index>(s.n))});
    std::mt19937_64 rng(s.seed);
    std::vector<Row> rows;
    for (std::uint64_t i = 0; i < s.reps; ++i) {
        const bool insert = p.live_count() <= 1 || rng() % 2 == 0;
        std::vector<UpdateOp> batch;
        if (insert) {
            const auto r = rng() % (p.live_count() + 1);
            batch.push_back(UpdateOp::insert_after(r == 0 ? kBeforeAll : kth_live(p, r - 1), 1));
        } else {
            const Index c = kth_live(p, rng() % p.live_count());
            batch.push_back(UpdateOp::remove_run(c, c));
        }
        if (!s.warm) mem.flush();
        mem.reset_stats();
        const auto moved_before = p.counters().slots_moved;
        p.batch_update(batch);
        const auto st = mem.snapshot_stats();
        Row row = base_row(s, p.live_count(), insert ? "insert" : "remove");
        row.transfers = st.transfers;
        row.accesses = st.accesses;
        row.measured_quantity = static_cast<double>(p.counters().slots_moved - moved_before);
        rows.push_back(row);
    }
    return rows;
}

std::vector<Row> run_persist(const ScenarioSpec& s) {
    BlockMemory mem({s.block_size, s.cache_blocks, true});
    PersistentArray pa(s.u, &mem, s.eps);
    std::mt19937_64 rng(s.seed);
    std::vector<Row> rows;
    auto emit = [&](std::string op, double q) {
        const auto st = mem.snapshot_stats();
        Row row = base_row(s, pa.capacity(), std::move(op));
        row.a = 2;
        row.b = 3;
        row.transfers = st.transfers;
        row.accesses = st.accesses;
        row.measured_quantity = q;
        rows.push_back(row);
        mem.reset_stats();
    };
    mem.reset_stats();
    for (std::uint64_t i = 0; i < s.writes; ++i) {
        const auto before = pa.bottom_tree_count();
        pa.write(static_cast<std::uint32_t>(rng() % pa.capacity()), static_cast<std::int64_t>(rng() % 1000000));
        if (pa.bottom_tree_count() != before) emit("epoch_slots", static_cast<double>(pa.total_slots()));
    }
    emit("total_slots", static_cast<double>(pa.total_slots()));
    const auto& gains = pa.counters().gains_by_height;
    for (std::size_t h = 1; h < gains.size(); ++h) {
        emit("third_child_gains_h" + std::to_string(h), static_cast<double>(gains[h]));
    }
    return rows;
}

} // namespace

std::vector<Row> run_scenario(const ScenarioSpec& spec) {
    spec.check();
    if (spec.scenario == "search") return run_search(spec);
    if (spec.scenario == "insert-remove") return run_insert_remove(spec);
    if (spec.scenario == "pma-churn") return run_pma_churn(spec);
    return run_persist(spec);
}

SearchPoint measure_search(std::uint32_t height, Rational eps, std::size_t block, std::size_t cache,
                           std::uint64_t reps, std::uint64_t seed, bool warm) {
    ScenarioSpec s;
    s.scenario = "search";
    s.n = ary_subtree_size(2, height);
    s.eps = eps;
    s.a = 2;
    s.b = 3;
    s.block_size = block;
    s.cache_blocks = cache;
    s.reps = reps;
    s.seed = seed;
    s.warm = warm;
    const auto rows = run_scenario(s);
    SearchPoint p;
    p.n = s.n;
    for (const auto& r : rows) p.mean_transfers += static_cast<double>(r.transfers);
    p.mean_transfers /= static_cast<double>(rows.size());
    p.log_b_n = std::log(static_cast<double>(p.n)) / std::log(static_cast<double>(block));
    return p;
}

UpdatePoint measure_updates(std::uint32_t height, Rational eps, std::uint32_t a, std::uint32_t b, std::size_t block,
                            std::size_t cache, std::uint64_t ops, std::uint64_t seed, bool warm) {
    ScenarioSpec s;
    s.scenario = "insert-remove";
    s.n = ary_subtree_size(a, height);
    s.eps = eps;
    s.a = a;
    s.b = b;
    s.block_size = block;
    s.cache_blocks = cache;
    s.reps = ops;
    s.seed = seed;
    s.warm = warm;
    const auto rows = run_scenario(s);
    UpdatePoint p;
    p.n = s.n;
    p.ops = rows.size();
    for (const auto& r : rows) {
        p.moved_per_op += r.measured_quantity;
        p.transfers_per_op += static_cast<double>(r.transfers);
    }
    p.moved_per_op /= static_cast<double>(p.ops);
    p.transfers_per_op /= static_cast<double>(p.ops);
    return p;
}

} // namespace corobts::bench
