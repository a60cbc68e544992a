// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include "corobts/bench.hpp"
#include "corobts/persistent_array.hpp"
#include "corobts/tree_store.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace corobts;
using namespace corobts::bench;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %d %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", id, name, secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

Outcome layout_oracle() {
    LayoutSuiteConfig cfg;
    cfg.validate_each_op = false;
    const auto r = verify_layout_oracle(cfg);
    return {r.pass, r.pass ? std::to_string(r.checks) + " layout comparisons" : r.detail};
}

Outcome invariant_soak() {
    LayoutSuiteConfig cfg;
    cfg.validate_each_op = true;
    const auto r = verify_layout_oracle(cfg);
    return {r.pass, r.pass ? std::to_string(r.checks) + " validations" : r.detail};
}

Outcome search_scaling() {
    double lo = 1e300, hi = 0;
    std::string detail;
    for (std::uint32_t k : {12u, 14u, 16u, 18u, 20u}) {
        const auto p = measure_search(k, {1, 2}, 64, 1024, 1000, k);
        const double norm = p.mean_transfers / p.log_b_n;
        lo = std::min(lo, norm);
        hi = std::max(hi, norm);
        detail += "2^" + std::to_string(k) + ":" + fmt("%.2f", norm) + " ";
    }
    detail += "max/min=" + fmt("%.2f", hi / lo);
    return {hi / lo <= 3.0, detail};
}

Outcome update_scaling() {
    const std::size_t B = 64;
    // leaf-parent level operations insert or remove one vertex, so S = 1
    auto moved_model = [](double n) { return std::pow(std::log2(n), 2); };
    auto transfer_model = [&](double n) {
        const double S = 1;
        return std::pow(std::log2(n), 2) / B + std::log(n) / std::log(double(B)) * (1 + std::log2(std::log2(S + 1)));
    };
    const auto small = measure_updates(12, {1, 2}, 2, 4, B, 1024, 1000, 12);
    const auto large = measure_updates(16, {1, 2}, 2, 4, B, 1024, 1000, 16);
    const double c_move = small.moved_per_op / moved_model(double(small.n));
    const double c_tr = small.transfers_per_op / transfer_model(double(small.n));
    const double r_move = large.moved_per_op / (c_move * moved_model(double(large.n)));
    const double r_tr = large.transfers_per_op / (c_tr * transfer_model(double(large.n)));
    const bool ok = r_move >= 0.5 && r_move <= 2.0 && r_tr >= 0.5 && r_tr <= 2.0;
    return {ok, "moved/op " + fmt("%.2f", small.moved_per_op) + " -> " + fmt("%.2f", large.moved_per_op) +
                    " (ratio " + fmt("%.2f", r_move) + "), transfers/op " + fmt("%.2f", small.transfers_per_op) +
                    " -> " + fmt("%.2f", large.transfers_per_op) + " (ratio " + fmt("%.2f", r_tr) + ")"};
}

Outcome dfs_bound() {
    const Rational eps{1, 2};
    TreeStore t(LayoutParams{eps, 16, 2, 3});
    PmaStore& p = t.pma();
    const auto size = static_cast<Index>(p.size());
    const double slack = 4.0 / eps.to_double() * std::log2(double(t.vertex_count()));
    std::mt19937_64 rng(5);
    double worst = 0;
    for (int i = 0; i < 500; ++i) {
        Index l = static_cast<Index>(rng() % size);
        Index r = i % 2 ? static_cast<Index>(rng() % size) : std::min<Index>(size - 1, l + static_cast<Index>(rng() % 64));
        if (l > r) std::swap(l, r);
        std::uint64_t in_p = 0;
        for (Index c = l; c <= r; ++c) {
            if (p.peek(c).occupied) {
                p.peek_mut(c).relocation = c;
                ++in_p;
            }
        }
        ChangeList changes(nullptr, in_p + 1);
        t.recalculate_pointers(l, r, changes);
        for (Index c = l; c <= r; ++c) p.peek_mut(c).relocation = kNoIndex;
        const double extra = double(t.dfs_stats().last_visits) - double(in_p);
        worst = std::max(worst, extra);
        if (extra > slack) {
            return {false, "interval [" + std::to_string(l) + "," + std::to_string(r) + "] |P|=" +
                               std::to_string(in_p) + " visits=" + std::to_string(t.dfs_stats().last_visits)};
        }
    }
    return {true, "max visits beyond |P| = " + fmt("%.0f", worst) + ", allowed " + fmt("%.1f", slack)};
}

Outcome pma_density() {
    const auto r = verify_pma_density(ChurnSuiteConfig{});
    return {r.pass, r.pass ? std::to_string(r.checks) + " batches checked" : r.detail};
}

Outcome persist_oracle() {
    std::mt19937_64 rng(17);
    const std::uint32_t us[] = {16, 64, 256};
    int doubled = 0;
    std::uint64_t checks = 0;
    for (int run = 0; run < 100; ++run) {
        PersistSuiteConfig cfg;
        cfg.seed = rng();
        cfg.u = us[run % 3];
        cfg.cell_range = run % 4 == 0 ? 2 * cfg.u : 0;
        cfg.writes = 4 * cfg.u + rng() % (10000 - 4 * cfg.u + 1);
        const auto r = verify_persist_oracle(cfg);
        if (!r.pass) return {false, "run " + std::to_string(run) + ": " + r.detail};
        if (r.rollovers == 0) return {false, "run " + std::to_string(run) + " never rolled over"};
        if (r.doublings > 0) ++doubled;
        checks += r.checks;
    }
    return {doubled >= 10, std::to_string(checks) + " queries, doubling in " + std::to_string(doubled) + " runs"};
}

Outcome space_linearity() {
    std::mt19937_64 rng(23);
    double cmin = 1e300, cmax = 0, prev_ratio = 1e300;
    bool decreasing = true;
    std::string detail;
    for (std::uint32_t u : {64u, 256u, 1024u}) {
        PersistentArray pa(u);
        const std::uint64_t v = 4ull * u;
        for (std::uint64_t i = 0; i < v; ++i) pa.write(static_cast<std::uint32_t>(rng() % u), static_cast<std::int64_t>(i));
        const double slots = double(pa.total_slots());
        const double c = slots / (u + double(v) * std::log2(double(u)));
        const double ratio = slots / std::pow(double(u), 1.585);
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
        if (ratio >= prev_ratio) decreasing = false;
        prev_ratio = ratio;
        detail += "U=" + std::to_string(u) + " slots=" + fmt("%.0f", slots) + " c=" + fmt("%.3f", c) + " ";
    }
    detail += "c max/min=" + fmt("%.2f", cmax / cmin) + (decreasing ? "" : ", U^1.585 ratio not decreasing");
    return {cmax / cmin <= 2.0 && decreasing, detail};
}

Outcome third_child_gains() {
    std::mt19937_64 rng(29);
    PersistentArray pa(256);
    const std::uint64_t writes = 10000;
    for (std::uint64_t i = 0; i < writes; ++i) pa.write(static_cast<std::uint32_t>(rng() % 256), static_cast<std::int64_t>(i));
    const auto& g = pa.counters().gains_by_height;
    std::string detail;
    for (std::size_t h = 1; h < g.size(); ++h) {
        const double bound = 2.0 * double(writes) / std::pow(2.0, double(h)) + 8;
        detail += "h" + std::to_string(h) + "=" + std::to_string(g[h]) + " ";
        if (double(g[h]) > bound) return {false, detail + "exceeds " + fmt("%.1f", bound)};
    }
    return {true, detail};
}

} // namespace

int main() {
    report(1, "layout-oracle equivalence", layout_oracle);
    report(2, "invariant soak", invariant_soak);
    report(3, "search scaling", search_scaling);
    report(4, "update scaling", update_scaling);
    report(5, "DFS work bound", dfs_bound);
    report(6, "PMA density restoration", pma_density);
    report(7, "persistent-array oracle", persist_oracle);
    report(8, "space linearity", space_linearity);
    report(9, "third-child amortization", third_child_gains);
    return failures == 0 ? 0 : 1;
}
