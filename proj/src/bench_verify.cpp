#include "corobts/bench.hpp"

#include "corobts/persistent_array.hpp"
#include "corobts/pma.hpp"
#include "corobts/tree_store.hpp"

#include <random>

namespace corobts::bench {

namespace {

Index kth_live(const PmaStore& p, std::uint64_t k) {
    for (Index c = 0; c < p.size(); ++c) {
        if (p.peek(c).occupied && k-- == 0) return c;
    }
    return kNoIndex;
}

std::string layout_mismatch(const TreeStore& t, const ExplicitTree& ref) {
    const auto cells = t.match_reference(ref);
    if (!cells) return "stored tree shape differs from the reference tree";
    const auto order = veb_permutation_oracle(ref, t.params().eps);
    const auto live = t.live_cells();
    if (live.size() != order.size()) {
        return "live cells " + std::to_string(live.size()) + " vs reference vertices " + std::to_string(order.size());
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
        if ((*cells)[order[i]] != live[i]) {
            return "rank " + std::to_string(i) + ": cell " + std::to_string(live[i]) + " but oracle expects cell " +
                   std::to_string((*cells)[order[i]]);
        }
    }
    return {};
}

} // namespace

SuiteResult verify_layout_oracle(const LayoutSuiteConfig& cfg) {
    SuiteResult res;
    std::mt19937_64 rng(cfg.seed);
    const std::uint32_t a = 2, b = 4;
    for (std::uint32_t run = 0; run < cfg.runs; ++run) {
        const std::uint32_t height = 2 + static_cast<std::uint32_t>(rng() % (cfg.max_height - 1));
        const Rational eps = rng() % 2 ? Rational{1, 2} : Rational{1, 4};
        const std::uint32_t ops = 1 + static_cast<std::uint32_t>(rng() % cfg.max_ops);
        TreeStore t(LayoutParams{eps, height, a, b});
        ExplicitTree ref = ExplicitTree::complete(a, height);
        const std::string where = "run " + std::to_string(run) + " (H=" + std::to_string(height) + ", eps=" + eps.str() + ")";

        if (cfg.inject_corruption) {
            Slot& root = t.pma().peek_mut(t.root());
            root.children[0] = root.children[1];
        }
        auto check = [&](const std::string& step) {
            ++res.checks;
            if (auto msg = layout_mismatch(t, ref); !msg.empty()) {
                res.pass = false;
                res.detail = where + " " + step + ": " + msg;
                return false;
            }
            if (cfg.validate_each_op) {
                const auto rep = t.validate();
                if (!rep.ok()) {
                    res.pass = false;
                    res.detail = where + " " + step + ": " + rep.violations.front();
                    return false;
                }
            }
            return true;
        };
        if (!check("after init")) return res;

        for (std::uint32_t op = 0; op < ops; ++op) {
            const auto depth = static_cast<std::uint32_t>(rng() % (height - 1));
            std::vector<std::uint32_t> ranks;
            std::uint32_t node = ref.root;
            for (std::uint32_t d = 0; d < depth; ++d) {
                ranks.push_back(static_cast<std::uint32_t>(rng() % ref.children[node].size()));
                node = ref.children[node][ranks.back()];
            }
            const auto deg = static_cast<std::uint32_t>(ref.children[node].size());
            const bool insert = deg < b && (deg == a || rng() % 2 == 0);
            const auto rank = static_cast<std::uint32_t>(rng() % (insert ? deg + 1 : deg));
            const Index v = t.walk(ranks);
            try {
                if (insert) {
                    t.insert_subtree(v, rank);
                    const auto id = ref.add_complete(a, height - 1 - depth);
                    ref.children[node].insert(ref.children[node].begin() + rank, id);
                } else {
                    t.remove_subtree(v, rank);
                    ref.children[node].erase(ref.children[node].begin() + rank);
                }
            } catch (const std::exception& e) {
                res.pass = false;
                res.detail = where + " op " + std::to_string(op) + " threw: " + e.what();
                return res;
            }
            const std::string step = "op " + std::to_string(op) + (insert ? " insert" : " remove") + " at depth " +
                                     std::to_string(depth) + " rank " + std::to_string(rank);
            if (!check(step)) return res;
        }
    }
    return res;
}

SuiteResult verify_pma_density(const ChurnSuiteConfig& cfg) {
    SuiteResult res;
    std::mt19937_64 rng(cfg.seed);
    PmaStore p(nullptr, 1);
    p.batch_update({UpdateOp::insert_after(kBeforeAll, static_cast<Index>(cfg.initial))});
    for (std::uint64_t i = 0; i < cfg.ops; ++i) {
        std::vector<UpdateOp> batch;
        const bool insert = p.live_count() <= 1 || rng() % 2 == 0;
        if (insert) {
            const auto r = rng() % (p.live_count() + 1);
            batch.push_back(UpdateOp::insert_after(r == 0 ? kBeforeAll : kth_live(p, r - 1), 1));
        } else {
            const Index c = kth_live(p, rng() % p.live_count());
            batch.push_back(UpdateOp::remove_run(c, c));
        }
        p.batch_update(batch);
        ++res.checks;
        const auto bad = p.check_density();
        if (!bad.empty()) {
            res.pass = false;
            res.detail = "op " + std::to_string(i) + ": " + bad.front();
            return res;
        }
        if (p.counters().last_plan_intervals > batch.size()) {
            res.pass = false;
            res.detail = "op " + std::to_string(i) + ": plan has more intervals than operations";
            return res;
        }
    }
    return res;
}

SuiteResult verify_persist_oracle(const PersistSuiteConfig& cfg) {
    SuiteResult res;
    std::mt19937_64 rng(cfg.seed);
    PersistentArray pa(cfg.u);
    const std::uint32_t range = cfg.cell_range == 0 ? cfg.u : cfg.cell_range;
    for (std::uint64_t i = 0; i < cfg.writes; ++i) {
        pa.write(static_cast<std::uint32_t>(rng() % range), static_cast<std::int64_t>(rng() % 1000003) - 500000);
        if (i % 97 == 0) {
            const auto bad = pa.check_invariants();
            if (!bad.empty()) {
                res.pass = false;
                res.detail = "after write " + std::to_string(i) + ": " + bad.front();
                return res;
            }
        }
    }
    res.doublings = pa.counters().doublings;
    res.rollovers = pa.counters().rollovers;

    std::vector<std::int64_t> state(pa.capacity(), 0);
    const auto& log = pa.log();
    for (std::uint32_t v = 0; v <= pa.version_count(); ++v) {
        if (v > 0) state[log[v - 1].cell] = log[v - 1].value;
        for (std::uint32_t c = 0; c < pa.capacity(); ++c) {
            ++res.checks;
            const auto got = pa.read_persistent(c, v);
            if (got != state[c]) {
                res.pass = false;
                res.detail = "cell " + std::to_string(c) + " version " + std::to_string(v) + ": read " +
                             std::to_string(got) + ", oracle " + std::to_string(state[c]);
                return res;
            }
        }
    }
    for (std::uint32_t c = 0; c < pa.capacity(); ++c) {
        ++res.checks;
        if (pa.read_present(c) != state[c]) {
            res.pass = false;
            res.detail = "present read of cell " + std::to_string(c) + " differs from oracle";
            return res;
        }
    }
    return res;
}

} // namespace corobts::bench
