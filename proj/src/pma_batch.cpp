#include "corobts/errors.hpp"
#include "corobts/pma.hpp"
#include "corobts/veb_math.hpp"

#include <algorithm>

namespace corobts {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

// Cells of [x, x + w) that receive one of n items spread over m cells by
// position floor(j * m / n).
std::uint64_t spread_count(std::uint64_t x, std::uint64_t w, std::uint64_t n, std::uint64_t m) {
    return ceil_div((x + w) * n, m) - ceil_div(x * n, m);
}

bool is_insert(const UpdateOp& op) { return op.kind == UpdateOp::Kind::insert; }

} // namespace

void PmaStore::validate_batch(const std::vector<UpdateOp>& batch) const {
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& op = batch[i];
        if (op.kind != batch.front().kind) throw precondition_fault("a batch must not mix inserts and removals");
        if (is_insert(op)) {
            if (op.count_or_end == 0) throw precondition_fault("INSERT of zero cells");
            if (op.anchor == kBeforeAll) {
                if (i != 0) throw precondition_fault("BEFORE_ALL insert must come first");
                continue;
            }
            if (op.anchor >= size() || !cells_.peek(op.anchor).occupied) {
                throw precondition_fault("INSERT anchor " + std::to_string(op.anchor) + " is not a live cell");
            }
            if (i > 0 && batch[i - 1].anchor != kBeforeAll && batch[i - 1].anchor >= op.anchor) {
                throw precondition_fault("INSERT anchors must be strictly increasing");
            }
        } else {
            if (op.anchor > op.count_or_end || op.count_or_end >= size() || !cells_.peek(op.anchor).occupied ||
                !cells_.peek(op.count_or_end).occupied) {
                throw precondition_fault("REMOVE run must start and end on live cells");
            }
            if (i > 0 && batch[i - 1].count_or_end >= op.anchor) {
                throw precondition_fault("REMOVE runs must be sorted and disjoint");
            }
        }
    }
}

void PmaStore::collect_events(const std::vector<UpdateOp>& batch) {
    events_.clear();
    for (const auto& op : batch) {
        if (is_insert(op)) {
            events_.push_back({op.anchor == kBeforeAll ? 0 : op.anchor, static_cast<std::int64_t>(op.count_or_end)});
            continue;
        }
        for (Index c = op.anchor; c <= op.count_or_end; ++c) {
            ++counters_.cells_scanned;
            if (cells_.read(c).occupied) events_.push_back({c, -1});
        }
    }
    event_prefix_.assign(events_.size() + 1, 0);
    for (std::size_t i = 0; i < events_.size(); ++i) event_prefix_[i + 1] = event_prefix_[i] + events_[i].delta;
}

std::int64_t PmaStore::event_sum(Index l, Index r) const {
    auto by_pos = [](const Event& e, Index p) { return e.pos < p; };
    const auto lo = std::lower_bound(events_.begin(), events_.end(), l, by_pos) - events_.begin();
    const auto hi = std::lower_bound(events_.begin(), events_.end(), r + 1ull,
                                     [](const Event& e, std::uint64_t p) { return e.pos < p; }) -
                    events_.begin();
    return event_prefix_[hi] - event_prefix_[lo];
}

bool PmaStore::spread_fits(std::uint64_t n, std::uint64_t width, std::uint32_t level) const {
    for (std::uint32_t j = 0; j < level; ++j) {
        const std::uint64_t w = seg_ << j;
        for (std::uint64_t x = 0; x < width; x += w) {
            if (!within_bounds(spread_count(x, w, n, width), w, j)) return false;
        }
    }
    return true;
}

bool PmaStore::node_fits(std::uint32_t level, std::size_t block) const {
    std::uint64_t n_here = 0;
    for (std::uint32_t k = level; k <= levels_; ++k) {
        const std::size_t b = block >> (k - level);
        const std::uint64_t w = seg_ << k;
        const auto l = static_cast<Index>(b * w);
        const std::int64_t n = static_cast<std::int64_t>(counts_.read(heap_index(k, b))) +
                               event_sum(l, static_cast<Index>(l + w - 1));
        if (n < 0 || !within_bounds(static_cast<std::uint64_t>(n), w, k)) return false;
        if (k == level) n_here = static_cast<std::uint64_t>(n);
    }
    return spread_fits(n_here, seg_ << level, level);
}

IntervalPlan PmaStore::get_intervals(const std::vector<UpdateOp>& batch) {
    validate_batch(batch);
    collect_events(batch);
    IntervalPlan plan;
    plan.target_size = size();
    if (batch.empty()) return plan;
    batch_delta_ = event_prefix_.back();
    const std::uint64_t total_after = static_cast<std::uint64_t>(static_cast<std::int64_t>(live_) + batch_delta_);

    for (const auto& op : batch) {
        const Index lo = (is_insert(op) && op.anchor == kBeforeAll) ? 0 : op.anchor;
        const Index hi = is_insert(op) ? lo : op.count_or_end;
        if (!plan.intervals.empty() && plan.intervals.back().l <= lo && hi <= plan.intervals.back().r) continue;

        std::uint32_t k = 0;
        while ((lo / (seg_ << k)) != (hi / (seg_ << k))) ++k;
        while (k <= levels_ && !node_fits(k, lo / (seg_ << k))) ++k;

        if (k > levels_) {
            plan.intervals.clear();
            plan.target_size = rebuild_size(total_after);
            plan.resize = plan.target_size != size();
            plan.intervals.push_back({0, static_cast<Index>(plan.target_size - 1), total_after});
            break;
        }
        const std::uint64_t w = seg_ << k;
        const auto l = static_cast<Index>((lo / w) * w);
        const auto r = static_cast<Index>(l + w - 1);
        while (!plan.intervals.empty() && plan.intervals.back().l >= l) plan.intervals.pop_back();
        const auto n = static_cast<std::uint64_t>(static_cast<std::int64_t>(counts_.read(heap_index(k, lo / w))) +
                                                  event_sum(l, r));
        plan.intervals.push_back({l, r, n});
    }
    batch_delta_ = 0;
    counters_.last_plan_cells = 0;
    counters_.last_plan_intervals = plan.intervals.size();
    for (const auto& iv : plan.intervals) counters_.last_plan_cells += iv.r - iv.l + 1;
    return plan;
}

InsertTable PmaStore::calc_new_positions(const std::vector<UpdateOp>& batch, const IntervalPlan& plan) {
    const bool inserting = !batch.empty() && is_insert(batch.front());
    std::vector<std::size_t> rows;
    if (inserting) {
        for (const auto& op : batch) rows.push_back(op.count_or_end);
    }
    InsertTable table(memory_, rows);

    std::size_t o = 0;
    for (const auto& iv : plan.intervals) {
        const Index old_l = plan.resize ? 0 : iv.l;
        const Index old_r = plan.resize ? static_cast<Index>(size() - 1) : iv.r;
        const std::uint64_t m = std::uint64_t{iv.r} - iv.l + 1;
        std::uint64_t j = 0;
        auto place = [&]() {
            if (j >= iv.n) throw invariant_fault("interval receives more cells than planned");
            return static_cast<Index>(iv.l + j++ * m / iv.n);
        };
        auto emit = [&](std::size_t row) {
            for (std::size_t t = 0; t < batch[row].count_or_end; ++t) table.set(row, t, place());
        };

        if (inserting && o < batch.size() && batch[o].anchor == kBeforeAll && old_l == 0) emit(o++);
        for (Index c = old_l;; ++c) {
            ++counters_.cells_scanned;
            if (cells_.read(c).occupied) {
                bool removed = false;
                if (!inserting) {
                    while (o < batch.size() && batch[o].count_or_end < c) ++o;
                    removed = o < batch.size() && batch[o].anchor <= c;
                }
                if (!removed) {
                    const Index to = place();
                    if (to != c || plan.resize) ++counters_.slots_moved;
                    cells_.write(c).relocation = to;
                }
                if (inserting && o < batch.size() && batch[o].anchor == c) emit(o++);
            }
            if (c == old_r) break;
        }
        if (j != iv.n) throw invariant_fault("interval placed " + std::to_string(j) + " cells, planned " + std::to_string(iv.n));
    }
    return table;
}

void PmaStore::clear_relocations(const IntervalPlan& plan) {
    for (const auto& iv : plan.intervals) {
        const Index old_l = plan.resize ? 0 : iv.l;
        const Index old_r = plan.resize ? static_cast<Index>(size() - 1) : iv.r;
        for (Index c = old_l;; ++c) {
            if (cells_.peek(c).has_relocation()) cells_.write(c).relocation = kNoIndex;
            if (c == old_r) break;
        }
    }
}

void PmaStore::move_interval(const PlanInterval& iv) {
    // Backward: pack survivors against the right end, dropping removed cells.
    std::int64_t free_at = iv.r;
    for (std::int64_t c = iv.r; c >= static_cast<std::int64_t>(iv.l); --c) {
        ++counters_.cells_scanned;
        const Slot s = cells_.read(static_cast<Index>(c));
        if (!s.occupied) continue;
        if (!s.has_relocation()) {
            cells_.write(static_cast<Index>(c)) = Slot{};
            continue;
        }
        if (c != free_at) {
            cells_.write(static_cast<Index>(free_at)) = s;
            cells_.write(static_cast<Index>(c)) = Slot{};
        }
        --free_at;
    }
    // Forward: every packed cell moves left (or stays) to its final position.
    for (std::int64_t c = free_at + 1; c <= static_cast<std::int64_t>(iv.r); ++c) {
        ++counters_.cells_scanned;
        Slot s = cells_.read(static_cast<Index>(c));
        const Index to = s.relocation;
        s.relocation = kNoIndex;
        if (to != c) cells_.write(static_cast<Index>(c)) = Slot{};
        cells_.write(to) = s;
    }
}

void PmaStore::refresh_counts(Index l, Index r, std::uint64_t n, std::uint32_t level) {
    const std::uint64_t m = std::uint64_t{r} - l + 1;
    const std::size_t first_leaf = l / seg_;
    const std::size_t leaves = m / seg_;
    for (std::size_t i = 0; i < leaves; ++i) {
        counts_.write(heap_index(0, first_leaf + i)) = static_cast<std::uint32_t>(spread_count(i * seg_, seg_, n, m));
    }
    for (std::uint32_t k = 1; k <= levels_; ++k) {
        const std::size_t lo = first_leaf >> k;
        const std::size_t hi = k <= level ? (first_leaf + leaves) >> k : lo + 1;
        for (std::size_t b = lo; b < hi; ++b) {
            const std::size_t h = heap_index(k, b);
            counts_.write(h) = counts_.read(2 * h) + counts_.read(2 * h + 1);
        }
    }
}

InsertTable PmaStore::batch_update(const std::vector<UpdateOp>& batch, const RecalcHook& recalc) {
    ++counters_.batches;
    const auto scanned_before = counters_.cells_scanned;
    IntervalPlan plan = get_intervals(batch);
    if (batch.empty()) {
        counters_.last_scanned = 0;
        return InsertTable{};
    }
    const std::int64_t delta = event_prefix_.back();
    InsertTable table = calc_new_positions(batch, plan);

    const std::size_t old_size = size();
    ChangeList changes(memory_, std::max<std::size_t>(old_size, live_ + table.total()));
    try {
        if (recalc) {
            for (const auto& iv : plan.intervals) {
                if (plan.resize) recalc(0, static_cast<Index>(old_size - 1), changes);
                else recalc(iv.l, iv.r, changes);
            }
        }
    } catch (...) {
        clear_relocations(plan);
        events_.clear();
        throw;
    }

    if (plan.resize) {
        TrackedArray<Slot> fresh(memory_, plan.target_size);
        for (Index c = 0; c < old_size; ++c) {
            ++counters_.cells_scanned;
            Slot s = cells_.read(c);
            if (!s.has_relocation()) continue;
            const Index to = s.relocation;
            s.relocation = kNoIndex;
            fresh.write(to) = s;
        }
        cells_ = std::move(fresh);
        set_geometry(plan.target_size);
        ++counters_.rebuilds;
    } else {
        for (const auto& iv : plan.intervals) move_interval(iv);
    }

    for (std::size_t i = 0; i < changes.size(); ++i) {
        const Change ch = changes.read(i);
        cells_.write(ch.parent).children[ch.rank] = ch.child;
    }
    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t j = 0; j < table.row_size(i); ++j) {
            Slot& s = cells_.write(table.at(i, j));
            s = Slot{};
            s.occupied = true;
        }
    }
    live_ = static_cast<std::size_t>(static_cast<std::int64_t>(live_) + delta);

    if (plan.resize) {
        counts_ = TrackedArray<std::uint32_t>(memory_, 2 * segment_count(), 0);
        refresh_counts(0, static_cast<Index>(size() - 1), live_, levels_);
    } else {
        for (const auto& iv : plan.intervals) {
            refresh_counts(iv.l, iv.r, iv.n, floor_log2((std::uint64_t{iv.r} - iv.l + 1) / seg_));
        }
    }
    events_.clear();
    counters_.last_scanned = counters_.cells_scanned - scanned_before;
    return table;
}

} // namespace corobts
