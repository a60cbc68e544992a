#include "corobts/pma.hpp"

#include "corobts/errors.hpp"
#include "corobts/veb_math.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace corobts {

std::size_t rebuild_size(std::size_t live) {
    const std::uint64_t want = (4ull * live + 2) / 3; // ceil(4n/3)
    return static_cast<std::size_t>(hyperceil(std::max<std::uint64_t>(want, 1)));
}

std::size_t segment_size_for(std::size_t size) {
    const auto log_ceil = static_cast<std::uint64_t>(std::bit_width(static_cast<std::uint64_t>(size))); // ceil(log2(size+1))
    return static_cast<std::size_t>(std::min<std::uint64_t>(hyperceil(log_ceil), size));
}

InsertTable::InsertTable(BlockMemory* memory, std::vector<std::size_t> row_sizes) {
    offsets_.reserve(row_sizes.size() + 1);
    offsets_.push_back(0);
    for (auto s : row_sizes) offsets_.push_back(offsets_.back() + s);
    if (offsets_.back() > 0) cells_ = TrackedArray<Index>(memory, offsets_.back(), kNoIndex);
}

void InsertTable::rebase(const std::function<Index(Index)>& remap) {
    for (std::size_t i = 0; i < total(); ++i) cells_.peek_mut(i) = remap(cells_.peek(i));
}

std::vector<std::vector<Index>> InsertTable::to_vectors() const {
    std::vector<std::vector<Index>> out(rows());
    for (std::size_t i = 0; i < rows(); ++i) {
        for (std::size_t j = 0; j < row_size(i); ++j) out[i].push_back(peek(i, j));
    }
    return out;
}

void ChangeList::push(const Change& c) {
    if (size_ >= entries_.size()) throw invariant_fault("change list capacity exceeded");
    entries_.write(size_++) = c;
}

PmaStore::PmaStore(BlockMemory* memory, std::size_t initial_size) : memory_(memory) {
    if (initial_size == 0 || !std::has_single_bit(initial_size)) {
        throw precondition_fault("PMA size must be a positive power of two");
    }
    cells_ = TrackedArray<Slot>(memory_, initial_size);
    set_geometry(initial_size);
    rebuild_count_tree();
}

PmaStore PmaStore::from_occupancy(BlockMemory* memory, const std::vector<bool>& occupied) {
    PmaStore p(memory, occupied.size());
    for (std::size_t i = 0; i < occupied.size(); ++i) {
        if (!occupied[i]) continue;
        auto& s = p.cells_.peek_mut(i);
        s.occupied = true;
        s.store<std::uint64_t>(i);
        ++p.live_;
    }
    p.rebuild_count_tree();
    return p;
}

void PmaStore::set_geometry(std::size_t size) {
    seg_ = segment_size_for(size);
    levels_ = floor_log2(size / seg_);
}

void PmaStore::rebuild_count_tree() {
    const std::size_t segs = segment_count();
    counts_ = TrackedArray<std::uint32_t>(memory_, 2 * segs, 0);
    for (std::size_t b = 0; b < segs; ++b) {
        std::uint32_t c = 0;
        for (std::size_t i = b * seg_; i < (b + 1) * seg_; ++i) c += cells_.peek(i).occupied ? 1 : 0;
        counts_.peek_mut(segs + b) = c;
    }
    for (std::size_t i = segs - 1; i >= 1; --i) counts_.peek_mut(i) = counts_.peek(2 * i) + counts_.peek(2 * i + 1);
}

bool PmaStore::within_bounds(std::uint64_t count, std::uint64_t width, std::uint32_t level) const noexcept {
    const std::uint64_t lc = std::max<std::uint32_t>(levels_, 1);
    if (count * 8 * lc > (8 * lc - level) * width) return false;
    if (live_ + batch_delta_ == 0) return true; // an empty store has nothing to spread
    return count * 8 * lc >= (lc + level) * width;
}

Index PmaStore::next_occupied(Index from) const {
    for (std::size_t i = from; i < cells_.size(); ++i) {
        if (cells_.read(i).occupied) return static_cast<Index>(i);
    }
    return kNoIndex;
}

Index PmaStore::prev_occupied(Index before) const {
    for (std::size_t i = std::min<std::size_t>(before, cells_.size()); i-- > 0;) {
        if (cells_.read(i).occupied) return static_cast<Index>(i);
    }
    return kNoIndex;
}

std::vector<std::string> PmaStore::check_density() const {
    std::vector<std::string> out;
    const std::size_t segs = segment_count();
    std::vector<std::uint64_t> level_counts(segs);
    std::size_t total = 0;
    for (std::size_t b = 0; b < segs; ++b) {
        for (std::size_t i = b * seg_; i < (b + 1) * seg_; ++i) level_counts[b] += cells_.peek(i).occupied ? 1 : 0;
        total += level_counts[b];
    }
    if (total != live_) out.push_back("live_count " + std::to_string(live_) + " but " + std::to_string(total) + " occupied cells");
    if (total == 0) return out;
    for (std::uint32_t k = 0; k <= levels_; ++k) {
        const std::size_t width = seg_ << k;
        for (std::size_t b = 0; b < level_counts.size(); ++b) {
            if (counts_.peek(heap_index(k, b)) != level_counts[b]) {
                out.push_back("count tree stale at level " + std::to_string(k) + " node " + std::to_string(b));
            }
            if (!within_bounds(level_counts[b], width, k)) {
                out.push_back("density " + std::to_string(level_counts[b]) + "/" + std::to_string(width) +
                              " out of bounds at level " + std::to_string(k) + " node " + std::to_string(b));
            }
        }
        std::vector<std::uint64_t> up(level_counts.size() / 2);
        for (std::size_t b = 0; b < up.size(); ++b) up[b] = level_counts[2 * b] + level_counts[2 * b + 1];
        level_counts = std::move(up);
    }
    return out;
}

std::string PmaStore::dump(std::size_t arity) const {
    std::ostringstream os;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const Slot& s = cells_.peek(i);
        os << i << ',' << (s.occupied ? 1 : 0) << ',' << s.depth;
        for (std::size_t c = 0; c < arity; ++c) {
            os << ',';
            if (s.occupied && c < s.child_count) os << s.children[c];
            else os << '-';
        }
        os << '\n';
    }
    return os.str();
}

} // namespace corobts
