#pragma once

#include "corobts/block_memory.hpp"
#include "corobts/veb_math.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace corobts::bench {

struct ScenarioSpec {
    std::string scenario; // search | insert-remove | pma-churn | persist
    std::uint64_t n = 1u << 15; // vertices (search, insert-remove) or elements (pma-churn)
    std::uint32_t u = 64;       // persist capacity
    std::uint64_t writes = 4096;
    Rational eps{1, 2};
    std::uint32_t a = 2;
    std::uint32_t b = 4;
    std::size_t block_size = 64;
    std::size_t cache_blocks = 1024;
    std::uint64_t seed = 1;
    std::uint64_t reps = 1000; // descents or update operations
    bool warm = false;         // keep the cache between measured operations

    /// Throws std::invalid_argument describing the first bad field.
    void check() const;
};

struct Row {
    std::uint64_t n = 0;
    std::string eps;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::size_t block_size = 0;
    std::size_t cache_blocks = 0;
    std::string operation;
    std::uint64_t transfers = 0;
    std::uint64_t accesses = 0;
    double measured_quantity = 0;
};

std::string csv_header();
std::string csv_line(const Row& row);

/// Runs one scenario; deterministic for a given spec.
std::vector<Row> run_scenario(const ScenarioSpec& spec);

/// Largest height whose complete a-ary tree has at most n vertices (>= 1).
std::uint32_t height_for(std::uint64_t n, std::uint32_t a);

struct SuiteResult {
    bool pass = true;
    std::uint64_t checks = 0;
    std::string detail; // first counterexample when failing
    std::uint64_t doublings = 0;
    std::uint64_t rollovers = 0;
};

struct LayoutSuiteConfig {
    std::uint64_t seed = 7;
    std::uint32_t runs = 200;
    std::uint32_t max_ops = 200;
    std::uint32_t max_height = 7;
    bool validate_each_op = true;
    bool inject_corruption = false;
};
SuiteResult verify_layout_oracle(const LayoutSuiteConfig& cfg);

struct ChurnSuiteConfig {
    std::uint64_t seed = 7;
    std::uint64_t initial = 1u << 10;
    std::uint64_t ops = 10000;
};
SuiteResult verify_pma_density(const ChurnSuiteConfig& cfg);

struct PersistSuiteConfig {
    std::uint64_t seed = 7;
    std::uint32_t u = 64;
    std::uint64_t writes = 2000;
    std::uint32_t cell_range = 0; // 0 = capacity; larger values force doubling
};
SuiteResult verify_persist_oracle(const PersistSuiteConfig& cfg);

struct SearchPoint {
    std::uint64_t n = 0;
    double mean_transfers = 0;
    double log_b_n = 0;
};
SearchPoint measure_search(std::uint32_t height, Rational eps, std::size_t block, std::size_t cache,
                           std::uint64_t reps, std::uint64_t seed, bool warm = false);

struct UpdatePoint {
    std::uint64_t n = 0;
    std::uint64_t ops = 0;
    double moved_per_op = 0;
    double transfers_per_op = 0;
};
UpdatePoint measure_updates(std::uint32_t height, Rational eps, std::uint32_t a, std::uint32_t b, std::size_t block,
                            std::size_t cache, std::uint64_t ops, std::uint64_t seed, bool warm = false);

} // namespace corobts::bench
