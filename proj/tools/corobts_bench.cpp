// Benchmark and verification driver.
//
//   corobts_bench search --n 32768 --block 64 --cache 256 --eps 1/2 --reps 1000
//   corobts_bench persist --u 64 --writes 4096
//   corobts_bench verify layout-oracle --seed 7
//
// CSV goes to stdout. When COROBTS_OUT_DIR is set, a copy is also written to
// $COROBTS_OUT_DIR/<scenario>.csv. Exit codes: 0 pass, 1 fail, 2 usage.

#include "corobts/bench.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

void add_common(CLI::App* cmd, corobts::bench::ScenarioSpec& spec, std::string& eps) {
    cmd->add_option("--eps", eps, "layout cut fraction p/q in (0, 1/2]")->capture_default_str();
    cmd->add_option("--a", spec.a, "minimum arity")->capture_default_str();
    cmd->add_option("--b", spec.b, "maximum arity")->capture_default_str();
    cmd->add_option("--block", spec.block_size, "block size in slots")->capture_default_str();
    cmd->add_option("--cache", spec.cache_blocks, "cache size in blocks")->capture_default_str();
    cmd->add_option("--seed", spec.seed, "random seed")->capture_default_str();
    cmd->add_flag("--warm", spec.warm, "keep the cache between measured operations");
}

int emit(const std::string& scenario, const std::vector<corobts::bench::Row>& rows) {
    std::ostringstream csv;
    csv << corobts::bench::csv_header() << '\n';
    for (const auto& r : rows) csv << corobts::bench::csv_line(r) << '\n';
    std::cout << csv.str();
    if (const char* dir = std::getenv("COROBTS_OUT_DIR"); dir != nullptr && *dir != '\0') {
        std::filesystem::create_directories(dir);
        const auto path = std::filesystem::path(dir) / (scenario + ".csv");
        std::ofstream out(path);
        out << csv.str();
        if (!out) {
            std::cerr << "cannot write " << path << '\n';
            return kFail;
        }
    }
    return kPass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cache-oblivious bounded-arity tree store: benchmarks and checks"};
    app.require_subcommand(1);

    corobts::bench::ScenarioSpec spec;
    std::string eps = "1/2";

    auto* search = app.add_subcommand("search", "cold root-to-leaf descents on a complete tree");
    search->add_option("--n", spec.n, "vertex budget of the complete tree")->capture_default_str();
    search->add_option("--reps", spec.reps, "number of descents")->capture_default_str();
    add_common(search, spec, eps);

    auto* update = app.add_subcommand("insert-remove", "leaf-parent subtree inserts and removals");
    update->add_option("--n", spec.n, "vertex budget of the initial tree")->capture_default_str();
    update->add_option("--reps", spec.reps, "number of operations")->capture_default_str();
    add_common(update, spec, eps);

    auto* churn = app.add_subcommand("pma-churn", "single inserts/removes at uniform ranks in a bare PMA");
    churn->add_option("--n", spec.n, "initial element count")->capture_default_str();
    churn->add_option("--reps", spec.reps, "number of operations")->capture_default_str();
    add_common(churn, spec, eps);

    auto* persist = app.add_subcommand("persist", "random writes into the persistent array");
    persist->add_option("--u", spec.u, "initial capacity (power of two)")->capture_default_str();
    persist->add_option("--writes", spec.writes, "number of writes")->capture_default_str();
    add_common(persist, spec, eps);

    auto* verify = app.add_subcommand("verify", "run an invariant suite");
    std::string suite;
    corobts::bench::LayoutSuiteConfig layout;
    corobts::bench::ChurnSuiteConfig density;
    corobts::bench::PersistSuiteConfig oracle;
    std::uint64_t seed = 7;
    verify->add_option("suite", suite, "layout-oracle | pma-density | persist-oracle")->required();
    verify->add_option("--seed", seed, "random seed")->capture_default_str();
    verify->add_option("--runs", layout.runs, "layout-oracle: operation sequences")->capture_default_str();
    verify->add_option("--max-ops", layout.max_ops, "layout-oracle: operations per sequence")->capture_default_str();
    verify->add_flag("--inject-corruption", layout.inject_corruption, "layout-oracle: corrupt a child pointer first");
    verify->add_option("--initial", density.initial, "pma-density: starting elements")->capture_default_str();
    verify->add_option("--ops", density.ops, "pma-density: operations")->capture_default_str();
    verify->add_option("--u", oracle.u, "persist-oracle: capacity")->capture_default_str();
    verify->add_option("--writes", oracle.writes, "persist-oracle: writes")->capture_default_str();
    verify->add_option("--cell-range", oracle.cell_range, "persist-oracle: cells drawn from [0, range)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (verify->parsed()) {
        corobts::bench::SuiteResult res;
        try {
            if (suite == "layout-oracle") {
                layout.seed = seed;
                res = corobts::bench::verify_layout_oracle(layout);
            } else if (suite == "pma-density") {
                density.seed = seed;
                res = corobts::bench::verify_pma_density(density);
            } else if (suite == "persist-oracle") {
                oracle.seed = seed;
                res = corobts::bench::verify_persist_oracle(oracle);
            } else {
                std::cerr << "unknown suite '" << suite << "'\n";
                return kUsage;
            }
        } catch (const std::invalid_argument& e) {
            std::cerr << "usage error: " << e.what() << '\n';
            return kUsage;
        }
        std::cout << suite << ": " << (res.pass ? "PASS" : "FAIL") << " (" << res.checks << " checks)\n";
        if (!res.pass) std::cout << "counterexample: " << res.detail << '\n';
        return res.pass ? kPass : kFail;
    }

    for (auto* cmd : {search, update, churn, persist}) {
        if (!cmd->parsed()) continue;
        spec.scenario = cmd->get_name();
        try {
            spec.eps = corobts::Rational::parse(eps);
            spec.check();
        } catch (const std::invalid_argument& e) {
            std::cerr << "usage error: " << e.what() << '\n';
            return kUsage;
        }
        try {
            return emit(spec.scenario, corobts::bench::run_scenario(spec));
        } catch (const std::exception& e) {
            std::cerr << spec.scenario << " failed: " << e.what() << '\n';
            return kFail;
        }
    }
    return kUsage;
}
