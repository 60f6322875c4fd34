#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gbb {

// One invocation, fully resolved. Precedence: built-in defaults, then
// `--config` key=value entries, then command-line flags. A zero `repeats`
// and empty `algos`/`noise` mean "not given" and are resolved per
// subcommand (train: 1 repeat, algo gsa, noise 0; bench: 5 repeats, all
// three algorithms, the six standard noise rates).
struct RunConfig {
    std::vector<std::string> data;      // input datasets (bench accepts several)
    std::string label_col;              // "" = last column
    std::string model;                  // eval: trained ensemble path
    std::vector<std::string> algos;
    int depth = 5;
    std::size_t min_leaf = 1;
    int iters = 100;
    std::size_t k = 5;                  // rob_samme neighbourhood size
    std::vector<double> noise;
    std::uint64_t noise_seed = 1;
    double split = 0.2;                 // test fraction
    std::uint64_t split_seed = 1;
    int repeats = 0;
    bool normalize = true;
    std::string out;                    // "" = $GBBOOST_OUT, else "."
    int workers = 1;
    bool dump = false;                  // granulate: emit membership file
    bool sweep = false;                 // noisify: the six standard rates
    std::string reference = "gsa";      // bench: comparison baseline
};

// Apply key=value lines (# comments and blank lines skipped) onto cfg.
// Keys mirror the long flag names without the dashes. Unknown keys throw.
void apply_config_file(RunConfig& cfg, const std::string& path);

// --out if given, else $GBBOOST_OUT, else the working directory.
std::string resolve_out_dir(const RunConfig& cfg);

// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace gbb
