#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cfqsim/protocol/statistics.hpp"

namespace cfqsim::cli {

enum class Command { Probs, Simulate, Message, Popescu, Sweep, WeakTrace, Histories, Compare };
enum class Format { Json, Csv };

/// Fully resolved invocation: command-line flags override config-file keys,
/// which override the CFQSIM_SEED environment default for the seed.
struct RunConfig {
    Command command = Command::Probs;
    protocol::ProtocolParams params;

    int bit = 1;
    std::string bits;  // explicit bit string; empty means "draw uniform bits"
    int n_bits = 16;
    int trials = 10000;
    int message_length = 16;

    std::string postselect = "D1";
    bool sinks_only = false;
    bool random_positions = false;
    double eps = 1e-10;
    int max_slices = 16;

    std::vector<double> theta_grid;
    std::vector<int> n_grid;

    Format format = Format::Json;
    std::string out_path;  // empty = stdout
};

/// Parses argv (without the program name) plus an optional JSON config named
/// by --config. Unknown flags, unknown config keys and invalid values throw
/// UsageError; an unreadable config file throws IoError.
RunConfig parse_config(const std::vector<std::string>& args);

/// Runs the command and writes one JSON document or CSV table to `out` (or
/// the configured output file). Statistics degeneracies such as an empty
/// post-selection are reported in-band with a "status" field and exit 0;
/// domain errors propagate as cfqsim::Error.
int execute(const RunConfig& config, std::ostream& out);

/// Complete entry point: parse, execute, and map failures to exit codes
/// 0 success / 2 usage / 3 domain / 4 I/O, with diagnostics on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cfqsim::cli
