#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlmc/generator.hpp"

namespace nlmc::cli {

enum class Command {
    simulate,
    sample,
    invariant,
    certify_unique,
    certify_ergodic,
    corpus_list,
    reproduce,
};

enum class Format { csv, structured_text };

/// Thrown for invalid command lines and out-of-range controls.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Command command = Command::corpus_list;

    std::optional<std::string> corpus;
    ParameterMap corpus_parameters;
    std::optional<std::string> generator_file;

    std::optional<std::vector<double>> m0;
    double horizon = 10.0;
    double rtol = 1e-8;
    double atol = 1e-10;
    double sample_every = 0.0;
    int grid = 0;  // 0 selects the command default
    int root_grid = 10'000;
    double h = 1e-6;
    std::uint64_t seed = 1;
    std::optional<std::size_t> initial_state;  // 0-based; empty draws from m0

    std::string figure;
    std::string out_dir = ".";
    std::optional<std::string> output;
    std::optional<Format> format;

    /// Checks the documented ranges and the single-generator-source rule.
    void validate() const;
};

/// Parses argv (including the program name). Throws UsageError.
RunConfig parse_command_line(int argc, const char* const* argv);

/// Executes a configuration. Exit status: 0 success or CERTIFIED,
/// 2 INCONCLUSIVE/REFUTED, 1 on errors (reported on `err`).
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_command_line + run, mapping usage errors to exit status 1.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nlmc::cli
