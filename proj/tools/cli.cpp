#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "nlmc/certify.hpp"
#include "nlmc/error.hpp"
#include "nlmc/generator_file.hpp"
#include "nlmc/report.hpp"
#include "nlmc/semigroup.hpp"
#include "nlmc/stationary.hpp"

namespace nlmc::cli {

namespace {

constexpr double kMaxHorizon = 1e6;
constexpr int kMaxGrid = 200;

struct HelpRequested {
    std::string text;
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(flag + ": cannot parse '" + item + "' as a number");
        }
    }
    if (values.empty()) throw UsageError(flag + ": empty list");
    return values;
}

GeneratorSpec make_generator(const RunConfig& config) {
    if (config.corpus) return corpus(*config.corpus, config.corpus_parameters);
    return load_generator(*config.generator_file);
}

Distribution initial_distribution(const RunConfig& config, const GeneratorSpec& spec) {
    if (!config.m0) return Distribution::uniform(spec.dimension());
    if (config.m0->size() != spec.dimension())
        throw UsageError("--m0 has " + std::to_string(config.m0->size()) + " entries, generator has " +
                         std::to_string(spec.dimension()) + " states");
    return Distribution(*config.m0);
}

IntegratorControls integrator_controls(const RunConfig& config) {
    IntegratorControls c;
    c.rtol = config.rtol;
    c.atol = config.atol;
    c.sample_every = config.sample_every;
    return c;
}

void emit(const RunConfig& config, const std::string& text, std::ostream& out) {
    if (!config.output) {
        out << text;
        return;
    }
    std::ofstream file(*config.output, std::ios::binary);
    if (!file) throw InputError("cannot write " + *config.output);
    file << text;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw InputError("cannot write " + path.string());
    file << text;
}

int verdict_status(const Certificate& cert) { return cert.verdict == Verdict::certified ? 0 : 2; }

int reproduce(const RunConfig& config, std::ostream& out) {
    const std::filesystem::path dir = config.out_dir;
    std::filesystem::create_directories(dir);
    const IntegratorControls controls = integrator_controls(config);

    if (config.figure == "fig1") {
        const auto traj = evolve(corpus("oscillator"), Distribution{0.2, 0.4, 0.4},
                                 4.0 * std::numbers::pi, controls);
        const auto path = dir / "fig1_oscillator.csv";
        write_file(path, trajectory_csv(traj));
        out << path.string() << "\n";
        return 0;
    }

    const auto bistable = corpus("bistable");
    std::ostringstream summary;
    summary << "m0_1,limit_m_1\n";
    for (double start : {0.05, 0.2, 0.3, 0.45, 0.55, 0.6, 0.7, 0.9}) {
        const auto traj = evolve(bistable, Distribution{start, 1.0 - start}, 50.0, controls);
        char name[64];
        std::snprintf(name, sizeof name, "fig2_bistable_m0_%.2f.csv", start);
        const auto path = dir / name;
        write_file(path, trajectory_csv(traj));
        out << path.string() << "\n";
        summary << format_decimal(start) << "," << format_decimal(traj.states().back()[0]) << "\n";
    }
    const auto path = dir / "fig2_summary.csv";
    write_file(path, summary.str());
    out << path.string() << "\n";
    return 0;
}

}  // namespace

void RunConfig::validate() const {
    const bool needs_generator = command != Command::corpus_list && command != Command::reproduce;
    if (needs_generator) {
        if (corpus.has_value() == generator_file.has_value())
            throw UsageError("exactly one of --corpus or --generator is required");
    } else if (corpus || generator_file) {
        throw UsageError("this command does not take a generator");
    }
    if (!corpus_parameters.empty() && corpus != "consumer")
        throw UsageError("--b/--e/--eps/--lambda apply to the consumer generator only");
    if (!(horizon > 0.0) || horizon > kMaxHorizon) throw UsageError("--horizon must be in (0, 1e6]");
    if (!(rtol > 0.0) || !(atol > 0.0)) throw UsageError("--rtol and --atol must be positive");
    if (sample_every < 0.0) throw UsageError("--sample-every must be non-negative");
    if (grid < 0 || grid > kMaxGrid) throw UsageError("--grid must be in [1, 200]");
    if (root_grid < 2 || root_grid > 10'000'000) throw UsageError("--root-grid must be in [2, 1e7]");
    if (!(h > 0.0) || h > 0.1) throw UsageError("--h must be in (0, 0.1]");
    if (command == Command::reproduce && figure != "fig1" && figure != "fig2")
        throw UsageError("--figure must be fig1 or fig2");
}

RunConfig parse_command_line(int argc, const char* const* argv) {
    RunConfig config;
    CLI::App app{"Analysis of nonlinear Markov chains on finite state spaces", "nlmc"};
    app.require_subcommand(1);
    // -h is taken by the finite-difference step
    app.set_help_flag("--help", "Print this help message and exit");

    std::string m0_text, initial_text, format_text;
    std::optional<double> b, e, eps, lambda;

    auto add_generator = [&](CLI::App* sub) {
        sub->add_option("--corpus", config.corpus, "Built-in generator (bistable, consumer, oscillator)");
        sub->add_option("--generator", config.generator_file, "Polynomial generator file (JSON)");
        sub->add_option("--b", b, "consumer: base switching rate");
        sub->add_option("--e", e, "consumer: congestion strength");
        sub->add_option("--eps", eps, "consumer: baseline leaving rate");
        sub->add_option("--lambda", lambda, "consumer: return rate");
        sub->add_option("--output,-o", config.output, "Write the artifact to a file instead of stdout");
    };
    auto add_integrator = [&](CLI::App* sub) {
        sub->add_option("--m0", m0_text, "Initial distribution, comma separated (default uniform)");
        sub->add_option("--horizon", config.horizon, "Time horizon");
        sub->add_option("--rtol", config.rtol, "Relative local error tolerance");
        sub->add_option("--atol", config.atol, "Absolute local error tolerance");
        sub->add_option("--sample-every", config.sample_every, "Sample spacing (default horizon/1000)");
    };

    auto* simulate = app.add_subcommand("simulate", "Integrate the marginal flow; CSV t,m_1,...,m_S");
    add_generator(simulate);
    add_integrator(simulate);

    auto* sample = app.add_subcommand("sample", "Simulate one jump path; CSV t,state");
    add_generator(sample);
    add_integrator(sample);
    sample->add_option("--seed", config.seed, "Random seed");
    sample->add_option("--initial-state", initial_text, "1-based start state or 'draw' (default)");

    auto* invariant = app.add_subcommand("invariant", "Search for invariant distributions");
    add_generator(invariant);
    invariant->add_option("--grid", config.grid, "Seed grid resolution (default 20)");
    invariant->add_option("--format", format_text, "csv or structured-text");

    auto* unique = app.add_subcommand("certify-unique", "Uniqueness certificate (determinant sweep)");
    add_generator(unique);
    unique->add_option("--grid", config.grid, "Sweep grid resolution (default 40)");
    unique->add_option("--h", config.h, "Finite-difference step");

    auto* ergodic = app.add_subcommand("certify-ergodic", "Strong-ergodicity certificate (S = 2 or 3)");
    add_generator(ergodic);
    ergodic->add_option("--grid", config.grid, "S = 3: sweep and seed grid resolution (default 40)");
    ergodic->add_option("--root-grid", config.root_grid, "S = 2: drift scan resolution");
    ergodic->add_option("--h", config.h, "Finite-difference step");

    app.add_subcommand("corpus-list", "List the built-in generators");

    auto* repro = app.add_subcommand("reproduce", "Write plot-ready trajectories for a figure");
    repro->add_option("--figure", config.figure, "fig1 or fig2")->required();
    repro->add_option("--out-dir", config.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& err) {
        throw UsageError(err.what());
    }

    if (simulate->parsed()) config.command = Command::simulate;
    if (sample->parsed()) config.command = Command::sample;
    if (invariant->parsed()) config.command = Command::invariant;
    if (unique->parsed()) config.command = Command::certify_unique;
    if (ergodic->parsed()) config.command = Command::certify_ergodic;
    if (repro->parsed()) config.command = Command::reproduce;

    if (!m0_text.empty()) config.m0 = parse_list(m0_text, "--m0");
    if (b) config.corpus_parameters["b"] = *b;
    if (e) config.corpus_parameters["e"] = *e;
    if (eps) config.corpus_parameters["eps"] = *eps;
    if (lambda) config.corpus_parameters["lambda"] = *lambda;
    if (!initial_text.empty() && initial_text != "draw") {
        try {
            const long state = std::stol(initial_text);
            if (state < 1) throw std::out_of_range(initial_text);
            config.initial_state = static_cast<std::size_t>(state - 1);
        } catch (const std::exception&) {
            throw UsageError("--initial-state must be a positive state number or 'draw'");
        }
    }
    if (format_text == "csv") {
        config.format = Format::csv;
    } else if (format_text == "structured-text" || format_text == "json") {
        config.format = Format::structured_text;
    } else if (!format_text.empty()) {
        throw UsageError("--format must be csv or structured-text");
    }

    config.validate();
    return config;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        config.validate();
        switch (config.command) {
            case Command::corpus_list: {
                std::ostringstream text;
                text << "name,states,parameters\n";
                for (const auto& name : corpus_names()) {
                    const auto spec = corpus(name);
                    text << name << "," << spec.dimension() << ",";
                    bool first = true;
                    for (const auto& [key, value] : spec.parameters()) {
                        text << (first ? "" : ";") << key << "=" << format_decimal(value);
                        first = false;
                    }
                    text << "\n";
                }
                emit(config, text.str(), out);
                return 0;
            }
            case Command::reproduce:
                return reproduce(config, out);
            default:
                break;
        }

        const GeneratorSpec spec = make_generator(config);
        switch (config.command) {
            case Command::simulate: {
                const auto traj = evolve(spec, initial_distribution(config, spec), config.horizon,
                                         integrator_controls(config));
                emit(config, trajectory_csv(traj), out);
                return 0;
            }
            case Command::sample: {
                const auto path = sample_path(spec, initial_distribution(config, spec), config.initial_state,
                                              config.horizon, config.seed, integrator_controls(config));
                emit(config, jump_path_csv(path), out);
                return 0;
            }
            case Command::invariant: {
                const auto set = find_invariant(spec, SimplexGrid(spec.dimension(), config.grid ? config.grid : 20));
                const bool json = config.format == Format::structured_text;
                emit(config, json ? stationary_json(set) : stationary_csv(set), out);
                for (const auto& d : set.diagnostics) err << "note: " << d << "\n";
                return 0;
            }
            case Command::certify_unique: {
                const auto cert =
                    certify_unique(spec, SimplexGrid(spec.dimension(), config.grid ? config.grid : 40), config.h);
                emit(config, certificate_json(cert), out);
                return verdict_status(cert);
            }
            case Command::certify_ergodic: {
                Certificate cert;
                if (spec.dimension() == 2) {
                    cert = certify_ergodic_2(spec, config.root_grid);
                } else if (spec.dimension() == 3) {
                    cert = certify_ergodic_3(spec, SimplexGrid(3, config.grid ? config.grid : 40), config.h);
                } else {
                    throw UsageError("certify-ergodic supports S = 2 and S = 3 only");
                }
                emit(config, certificate_json(cert), out);
                return verdict_status(cert);
            }
            default:
                return 1;
        }
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig config;
    try {
        config = parse_command_line(argc, argv);
    } catch (const HelpRequested& help) {
        out << help.text;
        return 0;
    } catch (const std::exception& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    }
    return run(config, out, err);
}

}  // namespace nlmc::cli
