#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "chrism/ambiguity.hpp"
#include "chrism/engine.hpp"
#include "chrism/errors.hpp"
#include "chrism/inference.hpp"
#include "chrism/learning.hpp"
#include "chrism/parser.hpp"

namespace {

using namespace chrism;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write file: " + path);
    out << content;
}

long env_long(const char* name, long fallback) {
    const char* value = std::getenv(name);
    return value ? std::strtol(value, nullptr, 10) : fallback;
}

struct CommonOptions {
    std::string program_path;
    std::string registry_path;
    std::string save_registry_path;
    EngineLimits limits;
    bool machine = false;

    void attach(CLI::App* cmd, bool with_registry = true) {
        cmd->add_option("-p,--program", program_path, "CHRiSM program file")
            ->required();
        if (with_registry) {
            cmd->add_option("--registry", registry_path,
                            "switch registry file to load");
            cmd->add_option("--save-registry", save_registry_path,
                            "write the resulting registry to this file");
        }
        limits.max_depth = env_long("CHRISM_MAX_DEPTH", limits.max_depth);
        limits.max_leaves = env_long("CHRISM_MAX_LEAVES", limits.max_leaves);
        cmd->add_option("--max-depth", limits.max_depth,
                        "maximum transitions per derivation");
        cmd->add_option("--max-leaves", limits.max_leaves,
                        "maximum enumerated derivations");
        cmd->add_flag("--machine", machine, "machine-readable output");
    }

    Program load_program() const { return parse_program(read_file(program_path)); }

    SwitchRegistry load_registry(const Program& program) const {
        SwitchRegistry registry = SwitchRegistry::from_program(program);
        if (!registry_path.empty())
            registry.merge_from(SwitchRegistry::deserialize(read_file(registry_path)));
        return registry;
    }

    void maybe_save(const SwitchRegistry& registry) const {
        if (!save_registry_path.empty())
            write_file(save_registry_path, registry.serialize());
    }
};

std::string inline_or_file(const std::string& inline_text,
                           const std::string& file_path, const char* what) {
    if (!inline_text.empty() && !file_path.empty())
        throw ParseError(std::string("give ") + what + " inline or as a file, not both");
    if (!file_path.empty()) return read_file(file_path);
    return inline_text;
}

std::string probability_line(const Observation& obs, double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%f", p);
    return "Probability of " + obs.to_string() + " is: " + buf;
}

// --dot derivation-tree dump (debugging aid)
struct DotWriter {
    const Program& program;
    const ExecutionStrategy& strategy;
    SwitchRegistry& registry;
    const EngineLimits& limits;
    std::ostream& out;
    int next_id = 0;
    long nodes = 0;

    std::string node_label(const ExecutionState& state) {
        if (state.failed()) return "fail";
        std::string label = constraints_to_source(chr_store(state));
        if (label.empty()) label = "(empty)";
        if (!state.goal.empty())
            label += "\\ngoal: " + std::to_string(state.goal.size());
        return label;
    }

    int walk(const ExecutionState& state) {
        if (++nodes > limits.max_leaves)
            throw LimitExceeded("node limit exceeded in --dot dump");
        int id = next_id++;
        out << "  n" << id << " [label=\"" << node_label(state) << "\"];\n";
        StepResult step = designate(state, program, strategy, registry);
        switch (step.kind) {
            case StepResult::Kind::Final:
            case StepResult::Kind::Failed:
                break;
            case StepResult::Kind::Deterministic: {
                int child = walk(step.next);
                out << "  n" << id << " -> n" << child << " [label=\""
                    << step.event.site << "\"];\n";
                break;
            }
            case StepResult::Kind::Choice:
                for (const Alternative& alt : step.choices) {
                    if (alt.event.prob == 0.0) continue;
                    int child = walk(alt.next);
                    out << "  n" << id << " -> n" << child << " [label=\""
                        << alt.event.outcome.to_string() << " "
                        << format_double(alt.event.prob) << "\"];\n";
                }
                break;
        }
        return id;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"CHRiSM engine: sampling, exact inference, EM learning, and "
                 "ambiguity checking for chance-rule programs"};
    app.require_subcommand(1);

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "probabilistically execute a query");
    CommonOptions sample_opts;
    sample_opts.attach(sample_cmd);
    std::string query_text, query_file;
    std::uint64_t seed = 0;
    long sample_count = 1;
    bool show_trace = false;
    sample_cmd->add_option("-q,--query", query_text, "query constraints");
    sample_cmd->add_option("--query-file", query_file, "query file");
    sample_cmd->add_option("--seed", seed, "random seed");
    sample_cmd->add_option("-n,--count", sample_count, "number of samples");
    sample_cmd->add_flag("--trace", show_trace, "print transition events");

    // prob
    auto* prob_cmd = app.add_subcommand("prob", "compute an observation probability");
    CommonOptions prob_opts;
    prob_opts.attach(prob_cmd);
    std::string obs_text, obs_file;
    prob_cmd->add_option("-o,--observation", obs_text, "observation");
    prob_cmd->add_option("--observation-file", obs_file, "observation file");

    // enumerate
    auto* enum_cmd =
        app.add_subcommand("enumerate", "enumerate the answer distribution");
    CommonOptions enum_opts;
    enum_opts.attach(enum_cmd);
    std::string enum_query_text, enum_query_file, dot_path;
    enum_cmd->add_option("-q,--query", enum_query_text, "query constraints");
    enum_cmd->add_option("--query-file", enum_query_file, "query file");
    enum_cmd->add_option("--dot", dot_path, "write the derivation tree as DOT");

    // learn
    auto* learn_cmd = app.add_subcommand("learn", "EM-learn switch distributions");
    CommonOptions learn_opts;
    learn_opts.attach(learn_cmd);
    std::string learn_obs_file, csv_path;
    EMConfig em_config;
    learn_cmd->add_option("-o,--observations", learn_obs_file, "observation file")
        ->required();
    learn_cmd->add_option("--max-iterations", em_config.max_iterations,
                          "EM iteration cap");
    learn_cmd->add_option("--tolerance", em_config.tolerance,
                          "log-likelihood convergence tolerance");
    learn_cmd->add_option("--smoothing", em_config.smoothing,
                          "pseudo-count per outcome");
    learn_cmd->add_option("--csv-trace", csv_path,
                          "write iteration,loglik CSV to this file");

    // show-sw
    auto* show_cmd = app.add_subcommand("show-sw", "print switch distributions");
    CommonOptions show_opts;
    show_opts.attach(show_cmd);

    // set-sw
    auto* set_cmd = app.add_subcommand("set-sw", "set a switch distribution");
    CommonOptions set_opts;
    set_opts.attach(set_cmd);
    std::string switch_name, dist_text;
    set_cmd->add_option("--name", switch_name, "switch name")->required();
    set_cmd->add_option("--dist", dist_text, "comma-separated probabilities")
        ->required();

    // check-ambiguity
    auto* amb_cmd = app.add_subcommand("check-ambiguity",
                                       "compare distributions across strategies");
    CommonOptions amb_opts;
    amb_opts.attach(amb_cmd);
    std::string amb_query_text, amb_query_file;
    int variant_count = 4;
    double amb_tolerance = 1e-9;
    std::uint64_t amb_seed = 0;
    amb_cmd->add_option("-q,--query", amb_query_text, "query constraints");
    amb_cmd->add_option("--query-file", amb_query_file, "query file");
    amb_cmd->add_option("-k,--variants", variant_count, "strategy variants to try");
    amb_cmd->add_option("--tolerance", amb_tolerance, "distribution tolerance");
    amb_cmd->add_option("--seed", amb_seed, "variant generation seed");

    CLI11_PARSE(app, argc, argv);

    if (*sample_cmd) {
        Program program = sample_opts.load_program();
        SwitchRegistry registry = sample_opts.load_registry(program);
        ExecutionStrategy strategy = ExecutionStrategy::refined(program);
        std::vector<Term> query = parse_query(
            inline_or_file(query_text, query_file, "the query"));
        std::string echo = constraints_to_source(query);
        for (long i = 0; i < sample_count; ++i) {
            SampleResult result = run_sample(program, query, strategy, registry,
                                             seed + static_cast<std::uint64_t>(i),
                                             sample_opts.limits);
            if (show_trace) {
                for (const TransitionEvent& e : result.trace)
                    std::cout << "% " << e.to_string() << "\n";
            }
            if (result.failed) {
                std::cout << echo << " <==> fail.\n";
            } else {
                std::cout << echo << " <==> "
                          << constraints_to_source(result.final_store) << ".\n";
            }
        }
        sample_opts.maybe_save(registry);
        return 0;
    }

    if (*prob_cmd) {
        Program program = prob_opts.load_program();
        SwitchRegistry registry = prob_opts.load_registry(program);
        ExecutionStrategy strategy = ExecutionStrategy::refined(program);
        Observation obs = parse_observation(
            inline_or_file(obs_text, obs_file, "the observation"));
        double p = probability(program, obs, strategy, registry, prob_opts.limits);
        if (prob_opts.machine) {
            std::cout << format_double(p) << "\n";
        } else {
            std::cout << probability_line(obs, p) << "\n";
        }
        prob_opts.maybe_save(registry);
        return 0;
    }

    if (*enum_cmd) {
        Program program = enum_opts.load_program();
        SwitchRegistry registry = enum_opts.load_registry(program);
        ExecutionStrategy strategy = ExecutionStrategy::refined(program);
        std::vector<Term> query = parse_query(
            inline_or_file(enum_query_text, enum_query_file, "the query"));
        if (!dot_path.empty()) {
            std::ofstream dot(dot_path);
            if (!dot) throw RuntimeError("cannot write file: " + dot_path);
            dot << "digraph derivation {\n";
            DotWriter writer{program, strategy, registry,
                             enum_opts.limits, dot, 0, 0};
            writer.walk(initial_state(query));
            dot << "}\n";
        }
        Distribution dist =
            distribution(program, query, strategy, registry, enum_opts.limits);
        for (const auto& [key, p] : dist) {
            if (enum_opts.machine) {
                std::cout << key << "\t" << format_double(p) << "\n";
            } else {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%f", p);
                std::cout << (key.empty() ? "(empty)" : key) << ": " << buf << "\n";
            }
        }
        enum_opts.maybe_save(registry);
        return 0;
    }

    if (*learn_cmd) {
        Program program = learn_opts.load_program();
        SwitchRegistry registry = learn_opts.load_registry(program);
        ExecutionStrategy strategy = ExecutionStrategy::refined(program);
        std::vector<Observation> observations =
            parse_observations(read_file(learn_obs_file));
        EMResult result = em_learn(program, observations, strategy, registry,
                                   em_config, learn_opts.limits);
        if (!csv_path.empty()) {
            std::string csv = "iteration,loglik\n";
            for (std::size_t i = 0; i < result.log_likelihood_trace.size(); ++i)
                csv += std::to_string(i + 1) + "," +
                       format_double(result.log_likelihood_trace[i]) + "\n";
            write_file(csv_path, csv);
        }
        for (const std::string& w : result.warnings)
            std::cerr << "warning: " << w << "\n";
        for (const Term& t : result.unlearnable)
            std::cerr << "warning: switch " << t.to_string()
                      << " never drawn in any explanation; not learnable from "
                         "this data\n";
        std::cout << "Iterations: " << result.iterations
                  << (result.converged ? " (converged)" : " (iteration cap)")
                  << "\n";
        std::cout << "Log-likelihood: " << format_double(result.final_log_likelihood)
                  << "\n";
        std::cout << registry.show();
        learn_opts.maybe_save(registry);
        return 0;
    }

    if (*show_cmd) {
        Program program = show_opts.load_program();
        SwitchRegistry registry = show_opts.load_registry(program);
        std::cout << registry.show();
        return 0;
    }

    if (*set_cmd) {
        Program program = set_opts.load_program();
        SwitchRegistry registry = set_opts.load_registry(program);
        std::vector<double> probs;
        std::istringstream in(dist_text);
        std::string token;
        while (std::getline(in, token, ','))
            probs.push_back(std::strtod(token.c_str(), nullptr));
        std::vector<Term> name_terms = parse_query(switch_name);
        if (name_terms.size() != 1)
            throw ParseError("--name must be a single ground term");
        registry.set_switch(name_terms[0], probs);
        set_opts.maybe_save(registry);
        std::cout << registry.show();
        return 0;
    }

    if (*amb_cmd) {
        Program program = amb_opts.load_program();
        SwitchRegistry registry = amb_opts.load_registry(program);
        std::vector<Term> query = parse_query(
            inline_or_file(amb_query_text, amb_query_file, "the query"));
        AmbiguityVerdict verdict =
            check_ambiguity(program, query, variant_count, amb_tolerance,
                            registry, amb_opts.limits, amb_seed);
        if (!verdict.ambiguous) {
            std::cout << "Not refuted by " << verdict.variants_tested
                      << " strategy variants (not a proof of unambiguity).\n";
            return 0;
        }
        std::cout << "Ambiguous for query " << verdict.query_text << ": "
                  << verdict.label_a << " vs " << verdict.label_b << "\n";
        auto print_dist = [&](const std::string& label, const Distribution& d) {
            std::cout << label << ":\n";
            for (const auto& [key, p] : d) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%f", p);
                std::cout << "  " << (key.empty() ? "(empty)" : key) << ": " << buf
                          << "\n";
            }
        };
        print_dist(verdict.label_a, verdict.distribution_a);
        print_dist(verdict.label_b, verdict.distribution_b);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const chrism::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const chrism::RuntimeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
