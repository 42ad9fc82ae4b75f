// Python bindings for the main operations: sampling, exact inference,
// EM learning, ambiguity checking, and switch-registry manipulation.
// Programs, queries, observations, and registries travel as text, mirroring
// the on-disk formats, so the Python surface stays stable and serializable.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chrism/ambiguity.hpp"
#include "chrism/engine.hpp"
#include "chrism/errors.hpp"
#include "chrism/inference.hpp"
#include "chrism/learning.hpp"
#include "chrism/parser.hpp"

namespace py = pybind11;
using namespace chrism;

namespace {

struct Session {
    Program program;
    SwitchRegistry registry;
    ExecutionStrategy strategy;

    explicit Session(const std::string& program_text)
        : program(parse_program(program_text)),
          registry(SwitchRegistry::from_program(program)),
          strategy(ExecutionStrategy::refined(program)) {}

    std::string sample(const std::string& query, std::uint64_t seed,
                       long max_depth) {
        EngineLimits limits;
        limits.max_depth = max_depth;
        SampleResult r = run_sample(program, parse_query(query), strategy,
                                    registry, seed, limits);
        if (r.failed) return "fail";
        return constraints_to_source(r.final_store);
    }

    double prob(const std::string& observation, long max_leaves) {
        EngineLimits limits;
        limits.max_leaves = max_leaves;
        return probability(program, parse_observation(observation), strategy,
                           registry, limits);
    }

    std::map<std::string, double> dist(const std::string& query,
                                       long max_leaves) {
        EngineLimits limits;
        limits.max_leaves = max_leaves;
        return distribution(program, parse_query(query), strategy, registry,
                            limits);
    }

    py::dict learn(const std::string& observations, int max_iterations,
                   double tolerance, double smoothing) {
        EMConfig config;
        config.max_iterations = max_iterations;
        config.tolerance = tolerance;
        config.smoothing = smoothing;
        EMResult r = em_learn(program, parse_observations(observations),
                              strategy, registry, config);
        py::dict out;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        out["log_likelihood"] = r.final_log_likelihood;
        out["trace"] = r.log_likelihood_trace;
        std::vector<std::string> unlearnable;
        for (const Term& t : r.unlearnable) unlearnable.push_back(t.to_string());
        out["unlearnable"] = unlearnable;
        return out;
    }

    void set_switch_text(const std::string& name,
                         const std::vector<double>& probs) {
        std::vector<Term> terms = parse_query(name);
        if (terms.size() != 1)
            throw ParseError("switch name must be a single ground term");
        registry.set_switch(terms[0], probs);
    }

    py::dict check(const std::string& query, int variants, double tolerance,
                   std::uint64_t seed) {
        AmbiguityVerdict v = check_ambiguity(program, parse_query(query),
                                             variants, tolerance, registry,
                                             EngineLimits{}, seed);
        py::dict out;
        out["ambiguous"] = v.ambiguous;
        out["variants_tested"] = v.variants_tested;
        if (v.ambiguous) {
            out["strategy_a"] = v.label_a;
            out["strategy_b"] = v.label_b;
            out["distribution_a"] = v.distribution_a;
            out["distribution_b"] = v.distribution_b;
        }
        return out;
    }

    std::string show_switches() const { return registry.show(); }
    std::string registry_text() const { return registry.serialize(); }
    void load_registry_text(const std::string& text) {
        registry.merge_from(SwitchRegistry::deserialize(text));
    }
};

}  // namespace

PYBIND11_MODULE(_chrism, m) {
    m.doc() = "Probabilistic multiset-rewriting engine for chance-rule programs";

    py::register_exception<ParseError>(m, "ProgramError", PyExc_ValueError);
    py::register_exception<RuntimeError>(m, "EngineError", PyExc_RuntimeError);
    py::register_exception<LimitExceeded>(m, "LimitError", PyExc_RuntimeError);

    py::class_<Session>(m, "Session",
                        "A loaded chance-rule program with its switch registry")
        .def(py::init<const std::string&>(), py::arg("program"))
        .def("sample", &Session::sample, py::arg("query"), py::arg("seed") = 0,
             py::arg("max_depth") = 1000000,
             "Probabilistically execute a query; returns the final store "
             "rendered as text, or 'fail'")
        .def("prob", &Session::prob, py::arg("observation"),
             py::arg("max_leaves") = 1000000,
             "Exact probability of a full or partial observation")
        .def("distribution", &Session::dist, py::arg("query"),
             py::arg("max_leaves") = 1000000,
             "Exact answer distribution keyed by canonical store text")
        .def("learn", &Session::learn, py::arg("observations"),
             py::arg("max_iterations") = 500, py::arg("tolerance") = 1e-6,
             py::arg("smoothing") = 0.0,
             "EM-learn switch distributions from an observation list")
        .def("set_switch", &Session::set_switch_text, py::arg("name"),
             py::arg("probs"), "Replace one switch distribution")
        .def("check_ambiguity", &Session::check, py::arg("query"),
             py::arg("variants") = 4, py::arg("tolerance") = 1e-9,
             py::arg("seed") = 0,
             "Compare answer distributions across execution-strategy variants")
        .def("show_switches", &Session::show_switches,
             "Human-readable switch table")
        .def("registry_text", &Session::registry_text,
             "Serialize the switch registry to its sidecar text format")
        .def("load_registry_text", &Session::load_registry_text,
             py::arg("text"), "Overlay switch distributions from sidecar text");
}
