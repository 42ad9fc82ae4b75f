#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chrism/ast.hpp"
#include "chrism/registry.hpp"
#include "chrism/state.hpp"

namespace chrism {

/// One annotated transition. Deterministic covers Solve/Introduce/Fail;
/// SwitchDraw covers registry-backed choices (experiments, disjunction
/// sites); FixedDraw covers Const/Eval rule probabilities.
struct TransitionEvent {
    enum class Kind { Deterministic, SwitchDraw, FixedDraw };

    Kind kind = Kind::Deterministic;
    std::string site;  // "solve"/"introduce"/"fail", or "rule <id>"
    Term switch_name = Term::atom("true");  // SwitchDraw only
    Term outcome = Term::atom("true");      // drawn outcome label
    std::size_t outcome_index = 0;
    double prob = 1.0;

    std::string to_string() const;
};

/// Deterministic resolution of the non-probabilistic choices: which rule to
/// consider first and in which order partner constraints are tried. The goal
/// discipline (stack, body first) is common to all variants.
struct ExecutionStrategy {
    std::vector<int> rule_order;  // 1-based rule ids, consideration order
    bool partners_descending = false;
    std::string label = "refined";

    static ExecutionStrategy refined(const Program& program);
};

struct MatchedInstance {
    int rule_id = 0;
    std::vector<int> kept_ids;
    std::vector<int> removed_ids;
    Bindings bindings;  // head matching plus guard-introduced bindings
};

struct Alternative {
    TransitionEvent event;
    ExecutionState next;
};

struct StepResult {
    enum class Kind { Final, Failed, Deterministic, Choice };

    Kind kind = Kind::Final;
    TransitionEvent event;              // Deterministic
    ExecutionState next;                // Deterministic
    std::vector<Alternative> choices;   // Choice; probabilities sum to 1
};

/// The strategy's first untried rule instance whose guard holds, or nullopt.
std::optional<MatchedInstance> find_instance(const ExecutionState& state,
                                             const Program& program,
                                             const ExecutionStrategy& strategy);

/// Designates the unique next transition (or choice point) at a state. The
/// registry may gain default entries for switches seen for the first time.
StepResult designate(const ExecutionState& state, const Program& program,
                     const ExecutionStrategy& strategy, SwitchRegistry& registry);

struct EngineLimits {
    long max_depth = 1000000;
    long max_leaves = 1000000;
};

struct SampleResult {
    bool failed = false;
    std::vector<Term> final_store;
    std::vector<TransitionEvent> trace;
};

/// One seeded random walk to a final state. Identical seed, program, query,
/// and registry produce identical results.
SampleResult run_sample(const Program& program, const std::vector<Term>& query,
                        const ExecutionStrategy& strategy, SwitchRegistry& registry,
                        std::uint64_t seed, const EngineLimits& limits = {});

}  // namespace chrism
