#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "chrism/ast.hpp"
#include "chrism/engine.hpp"

namespace chrism {

struct SwitchDrawCount {
    Term switch_name = Term::atom("true");
    std::size_t outcome_index = 0;
    Term outcome = Term::atom("true");
    long count = 0;
};

/// The probabilistic choices along one derivation: switch draws as counts
/// plus the product of fixed (Const/Eval) factors.
struct Explanation {
    std::vector<SwitchDrawCount> draws;  // sorted by (switch, outcome)
    double fixed_factor = 1.0;

    /// Grouping key; derivations with equal signatures have equal probability.
    std::string signature() const;

    /// fixed_factor times the product of current switch probabilities.
    double probability(const SwitchRegistry& registry) const;
};

struct WeightedLeaf {
    bool failed = false;
    std::vector<Term> final_store;
    double probability = 0.0;  // product of path probabilities, in (0,1]
    Explanation explanation;
};

/// Depth-first traversal of the whole choice tree under the strategy.
/// Zero-probability branches are pruned; leaf probabilities (including
/// failed leaves) sum to 1. Throws LimitExceeded.
void enumerate(const Program& program, const std::vector<Term>& query,
               const ExecutionStrategy& strategy, SwitchRegistry& registry,
               const EngineLimits& limits,
               const std::function<void(const WeightedLeaf&)>& visit);

std::vector<WeightedLeaf> enumerate(const Program& program,
                                    const std::vector<Term>& query,
                                    const ExecutionStrategy& strategy,
                                    SwitchRegistry& registry,
                                    const EngineLimits& limits = {});

/// Multiset equality, order-insensitive.
bool match_full(const std::vector<Term>& final_store,
                const std::vector<Term>& answer);

/// answer ⊆ store (multisets) and no negated constraint occurs in
/// store − answer.
bool match_partial(const std::vector<Term>& final_store,
                   const std::vector<Term>& answer,
                   const std::vector<Term>& negated);

bool matches(const Observation& observation, const WeightedLeaf& leaf);

/// Sum of leaf probabilities over matching (non-failed) leaves.
double probability(const Program& program, const Observation& observation,
                   const ExecutionStrategy& strategy, SwitchRegistry& registry,
                   const EngineLimits& limits = {});

/// Probability mass per final-store equivalence class, keyed by the
/// canonical store rendering; failed mass lands in kFailedClassKey.
using Distribution = std::map<std::string, double>;

Distribution distribution(const Program& program, const std::vector<Term>& query,
                          const ExecutionStrategy& strategy,
                          SwitchRegistry& registry,
                          const EngineLimits& limits = {});

}  // namespace chrism
