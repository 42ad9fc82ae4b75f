#pragma once

#include <string>
#include <vector>

#include "chrism/inference.hpp"

namespace chrism {

struct EMConfig {
    int max_iterations = 500;
    double tolerance = 1e-6;  // on log-likelihood change
    double smoothing = 0.0;   // pseudo-count per outcome
    // relative perturbation of learnable switches before the first E-step;
    // symmetric starting points are EM-stationary, so ties must be broken
    double init_jitter = 0.1;
    std::uint64_t init_seed = 0;
};

/// One explanation signature with the number of distinct leaves sharing it.
struct GroupedExplanation {
    Explanation explanation;
    long multiplicity = 1;
};

/// Enumerates the observation's query, filters matching leaves, and groups
/// them by explanation signature. Throws RuntimeError when no leaf matches
/// (impossible observation).
std::vector<GroupedExplanation> collect_explanations(
    const Program& program, const Observation& observation,
    const ExecutionStrategy& strategy, SwitchRegistry& registry,
    const EngineLimits& limits = {});

/// P(o) = sum of multiplicity * P(e) over the observation's explanations.
double observation_probability(const std::vector<GroupedExplanation>& explanations,
                               const SwitchRegistry& registry);

/// Sum over observations of count * ln P(o). Throws RuntimeError on P(o)=0.
double log_likelihood(const std::vector<Observation>& observations,
                      const std::vector<std::vector<GroupedExplanation>>& explanations,
                      const SwitchRegistry& registry);

struct EMResult {
    int iterations = 0;
    std::vector<double> log_likelihood_trace;  // non-decreasing
    double final_log_likelihood = 0.0;
    bool converged = false;
    std::vector<std::string> warnings;
    std::vector<Term> unlearnable;  // learnable switches never drawn in any explanation
};

/// Expectation-maximization over the observations' explanations. Updates the
/// learnable switch distributions in place; Const/Eval probabilities and
/// fixed-distribution sites are untouched.
EMResult em_learn(const Program& program,
                  const std::vector<Observation>& observations,
                  const ExecutionStrategy& strategy, SwitchRegistry& registry,
                  const EMConfig& config = {}, const EngineLimits& limits = {});

}  // namespace chrism
