#include "chrism/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "chrism/errors.hpp"

namespace chrism {

std::string Explanation::signature() const {
    std::string sig = format_double(fixed_factor);
    for (const SwitchDrawCount& d : draws) {
        sig += "|" + d.switch_name.to_string() + "=" + d.outcome.to_string() +
               "^" + std::to_string(d.count);
    }
    return sig;
}

double Explanation::probability(const SwitchRegistry& registry) const {
    double p = fixed_factor;
    for (const SwitchDrawCount& d : draws) {
        double q = registry.outcome_probability(d.switch_name, d.outcome_index);
        for (long i = 0; i < d.count; ++i) p *= q;
    }
    return p;
}

namespace {

struct Enumerator {
    const Program& program;
    const ExecutionStrategy& strategy;
    SwitchRegistry& registry;
    const EngineLimits& limits;
    const std::function<void(const WeightedLeaf&)>& visit;

    std::vector<double> path_probs;
    std::map<std::pair<std::string, std::size_t>, SwitchDrawCount> draws;
    std::vector<double> fixed_factors;
    long leaves = 0;

    void emit(const ExecutionState& state) {
        if (++leaves > limits.max_leaves)
            throw LimitExceeded("leaf limit " + std::to_string(limits.max_leaves) +
                                " exceeded");
        WeightedLeaf leaf;
        leaf.failed = state.failed();
        if (!leaf.failed) leaf.final_store = chr_store(state);
        double p = 1.0;
        for (double q : path_probs) p *= q;
        leaf.probability = p;
        double fixed = 1.0;
        for (double q : fixed_factors) fixed *= q;
        leaf.explanation.fixed_factor = fixed;
        for (const auto& [key, draw] : draws) leaf.explanation.draws.push_back(draw);
        visit(leaf);
    }

    void walk(const ExecutionState& state, long depth) {
        if (depth > limits.max_depth)
            throw LimitExceeded("transition limit " +
                                std::to_string(limits.max_depth) +
                                " exceeded (suspected nontermination)");
        StepResult step = designate(state, program, strategy, registry);
        switch (step.kind) {
            case StepResult::Kind::Final:
            case StepResult::Kind::Failed:
                emit(state);
                return;
            case StepResult::Kind::Deterministic:
                walk(step.next, depth + 1);
                return;
            case StepResult::Kind::Choice:
                for (Alternative& alt : step.choices) {
                    if (alt.event.prob == 0.0) continue;
                    path_probs.push_back(alt.event.prob);
                    bool is_switch =
                        alt.event.kind == TransitionEvent::Kind::SwitchDraw;
                    std::pair<std::string, std::size_t> key;
                    if (is_switch) {
                        key = {alt.event.switch_name.to_string(),
                               alt.event.outcome_index};
                        auto [it, inserted] = draws.try_emplace(
                            key, SwitchDrawCount{alt.event.switch_name,
                                                 alt.event.outcome_index,
                                                 alt.event.outcome, 0});
                        ++it->second.count;
                    } else {
                        fixed_factors.push_back(alt.event.prob);
                    }

                    walk(alt.next, depth + 1);

                    if (is_switch) {
                        auto it = draws.find(key);
                        if (--it->second.count == 0) draws.erase(it);
                    } else {
                        fixed_factors.pop_back();
                    }
                    path_probs.pop_back();
                }
                return;
        }
    }
};

}  // namespace

void enumerate(const Program& program, const std::vector<Term>& query,
               const ExecutionStrategy& strategy, SwitchRegistry& registry,
               const EngineLimits& limits,
               const std::function<void(const WeightedLeaf&)>& visit) {
    Enumerator e{program, strategy, registry, limits, visit, {}, {}, {}, 0};
    e.walk(initial_state(query), 0);
}

std::vector<WeightedLeaf> enumerate(const Program& program,
                                    const std::vector<Term>& query,
                                    const ExecutionStrategy& strategy,
                                    SwitchRegistry& registry,
                                    const EngineLimits& limits) {
    std::vector<WeightedLeaf> leaves;
    enumerate(program, query, strategy, registry, limits,
              [&](const WeightedLeaf& leaf) { leaves.push_back(leaf); });
    return leaves;
}

bool match_full(const std::vector<Term>& final_store,
                const std::vector<Term>& answer) {
    if (final_store.size() != answer.size()) return false;
    std::vector<Term> a = final_store, b = answer;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

bool match_partial(const std::vector<Term>& final_store,
                   const std::vector<Term>& answer,
                   const std::vector<Term>& negated) {
    std::vector<Term> remainder = final_store;
    for (const Term& a : answer) {
        auto it = std::find(remainder.begin(), remainder.end(), a);
        if (it == remainder.end()) return false;
        remainder.erase(it);
    }
    for (const Term& n : negated) {
        if (std::find(remainder.begin(), remainder.end(), n) != remainder.end())
            return false;
    }
    return true;
}

bool matches(const Observation& observation, const WeightedLeaf& leaf) {
    if (leaf.failed) return false;
    if (observation.kind == Observation::Kind::Full)
        return match_full(leaf.final_store, observation.answer);
    return match_partial(leaf.final_store, observation.answer, observation.negated);
}

double probability(const Program& program, const Observation& observation,
                   const ExecutionStrategy& strategy, SwitchRegistry& registry,
                   const EngineLimits& limits) {
    double total = 0.0;
    enumerate(program, observation.query, strategy, registry, limits,
              [&](const WeightedLeaf& leaf) {
                  if (matches(observation, leaf)) total += leaf.probability;
              });
    return total;
}

Distribution distribution(const Program& program, const std::vector<Term>& query,
                          const ExecutionStrategy& strategy,
                          SwitchRegistry& registry, const EngineLimits& limits) {
    Distribution dist;
    enumerate(program, query, strategy, registry, limits,
              [&](const WeightedLeaf& leaf) {
                  std::string key = leaf.failed
                                        ? kFailedClassKey
                                        : canonical_store_key(leaf.final_store);
                  dist[key] += leaf.probability;
              });
    return dist;
}

}  // namespace chrism
