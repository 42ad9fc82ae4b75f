#include "chrism/learning.hpp"

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "chrism/errors.hpp"

namespace chrism {

std::vector<GroupedExplanation> collect_explanations(
    const Program& program, const Observation& observation,
    const ExecutionStrategy& strategy, SwitchRegistry& registry,
    const EngineLimits& limits) {
    std::map<std::string, GroupedExplanation> grouped;
    enumerate(program, observation.query, strategy, registry, limits,
              [&](const WeightedLeaf& leaf) {
                  if (!matches(observation, leaf)) return;
                  std::string sig = leaf.explanation.signature();
                  auto [it, inserted] =
                      grouped.try_emplace(sig, GroupedExplanation{leaf.explanation, 0});
                  ++it->second.multiplicity;
              });
    if (grouped.empty())
        throw RuntimeError("observation has no explanation: " +
                           observation.to_string());
    std::vector<GroupedExplanation> out;
    out.reserve(grouped.size());
    for (auto& [sig, g] : grouped) out.push_back(std::move(g));
    return out;
}

double observation_probability(const std::vector<GroupedExplanation>& explanations,
                               const SwitchRegistry& registry) {
    double p = 0.0;
    for (const GroupedExplanation& g : explanations)
        p += static_cast<double>(g.multiplicity) * g.explanation.probability(registry);
    return p;
}

double log_likelihood(
    const std::vector<Observation>& observations,
    const std::vector<std::vector<GroupedExplanation>>& explanations,
    const SwitchRegistry& registry) {
    double ll = 0.0;
    for (std::size_t i = 0; i < observations.size(); ++i) {
        double p = observation_probability(explanations[i], registry);
        if (p <= 0.0)
            throw RuntimeError("zero-probability observation: " +
                               observations[i].to_string());
        ll += static_cast<double>(observations[i].count) * std::log(p);
    }
    return ll;
}

EMResult em_learn(const Program& program,
                  const std::vector<Observation>& observations,
                  const ExecutionStrategy& strategy, SwitchRegistry& registry,
                  const EMConfig& config, const EngineLimits& limits) {
    if (config.tolerance <= 0.0) throw RuntimeError("EM tolerance must be > 0");
    if (observations.empty())
        throw RuntimeError("cannot learn from an empty observation list");

    // explanation structure does not depend on the probabilities, so it is
    // collected once; the dry enumeration also seeds registry defaults
    std::vector<std::vector<GroupedExplanation>> explanations;
    explanations.reserve(observations.size());
    for (const Observation& obs : observations)
        explanations.push_back(
            collect_explanations(program, obs, strategy, registry, limits));

    std::set<std::string> drawn;
    for (const auto& per_obs : explanations) {
        for (const GroupedExplanation& g : per_obs) {
            for (const SwitchDrawCount& d : g.explanation.draws)
                drawn.insert(d.switch_name.to_string());
        }
    }

    EMResult result;
    for (const SwitchEntry* entry : registry.entries()) {
        if (entry->learnable && !drawn.count(entry->name.to_string()))
            result.unlearnable.push_back(entry->name);
    }

    // Symmetric starting points (e.g. identical uniform distributions for
    // interchangeable switches) are stationary for EM; a small deterministic
    // perturbation of the learnable switches breaks the tie. Multiplicative
    // jitter keeps the distributions valid after renormalization.
    if (config.init_jitter > 0.0) {
        std::mt19937_64 rng(config.init_seed);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        for (const SwitchEntry* const_entry : registry.entries()) {
            if (!const_entry->learnable || !drawn.count(const_entry->name.to_string()))
                continue;
            SwitchEntry* entry = registry.find(const_entry->name);
            double total = 0.0;
            for (double& p : entry->probs) {
                p *= 1.0 + config.init_jitter * unit(rng);
                total += p;
            }
            for (double& p : entry->probs) p /= total;
        }
    }

    double previous_ll = 0.0;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        double ll = log_likelihood(observations, explanations, registry);
        result.log_likelihood_trace.push_back(ll);
        result.iterations = iter + 1;
        if (iter > 0 && std::abs(ll - previous_ll) < config.tolerance) {
            result.converged = true;
            break;
        }
        previous_ll = ll;

        // E-step: expected draw counts per (switch, outcome)
        std::map<std::string, std::vector<double>> expected;
        std::map<std::string, Term> switch_names;
        for (std::size_t i = 0; i < observations.size(); ++i) {
            double p_obs = observation_probability(explanations[i], registry);
            double weight_base =
                static_cast<double>(observations[i].count) / p_obs;
            for (const GroupedExplanation& g : explanations[i]) {
                double w = weight_base * static_cast<double>(g.multiplicity) *
                           g.explanation.probability(registry);
                for (const SwitchDrawCount& d : g.explanation.draws) {
                    const SwitchEntry* entry = registry.find(d.switch_name);
                    if (!entry || !entry->learnable) continue;
                    std::string key = d.switch_name.to_string();
                    switch_names.emplace(key, d.switch_name);
                    auto& counts = expected[key];
                    counts.resize(entry->probs.size(), 0.0);
                    counts[d.outcome_index] += w * static_cast<double>(d.count);
                }
            }
        }

        // M-step: normalize per switch
        for (auto& [key, counts] : expected) {
            double total = 0.0;
            for (double c : counts) total += c + config.smoothing;
            SwitchEntry* entry = registry.find(switch_names.at(key));
            if (!entry) continue;
            if (total <= 0.0) {
                result.warnings.push_back("switch " + key +
                                          ": all-zero expected counts, keeping "
                                          "previous distribution");
                continue;
            }
            for (std::size_t i = 0; i < entry->probs.size(); ++i)
                entry->probs[i] = (counts[i] + config.smoothing) / total;
        }
    }

    result.final_log_likelihood = result.log_likelihood_trace.back();
    return result;
}

}  // namespace chrism
