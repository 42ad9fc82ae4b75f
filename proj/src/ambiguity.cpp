#include "chrism/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "chrism/errors.hpp"
#include "chrism/parser.hpp"

namespace chrism {

std::vector<StrategyVariant> generate_variants(const Program& program, int k,
                                               std::uint64_t seed) {
    if (k < 2) throw RuntimeError("at least 2 strategy variants are required");

    std::vector<StrategyVariant> variants;
    std::set<std::pair<std::vector<int>, bool>> seen;
    auto add = [&](ExecutionStrategy s, std::string label) {
        if (static_cast<int>(variants.size()) >= k) return;
        if (!seen.emplace(s.rule_order, s.partners_descending).second) return;
        s.label = label;
        variants.push_back({std::move(s), std::move(label)});
    };

    ExecutionStrategy refined = ExecutionStrategy::refined(program);
    add(refined, "refined");

    ExecutionStrategy reversed = refined;
    std::reverse(reversed.rule_order.begin(), reversed.rule_order.end());
    add(reversed, "reversed-rules");

    ExecutionStrategy descending = refined;
    descending.partners_descending = true;
    add(descending, "descending-partners");

    std::mt19937_64 rng(seed);
    int attempts = 0;
    int max_attempts = 64 * k;
    while (static_cast<int>(variants.size()) < k && attempts < max_attempts) {
        ++attempts;
        ExecutionStrategy s = refined;
        std::shuffle(s.rule_order.begin(), s.rule_order.end(), rng);
        s.partners_descending = attempts % 2 == 0;
        add(s, "variant-" + std::to_string(variants.size() + 1));
    }
    return variants;
}

namespace {

bool differ(const Distribution& a, const Distribution& b, double tolerance) {
    std::set<std::string> keys;
    for (const auto& [key, p] : a) keys.insert(key);
    for (const auto& [key, p] : b) keys.insert(key);
    for (const std::string& key : keys) {
        double pa = a.count(key) ? a.at(key) : 0.0;
        double pb = b.count(key) ? b.at(key) : 0.0;
        if (std::abs(pa - pb) > tolerance) return true;
    }
    return false;
}

}  // namespace

AmbiguityVerdict check_ambiguity(const Program& program,
                                 const std::vector<Term>& query, int k,
                                 double tolerance,
                                 const SwitchRegistry& base_registry,
                                 const EngineLimits& limits, std::uint64_t seed) {
    std::vector<StrategyVariant> variants = generate_variants(program, k, seed);

    std::vector<Distribution> dists;
    dists.reserve(variants.size());
    for (const StrategyVariant& v : variants) {
        SwitchRegistry registry = base_registry;  // defaults must not leak across
        dists.push_back(distribution(program, query, v.strategy, registry, limits));
    }

    AmbiguityVerdict verdict;
    verdict.variants_tested = static_cast<int>(variants.size());
    verdict.query_text = constraints_to_source(query);
    for (std::size_t i = 0; i < variants.size(); ++i) {
        for (std::size_t j = i + 1; j < variants.size(); ++j) {
            if (differ(dists[i], dists[j], tolerance)) {
                verdict.ambiguous = true;
                verdict.label_a = variants[i].label;
                verdict.label_b = variants[j].label;
                verdict.distribution_a = dists[i];
                verdict.distribution_b = dists[j];
                return verdict;
            }
        }
    }
    return verdict;
}

}  // namespace chrism
