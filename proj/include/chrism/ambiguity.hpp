#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chrism/inference.hpp"

namespace chrism {

struct StrategyVariant {
    ExecutionStrategy strategy;
    std::string label;
};

/// Up to k distinct strategy variants: the refined default, the reversed rule
/// order, the descending partner order, then seeded rule-order permutations.
std::vector<StrategyVariant> generate_variants(const Program& program, int k,
                                               std::uint64_t seed = 0);

/// Either a witness (two variants with distributions differing beyond the
/// tolerance on some class) or "not refuted by k variants" — explicitly a
/// non-proof of unambiguity.
struct AmbiguityVerdict {
    bool ambiguous = false;
    int variants_tested = 0;
    std::string query_text;
    std::string label_a, label_b;
    Distribution distribution_a, distribution_b;
};

AmbiguityVerdict check_ambiguity(const Program& program,
                                 const std::vector<Term>& query, int k,
                                 double tolerance = 1e-9,
                                 const SwitchRegistry& base_registry = {},
                                 const EngineLimits& limits = {},
                                 std::uint64_t seed = 0);

}  // namespace chrism
