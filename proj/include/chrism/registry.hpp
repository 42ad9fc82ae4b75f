#pragma once

#include <map>
#include <string>
#include <vector>

#include "chrism/ast.hpp"
#include "chrism/term.hpp"

namespace chrism {

struct SwitchEntry {
    Term name = Term::atom("true");
    std::vector<Term> outcomes;
    std::vector<double> probs;
    bool learnable = true;
    // set_switch on an unseen switch numbers the outcomes 1..n; the real
    // labels are adopted at first lookup
    bool placeholder_labels = false;
};

/// Named experiments with their outcome spaces and distributions. Unknown
/// switches default to uniform at first lookup.
class SwitchRegistry {
public:
    SwitchRegistry() = default;

    static SwitchRegistry from_program(const Program& program);

    void declare(const SwitchDecl& decl);

    /// Existing entry, or a fresh uniform one over the supplied outcomes.
    /// Throws RuntimeError if name is not ground (instantiation error) or an
    /// existing entry's outcome count differs.
    const SwitchEntry& lookup_or_default(const Term& name,
                                         const std::vector<Term>& outcomes);

    /// Replaces the distribution; probabilities must match the outcome count,
    /// lie in [0,1], and sum to 1 (1e-9). Unseen switches get numbered
    /// placeholder outcomes.
    void set_switch(const Term& name, const std::vector<double>& probs);

    const SwitchEntry* find(const Term& name) const;
    SwitchEntry* find(const Term& name);

    /// Probability of one outcome; the switch must exist.
    double outcome_probability(const Term& name, std::size_t outcome_index) const;

    std::vector<const SwitchEntry*> entries() const;  // sorted by name

    /// Inserts or overwrites entries from another registry (sidecar overlay).
    void merge_from(const SwitchRegistry& other);

    /// One line per switch: "Switch <name>: <o> (p: <p>) ..." (5 decimals).
    std::string show() const;

    /// Sidecar format: "<name> | <outcome>:<prob> ...", full precision.
    std::string serialize() const;
    static SwitchRegistry deserialize(const std::string& text);

private:
    std::map<std::string, SwitchEntry> entries_;
    std::vector<SwitchDecl> pattern_declarations_;
};

}  // namespace chrism
