#pragma once

#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "chrism/ast.hpp"
#include "chrism/term.hpp"

namespace chrism {

struct IdentifiedConstraint {
    int id = 0;
    Term constraint = Term::atom("true");
};

/// (rule, kept ids, removed ids) triple; recorded on every Maybe-Apply
/// consideration, applied or skipped.
using HistoryEntry = std::tuple<int, std::vector<int>, std::vector<int>>;

/// Pending goal item. Constraints and builtins are ground; a disjunction
/// keeps the matching substitution so the chosen branch can be instantiated
/// at choice time.
struct GoalItem {
    enum class Kind { Constraint, Builtin, Disjunction };

    Kind kind = Kind::Constraint;
    Term term = Term::atom("true");  // Constraint/Builtin; selector if Disjunction
    std::shared_ptr<const Disjunction> disjunction;
    Bindings bindings;

    static GoalItem constraint(Term t);
    static GoalItem builtin(Term t);
    static GoalItem disjunct(std::shared_ptr<const Disjunction> d, Term selector,
                             Bindings bindings);
};

/// The ⟨goal, store, builtin, history⟩ tuple with the id counter. Goal items
/// are processed from the back (the goal is a stack; initial queries are
/// pushed reversed so source order runs first).
struct ExecutionState {
    std::vector<GoalItem> goal;
    std::vector<IdentifiedConstraint> store;  // ascending id
    bool builtin_ok = true;                   // false only in the failed state
    std::set<HistoryEntry> history;
    int counter = 0;

    bool failed() const { return !builtin_ok; }
    const GoalItem& next_goal() const { return goal.back(); }
};

ExecutionState initial_state(const std::vector<Term>& query);

/// chr(S): the store as a constraint multiset, in id order.
std::vector<Term> chr_store(const ExecutionState& state);

/// Ground final-state equivalence: multiset equality of chr(S). Two failed
/// states are equivalent; a failed state never matches a non-failed one.
bool store_equivalent(const ExecutionState& a, const ExecutionState& b);

/// Deterministic rendering of a constraint multiset: sorted, comma-joined.
std::string canonical_store_key(std::vector<Term> constraints);

extern const std::string kFailedClassKey;

}  // namespace chrism
