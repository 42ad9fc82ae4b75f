#include "chrism/state.hpp"

#include <algorithm>

#include "chrism/errors.hpp"

namespace chrism {

const std::string kFailedClassKey = "<failed>";

GoalItem GoalItem::constraint(Term t) {
    GoalItem item;
    item.kind = Kind::Constraint;
    item.term = std::move(t);
    return item;
}

GoalItem GoalItem::builtin(Term t) {
    GoalItem item;
    item.kind = Kind::Builtin;
    item.term = std::move(t);
    return item;
}

GoalItem GoalItem::disjunct(std::shared_ptr<const Disjunction> d, Term selector,
                            Bindings bindings) {
    GoalItem item;
    item.kind = Kind::Disjunction;
    item.term = std::move(selector);
    item.disjunction = std::move(d);
    item.bindings = std::move(bindings);
    return item;
}

ExecutionState initial_state(const std::vector<Term>& query) {
    ExecutionState state;
    state.goal.reserve(query.size());
    for (auto it = query.rbegin(); it != query.rend(); ++it) {
        if (!it->ground())
            throw RuntimeError("non-ground query constraint: " + it->to_string());
        state.goal.push_back(GoalItem::constraint(*it));
    }
    return state;
}

std::vector<Term> chr_store(const ExecutionState& state) {
    std::vector<Term> out;
    out.reserve(state.store.size());
    for (const IdentifiedConstraint& c : state.store) out.push_back(c.constraint);
    return out;
}

bool store_equivalent(const ExecutionState& a, const ExecutionState& b) {
    if (a.failed() || b.failed()) return a.failed() == b.failed();
    std::vector<Term> sa = chr_store(a), sb = chr_store(b);
    if (sa.size() != sb.size()) return false;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return sa == sb;
}

std::string canonical_store_key(std::vector<Term> constraints) {
    std::sort(constraints.begin(), constraints.end());
    std::string key;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        if (i > 0) key += ",";
        key += constraints[i].to_string();
    }
    return key;
}

}  // namespace chrism
