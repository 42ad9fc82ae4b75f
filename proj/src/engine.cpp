#include "chrism/engine.hpp"

#include <algorithm>
#include <random>

#include "chrism/builtins.hpp"
#include "chrism/errors.hpp"

namespace chrism {

std::string TransitionEvent::to_string() const {
    switch (kind) {
        case Kind::Deterministic:
            return site + " p=1";
        case Kind::SwitchDraw:
            return "switch " + switch_name.to_string() + " " + outcome.to_string() +
                   " p=" + format_double(prob);
        case Kind::FixedDraw:
            return "fixed " + site + " " + outcome.to_string() +
                   " p=" + format_double(prob);
    }
    return "";
}

ExecutionStrategy ExecutionStrategy::refined(const Program& program) {
    ExecutionStrategy s;
    for (int i = 1; i <= static_cast<int>(program.rules.size()); ++i)
        s.rule_order.push_back(i);
    return s;
}

namespace {

void push_body(std::vector<GoalItem>& goal, const std::vector<BodyItem>& body,
               const Bindings& bindings) {
    for (auto it = body.rbegin(); it != body.rend(); ++it) {
        switch (it->kind) {
            case BodyItem::Kind::Constraint: {
                Term c = substitute(it->term, bindings);
                if (!c.ground())
                    throw RuntimeError("non-ground body constraint: " +
                                       c.to_string());
                goal.push_back(GoalItem::constraint(std::move(c)));
                break;
            }
            case BodyItem::Kind::Builtin:
                goal.push_back(
                    GoalItem::builtin(substitute(it->term, bindings)));
                break;
            case BodyItem::Kind::Disjunction: {
                Term selector =
                    substitute(it->disjunction->selector, bindings);
                goal.push_back(GoalItem::disjunct(it->disjunction,
                                                  std::move(selector), bindings));
                break;
            }
        }
    }
}

struct InstanceSearch {
    const ExecutionState& state;
    const ChanceRule& rule;
    bool descending;
    std::vector<const Term*> patterns;  // kept then removed
    std::vector<int> chosen_ids;
    std::vector<std::size_t> order;  // store indices in candidate order

    std::optional<MatchedInstance> search(std::size_t pos, Bindings bindings) {
        if (pos == patterns.size()) {
            MatchedInstance inst;
            inst.rule_id = rule.id;
            inst.kept_ids.assign(chosen_ids.begin(),
                                 chosen_ids.begin() + rule.kept.size());
            inst.removed_ids.assign(chosen_ids.begin() + rule.kept.size(),
                                    chosen_ids.end());
            HistoryEntry h{inst.rule_id, inst.kept_ids, inst.removed_ids};
            if (state.history.count(h)) return std::nullopt;

            Bindings guarded = bindings;
            for (const Term& g : rule.guard) {
                if (!eval_goal(g, guarded)) return std::nullopt;
            }
            inst.bindings = std::move(guarded);
            return inst;
        }
        for (std::size_t idx : order) {
            const IdentifiedConstraint& c = state.store[idx];
            if (std::find(chosen_ids.begin(), chosen_ids.end(), c.id) !=
                chosen_ids.end())
                continue;
            Bindings extended = bindings;
            if (!match(*patterns[pos], c.constraint, extended)) continue;
            chosen_ids.push_back(c.id);
            if (auto found = search(pos + 1, std::move(extended))) return found;
            chosen_ids.pop_back();
        }
        return std::nullopt;
    }
};

TransitionEvent switch_event(const Term& name, const SwitchEntry& entry,
                             std::size_t index) {
    TransitionEvent e;
    e.kind = TransitionEvent::Kind::SwitchDraw;
    e.switch_name = name;
    e.outcome = entry.outcomes[index];
    e.outcome_index = index;
    e.prob = entry.probs[index];
    return e;
}

}  // namespace

std::optional<MatchedInstance> find_instance(const ExecutionState& state,
                                             const Program& program,
                                             const ExecutionStrategy& strategy) {
    std::vector<std::size_t> order(state.store.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (strategy.partners_descending) std::reverse(order.begin(), order.end());

    for (int rule_id : strategy.rule_order) {
        const ChanceRule& rule = program.rules.at(rule_id - 1);
        if (rule.head_count() > state.store.size()) continue;
        InstanceSearch search{state, rule, strategy.partners_descending, {}, {}, order};
        for (const Term& h : rule.kept) search.patterns.push_back(&h);
        for (const Term& h : rule.removed) search.patterns.push_back(&h);
        if (auto found = search.search(0, {})) return found;
    }
    return std::nullopt;
}

StepResult designate(const ExecutionState& state, const Program& program,
                     const ExecutionStrategy& strategy, SwitchRegistry& registry) {
    StepResult result;
    if (state.failed()) {
        result.kind = StepResult::Kind::Failed;
        return result;
    }

    if (!state.goal.empty()) {
        const GoalItem& item = state.next_goal();
        switch (item.kind) {
            case GoalItem::Kind::Builtin: {
                Bindings none;
                bool ok = eval_goal(item.term, none);
                result.kind = StepResult::Kind::Deterministic;
                result.next = state;
                result.next.goal.pop_back();
                if (!ok) {
                    result.next.builtin_ok = false;
                    result.event.site = "fail";
                } else {
                    result.event.site = "solve";
                }
                return result;
            }
            case GoalItem::Kind::Constraint: {
                result.kind = StepResult::Kind::Deterministic;
                result.event.site = "introduce";
                result.next = state;
                result.next.goal.pop_back();
                result.next.store.push_back({state.counter, item.term});
                result.next.counter = state.counter + 1;
                return result;
            }
            case GoalItem::Kind::Disjunction: {
                const Disjunction& d = *item.disjunction;
                std::size_t n = d.branches.size();
                std::vector<Term> outcomes;
                for (std::size_t i = 1; i <= n; ++i)
                    outcomes.push_back(Term::integer(static_cast<std::int64_t>(i)));
                const SwitchEntry& entry =
                    registry.lookup_or_default(item.term, outcomes);

                result.kind = StepResult::Kind::Choice;
                for (std::size_t i = 0; i < n; ++i) {
                    Alternative alt;
                    alt.event = switch_event(item.term, entry, i);
                    alt.next = state;
                    alt.next.goal.pop_back();
                    push_body(alt.next.goal, d.branches[i], item.bindings);
                    result.choices.push_back(std::move(alt));
                }
                return result;
            }
        }
    }

    auto instance = find_instance(state, program, strategy);
    if (!instance) {
        result.kind = StepResult::Kind::Final;
        return result;
    }

    const ChanceRule& rule = program.rules.at(instance->rule_id - 1);
    HistoryEntry h{instance->rule_id, instance->kept_ids, instance->removed_ids};

    ExecutionState applied = state;
    applied.history.insert(h);
    applied.store.erase(
        std::remove_if(applied.store.begin(), applied.store.end(),
                       [&](const IdentifiedConstraint& c) {
                           return std::find(instance->removed_ids.begin(),
                                            instance->removed_ids.end(),
                                            c.id) != instance->removed_ids.end();
                       }),
        applied.store.end());
    push_body(applied.goal, rule.body, instance->bindings);

    ExecutionState skipped = state;
    skipped.history.insert(h);

    result.kind = StepResult::Kind::Choice;
    std::string site = "rule " + std::to_string(rule.id);

    auto fixed_pair = [&](double p) {
        TransitionEvent apply_event;
        apply_event.kind = TransitionEvent::Kind::FixedDraw;
        apply_event.site = site;
        apply_event.outcome = Term::atom("apply");
        apply_event.outcome_index = 0;
        apply_event.prob = p;
        TransitionEvent skip_event = apply_event;
        skip_event.outcome = Term::atom("skip");
        skip_event.outcome_index = 1;
        skip_event.prob = 1.0 - p;
        result.choices.push_back({std::move(apply_event), std::move(applied)});
        result.choices.push_back({std::move(skip_event), std::move(skipped)});
    };

    switch (rule.prob.kind) {
        case ProbExpr::Kind::Const:
            fixed_pair(rule.prob.value);
            break;
        case ProbExpr::Kind::Eval: {
            Term expr = substitute(rule.prob.expr, instance->bindings);
            double p = eval_number(expr);
            if (p < 0.0 || p > 1.0)
                throw RuntimeError("eval probability " + format_double(p) +
                                   " outside [0,1] in rule " +
                                   std::to_string(rule.id));
            fixed_pair(p);
            break;
        }
        case ProbExpr::Kind::Experiment: {
            Term name = substitute(rule.prob.name, instance->bindings);
            const SwitchEntry& entry = registry.lookup_or_default(
                name, {Term::atom("apply"), Term::atom("skip")});
            result.choices.push_back({switch_event(name, entry, 0), std::move(applied)});
            result.choices.push_back({switch_event(name, entry, 1), std::move(skipped)});
            break;
        }
    }
    return result;
}

SampleResult run_sample(const Program& program, const std::vector<Term>& query,
                        const ExecutionStrategy& strategy, SwitchRegistry& registry,
                        std::uint64_t seed, const EngineLimits& limits) {
    // consecutive raw seeds produce correlated early mt19937_64 output, which
    // biases per-seed sampling runs; spread them through a seed sequence
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    ExecutionState state = initial_state(query);
    SampleResult result;
    long steps = 0;
    for (;;) {
        if (++steps > limits.max_depth)
            throw LimitExceeded("transition limit " +
                                std::to_string(limits.max_depth) +
                                " exceeded (suspected nontermination)");
        StepResult step = designate(state, program, strategy, registry);
        switch (step.kind) {
            case StepResult::Kind::Final:
                result.final_store = chr_store(state);
                return result;
            case StepResult::Kind::Failed:
                result.failed = true;
                return result;
            case StepResult::Kind::Deterministic:
                result.trace.push_back(step.event);
                state = std::move(step.next);
                break;
            case StepResult::Kind::Choice: {
                double u = unit(rng);
                std::size_t pick = step.choices.size() - 1;
                double acc = 0.0;
                for (std::size_t i = 0; i < step.choices.size(); ++i) {
                    acc += step.choices[i].event.prob;
                    if (u < acc) {
                        pick = i;
                        break;
                    }
                }
                result.trace.push_back(step.choices[pick].event);
                state = std::move(step.choices[pick].next);
                break;
            }
        }
    }
}

}  // namespace chrism
