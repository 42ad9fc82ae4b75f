#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chrism/term.hpp"

namespace chrism {

/// Probability expression attached to a rule or a body disjunction.
struct ProbExpr {
    enum class Kind {
        Const,      // literal in [0,1]
        Eval,       // eval(E), evaluated with head bindings at consideration time
        Experiment  // named experiment; distribution lives in the registry
    };

    Kind kind = Kind::Const;
    double value = 1.0;                // Const
    Term expr = Term::atom("true");    // Eval argument
    Term name = Term::atom("true");    // Experiment name pattern

    static ProbExpr constant(double p);
    static ProbExpr eval(Term e);
    static ProbExpr experiment(Term n);
};

struct BodyItem;

/// Probabilistic disjunction in a rule body. A fixed-distribution disjunction
/// keeps its branch probabilities inline; an experiment-backed one names a
/// switch whose distribution lives in the registry.
struct Disjunction {
    bool fixed = false;
    Term selector = Term::atom("true");  // switch/site name pattern
    std::vector<double> probs;           // fixed only, aligned with branches
    std::vector<std::vector<BodyItem>> branches;
};

struct BodyItem {
    enum class Kind { Constraint, Builtin, Disjunction };

    Kind kind = Kind::Constraint;
    Term term = Term::atom("true");  // Constraint or Builtin goal
    std::shared_ptr<const Disjunction> disjunction;

    static BodyItem constraint(Term t);
    static BodyItem builtin(Term t);
    static BodyItem disjunct(Disjunction d);
};

struct ChanceRule {
    int id = 0;  // 1-based position in the program
    ProbExpr prob;
    std::vector<Term> kept;
    std::vector<Term> removed;
    std::vector<Term> guard;  // conjunction, evaluated left to right
    std::vector<BodyItem> body;

    bool is_propagation() const { return removed.empty(); }
    bool is_simplification() const { return kept.empty(); }
    std::size_t head_count() const { return kept.size() + removed.size(); }
};

/// Pre-registered switch: LPAD disjunction sites, values/2 and set_sw/2
/// directives from the program text.
struct SwitchDecl {
    Term name = Term::atom("true");  // may be a pattern (values/2 declarations)
    std::vector<Term> outcomes;
    std::optional<std::vector<double>> probs;  // nullopt = uniform
    bool learnable = true;
    bool implicit = false;  // derived from a rule, not written by the user
};

struct Program {
    std::vector<ChanceRule> rules;
    std::vector<SwitchDecl> declared_switches;
};

struct Observation {
    enum class Kind { Full, Partial };

    Kind kind = Kind::Full;
    std::vector<Term> query;
    std::vector<Term> answer;
    std::vector<Term> negated;  // Partial only
    long count = 1;

    std::string to_string() const;
};

}  // namespace chrism
