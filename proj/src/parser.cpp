#include "chrism/parser.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "chrism/errors.hpp"
#include "chrism/reader.hpp"

namespace chrism {

namespace {

constexpr double kSumTolerance = 1e-9;

bool has_functor(const Term& t, const char* f, std::size_t arity) {
    return t.is_compound() && t.name() == f && t.arity() == arity;
}

void flatten(const Term& t, const char* op, std::vector<Term>& out) {
    if (has_functor(t, op, 2)) {
        flatten(t.args()[0], op, out);
        flatten(t.args()[1], op, out);
    } else {
        out.push_back(t);
    }
}

std::vector<Term> flatten(const Term& t, const char* op) {
    std::vector<Term> out;
    flatten(t, op, out);
    return out;
}

const std::set<std::string>& comparison_functors() {
    static const std::set<std::string> fs = {"<",  ">",  "=<",  ">=", "=:=",
                                             "=\\=", "==", "\\==", "=",  "is"};
    return fs;
}

bool is_ite(const Term& t) {
    return has_functor(t, ";", 2) && has_functor(t.args()[0], "->", 2);
}

double number_value(const Term& t) {
    return t.kind() == Term::Kind::Int ? static_cast<double>(t.int_value())
                                       : t.float_value();
}

ProbExpr prob_expr_from(const Term& t) {
    if (t.is_number()) {
        double p = number_value(t);
        if (p < 0.0 || p > 1.0)
            throw ParseError("rule probability " + t.to_string() +
                             " outside [0,1]");
        return ProbExpr::constant(p);
    }
    if (has_functor(t, "eval", 1)) return ProbExpr::eval(t.args()[0]);
    if (t.is_callable() || t.is_var()) return ProbExpr::experiment(t);
    throw ParseError("invalid probability expression: " + t.to_string());
}

struct RuleBuilder {
    int rule_id;
    bool anonymous_prob = false;
    int site_counter = 0;
    std::vector<SwitchDecl>* switches;

    Term fresh_site() {
        ++site_counter;
        std::string name = "rule_" + std::to_string(rule_id);
        if (site_counter > 1 || anonymous_prob)
            name += "_d" + std::to_string(site_counter);
        return Term::atom(name);
    }

    std::vector<BodyItem> parse_body(const Term& t);
    BodyItem parse_disjunction(Term selector, const Term& branches_term,
                               const std::vector<double>* fixed_probs);
};

std::vector<BodyItem> RuleBuilder::parse_body(const Term& t) {
    std::vector<BodyItem> items;
    for (const Term& item : flatten(t, ",")) {
        if (has_functor(item, "??", 2)) {
            items.push_back(parse_disjunction(item.args()[0], item.args()[1], nullptr));
            continue;
        }
        if (has_functor(item, "??", 1)) {
            items.push_back(parse_disjunction(fresh_site(), item.args()[0], nullptr));
            continue;
        }
        if (has_functor(item, ";", 2) && !is_ite(item)) {
            // LPAD-style: every disjunct carries a :P label
            std::vector<Term> disjuncts = flatten(item, ";");
            std::vector<double> probs;
            std::vector<Term> bodies;
            double sum = 0.0;
            for (const Term& d : disjuncts) {
                if (!has_functor(d, ":", 2) || !d.args()[1].is_number())
                    throw ParseError(
                        "disjunct without probability label (or missing ?? "
                        "selector): " + d.to_string());
                double p = number_value(d.args()[1]);
                if (p < 0.0 || p > 1.0)
                    throw ParseError("disjunct probability " +
                                     d.args()[1].to_string() + " outside [0,1]");
                probs.push_back(p);
                bodies.push_back(d.args()[0]);
                sum += p;
            }
            if (std::abs(sum - 1.0) > kSumTolerance)
                throw ParseError("disjunction probabilities sum to " +
                                 format_double(sum) + ", expected 1");
            Term semicolons = bodies.back();
            for (std::size_t i = bodies.size() - 1; i-- > 0;)
                semicolons = Term::compound(";", {bodies[i], semicolons});
            items.push_back(parse_disjunction(fresh_site(), semicolons, &probs));
            continue;
        }
        if (is_builtin_goal(item)) {
            items.push_back(BodyItem::builtin(item));
            continue;
        }
        if (item.is_callable()) {
            items.push_back(BodyItem::constraint(item));
            continue;
        }
        throw ParseError("invalid body item: " + item.to_string());
    }
    return items;
}

BodyItem RuleBuilder::parse_disjunction(Term selector, const Term& branches_term,
                                        const std::vector<double>* fixed_probs) {
    Disjunction d;
    d.selector = std::move(selector);
    if (fixed_probs) {
        d.fixed = true;
        d.probs = *fixed_probs;
    }
    for (const Term& b : flatten(branches_term, ";")) d.branches.push_back(parse_body(b));
    if (d.branches.size() < 2)
        throw ParseError("disjunction needs at least two branches");

    std::size_t n = d.branches.size();
    SwitchDecl decl;
    decl.name = d.selector;
    for (std::size_t i = 1; i <= n; ++i)
        decl.outcomes.push_back(Term::integer(static_cast<std::int64_t>(i)));
    decl.implicit = true;
    if (d.fixed) {
        decl.probs = d.probs;
        decl.learnable = false;
        switches->push_back(std::move(decl));
    } else if (d.selector.ground()) {
        switches->push_back(std::move(decl));
    }
    return BodyItem::disjunct(std::move(d));
}

void collect_body_vars(const std::vector<BodyItem>& body,
                       std::vector<std::string>& out) {
    for (const BodyItem& item : body) {
        switch (item.kind) {
            case BodyItem::Kind::Constraint:
            case BodyItem::Kind::Builtin:
                collect_vars(item.term, out);
                break;
            case BodyItem::Kind::Disjunction:
                collect_vars(item.disjunction->selector, out);
                for (const auto& b : item.disjunction->branches)
                    collect_body_vars(b, out);
                break;
        }
    }
}

/// Head vars plus guard-equality bindings must cover guard tests, the
/// probability expression, and the body.
void check_variable_scoping(const ChanceRule& rule) {
    std::vector<std::string> known;
    for (const Term& h : rule.kept) collect_vars(h, known);
    for (const Term& h : rule.removed) collect_vars(h, known);

    auto is_known = [&](const std::string& v) {
        return std::find(known.begin(), known.end(), v) != known.end();
    };
    auto require_known = [&](const Term& t, const char* where) {
        std::vector<std::string> used;
        collect_vars(t, used);
        for (const auto& v : used) {
            if (!is_known(v))
                throw ParseError("variable " + v + " in rule " +
                                 std::to_string(rule.id) + " " + where +
                                 " does not appear in the heads");
        }
    };
    auto add_bound = [&](const std::string& v) {
        if (!is_known(v)) known.push_back(v);
    };

    for (const Term& g : rule.guard) {
        if ((has_functor(g, "=", 2) || has_functor(g, "is", 2)) &&
            g.args()[0].is_var()) {
            require_known(g.args()[1], "guard");
            add_bound(g.args()[0].name());
        } else if (is_ite(g)) {
            require_known(g.args()[0].args()[0], "guard");
            for (const Term* branch : {&g.args()[0].args()[1], &g.args()[1]}) {
                if (has_functor(*branch, "=", 2) && branch->args()[0].is_var())
                    add_bound(branch->args()[0].name());
            }
        } else {
            require_known(g, "guard");
        }
    }

    if (rule.prob.kind == ProbExpr::Kind::Eval)
        require_known(rule.prob.expr, "probability expression");
    if (rule.prob.kind == ProbExpr::Kind::Experiment)
        require_known(rule.prob.name, "probability expression");

    std::vector<std::string> body_vars;
    collect_body_vars(rule.body, body_vars);
    for (const auto& v : body_vars) {
        if (!is_known(v))
            throw ParseError("variable " + v + " in rule " +
                             std::to_string(rule.id) +
                             " body does not appear in the heads");
    }
}

ChanceRule rule_from_term(const Term& t, int rule_id,
                          std::vector<SwitchDecl>& switches) {
    bool propagation;
    if (has_functor(t, "<=>", 2)) {
        propagation = false;
    } else if (has_functor(t, "==>", 2)) {
        propagation = true;
    } else {
        throw ParseError("expected a rule, got: " + t.to_string());
    }

    ChanceRule rule;
    rule.id = rule_id;

    Term lhs = t.args()[0];
    RuleBuilder builder{rule_id, false, 0, &switches};
    if (has_functor(lhs, "??", 2)) {
        rule.prob = prob_expr_from(lhs.args()[0]);
        lhs = lhs.args()[1];
    } else if (has_functor(lhs, "??", 1)) {
        builder.anonymous_prob = true;
        Term name = Term::atom("rule_" + std::to_string(rule_id));
        rule.prob = ProbExpr::experiment(name);
        SwitchDecl decl;
        decl.name = name;
        decl.outcomes = {Term::atom("apply"), Term::atom("skip")};
        decl.implicit = true;
        switches.push_back(std::move(decl));
        lhs = lhs.args()[0];
    } else {
        rule.prob = ProbExpr::constant(1.0);
    }

    if (has_functor(lhs, "\\", 2)) {
        if (propagation)
            throw ParseError("'\\' heads are only valid in a <=> rule");
        rule.kept = flatten(lhs.args()[0], ",");
        rule.removed = flatten(lhs.args()[1], ",");
    } else if (propagation) {
        rule.kept = flatten(lhs, ",");
    } else {
        rule.removed = flatten(lhs, ",");
    }
    for (const auto* heads : {&rule.kept, &rule.removed}) {
        for (const Term& h : *heads) {
            if (!h.is_callable())
                throw ParseError("invalid head constraint: " + h.to_string());
        }
    }
    if (rule.head_count() == 0) throw ParseError("rule has no head constraints");

    Term rhs = t.args()[1];
    if (has_functor(rhs, "|", 2)) {
        rule.guard = flatten(rhs.args()[0], ",");
        rhs = rhs.args()[1];
    }
    rule.body = builder.parse_body(rhs);

    // a ground rule-level experiment gets its registry entry up front
    if (rule.prob.kind == ProbExpr::Kind::Experiment && rule.prob.name.ground() &&
        !builder.anonymous_prob) {
        SwitchDecl decl;
        decl.name = rule.prob.name;
        decl.outcomes = {Term::atom("apply"), Term::atom("skip")};
        decl.implicit = true;
        switches.push_back(std::move(decl));
    }

    rule = desugar_cond(rule);
    check_variable_scoping(rule);
    return rule;
}

std::vector<double> number_list(const Term& t, const char* what) {
    if (!(t.is_atom() && t.name() == "$list") &&
        !(t.is_compound() && t.name() == "$list"))
        throw ParseError(std::string("expected a list in ") + what);
    std::vector<double> out;
    for (const Term& e : t.args()) {
        if (!e.is_number())
            throw ParseError(std::string("expected a number in ") + what);
        out.push_back(number_value(e));
    }
    return out;
}

Observation observation_from_term(Term t) {
    Observation obs;
    if (has_functor(t, "times", 2)) {
        if (t.args()[0].kind() != Term::Kind::Int || t.args()[0].int_value() <= 0)
            throw ParseError("observation count must be a positive integer");
        obs.count = static_cast<long>(t.args()[0].int_value());
        t = t.args()[1];
    } else if (has_functor(t, "count", 2)) {
        if (t.args()[1].kind() != Term::Kind::Int || t.args()[1].int_value() <= 0)
            throw ParseError("observation count must be a positive integer");
        obs.count = static_cast<long>(t.args()[1].int_value());
        t = t.args()[0];
    }

    if (has_functor(t, "<==>", 2)) {
        obs.kind = Observation::Kind::Full;
    } else if (has_functor(t, "===>", 2)) {
        obs.kind = Observation::Kind::Partial;
    } else {
        throw ParseError("expected 'Q <==> A' or 'Q ===> A', got: " + t.to_string());
    }

    obs.query = flatten(t.args()[0], ",");
    for (const Term& a : flatten(t.args()[1], ",")) {
        if (has_functor(a, "~", 1)) {
            if (obs.kind == Observation::Kind::Full)
                throw ParseError("negated constraint in a full observation: " +
                                 a.to_string());
            obs.negated.push_back(a.args()[0]);
        } else {
            obs.answer.push_back(a);
        }
    }

    auto check = [](const std::vector<Term>& ts, const char* side) {
        for (const Term& c : ts) {
            if (!c.is_callable())
                throw ParseError(std::string("invalid constraint in observation ") +
                                 side + ": " + c.to_string());
            if (!c.ground())
                throw ParseError(std::string("non-ground constraint in observation ") +
                                 side + ": " + c.to_string());
        }
    };
    check(obs.query, "query");
    check(obs.answer, "answer");
    check(obs.negated, "answer");
    return obs;
}

}  // namespace

ProbExpr ProbExpr::constant(double p) {
    ProbExpr e;
    e.kind = Kind::Const;
    e.value = p;
    return e;
}

ProbExpr ProbExpr::eval(Term expr) {
    ProbExpr e;
    e.kind = Kind::Eval;
    e.expr = std::move(expr);
    return e;
}

ProbExpr ProbExpr::experiment(Term name) {
    ProbExpr e;
    e.kind = Kind::Experiment;
    e.name = std::move(name);
    return e;
}

BodyItem BodyItem::constraint(Term t) {
    BodyItem item;
    item.kind = Kind::Constraint;
    item.term = std::move(t);
    return item;
}

BodyItem BodyItem::builtin(Term t) {
    BodyItem item;
    item.kind = Kind::Builtin;
    item.term = std::move(t);
    return item;
}

BodyItem BodyItem::disjunct(Disjunction d) {
    BodyItem item;
    item.kind = Kind::Disjunction;
    item.disjunction = std::make_shared<Disjunction>(std::move(d));
    return item;
}

bool is_builtin_goal(const Term& t) {
    if (t.is_atom()) return t.name() == "true" || t.name() == "fail";
    if (t.is_compound() && t.arity() == 2 &&
        comparison_functors().count(t.name()))
        return true;
    return is_ite(t);
}

Program parse_program(std::string_view text) {
    Program program;
    TermReader reader(text);
    while (auto t = reader.next()) {
        if (has_functor(*t, "values", 2)) {
            SwitchDecl decl;
            decl.name = t->args()[0];
            const Term& list = t->args()[1];
            if (!(list.name() == "$list"))
                throw ParseError("values/2 expects a list of outcomes");
            decl.outcomes.assign(list.args().begin(), list.args().end());
            if (decl.outcomes.empty())
                throw ParseError("values/2 outcome list is empty");
            program.declared_switches.push_back(std::move(decl));
            continue;
        }
        if (has_functor(*t, "set_sw", 2)) {
            SwitchDecl decl;
            decl.name = t->args()[0];
            if (!decl.name.ground())
                throw ParseError("set_sw/2 switch name must be ground");
            decl.probs = number_list(t->args()[1], "set_sw/2");
            for (std::size_t i = 1; i <= decl.probs->size(); ++i)
                decl.outcomes.push_back(Term::integer(static_cast<std::int64_t>(i)));
            program.declared_switches.push_back(std::move(decl));
            continue;
        }
        int id = static_cast<int>(program.rules.size()) + 1;
        program.rules.push_back(rule_from_term(*t, id, program.declared_switches));
    }
    return program;
}

std::vector<Term> parse_query(std::string_view text) {
    std::string trimmed(text);
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
        trimmed.pop_back();
    if (trimmed.empty()) return {};
    if (trimmed.back() != '.') trimmed += " .";

    TermReader reader(trimmed);
    auto t = reader.next();
    if (!t) return {};
    if (reader.next()) throw ParseError("expected a single query term");

    std::vector<Term> query = flatten(*t, ",");
    for (const Term& c : query) {
        if (!c.is_callable())
            throw ParseError("invalid query constraint: " + c.to_string());
        if (!c.ground())
            throw ParseError("non-ground query constraint: " + c.to_string());
    }
    return query;
}

Observation parse_observation(std::string_view text) {
    std::string trimmed(text);
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
        trimmed.pop_back();
    if (trimmed.empty()) throw ParseError("empty observation");
    if (trimmed.back() != '.') trimmed += " .";

    TermReader reader(trimmed);
    auto t = reader.next();
    if (!t) throw ParseError("empty observation");
    if (reader.next()) throw ParseError("expected a single observation");
    return observation_from_term(*t);
}

std::vector<Observation> parse_observations(std::string_view text) {
    std::vector<Observation> out;
    TermReader reader(text);
    while (auto t = reader.next()) out.push_back(observation_from_term(*t));
    return out;
}

namespace {

struct CondDesugarer {
    const ChanceRule& rule;
    std::vector<std::string> taken;
    int counter = 0;
    std::vector<Term> extra_guard;

    explicit CondDesugarer(const ChanceRule& r) : rule(r) {
        for (const Term& h : r.kept) collect_vars(h, taken);
        for (const Term& h : r.removed) collect_vars(h, taken);
        for (const Term& g : r.guard) collect_vars(g, taken);
        std::vector<std::string> body_vars;
        collect_body_vars(r.body, body_vars);
        for (auto& v : body_vars)
            if (std::find(taken.begin(), taken.end(), v) == taken.end())
                taken.push_back(v);
    }

    std::string fresh_var() {
        for (;;) {
            std::string name = "Cond" + std::to_string(++counter);
            if (std::find(taken.begin(), taken.end(), name) == taken.end()) {
                taken.push_back(name);
                return name;
            }
        }
    }

    Term rewrite_name(const Term& name) {
        if (!name.is_compound()) return name;
        std::vector<Term> args;
        for (const Term& a : name.args()) {
            if (has_functor(a, "cond", 1)) {
                Term var = Term::var(fresh_var());
                // (C -> X = yes ; X = no), left to right
                Term then_goal = Term::compound("=", {var, Term::atom("yes")});
                Term else_goal = Term::compound("=", {var, Term::atom("no")});
                extra_guard.push_back(Term::compound(
                    ";", {Term::compound("->", {a.args()[0], then_goal}),
                          else_goal}));
                args.push_back(var);
            } else {
                args.push_back(a);
            }
        }
        return Term::compound(name.name(), std::move(args));
    }

    std::vector<BodyItem> rewrite_body(const std::vector<BodyItem>& body) {
        std::vector<BodyItem> out;
        for (const BodyItem& item : body) {
            if (item.kind != BodyItem::Kind::Disjunction) {
                out.push_back(item);
                continue;
            }
            Disjunction d;
            d.fixed = item.disjunction->fixed;
            d.probs = item.disjunction->probs;
            d.selector = rewrite_name(item.disjunction->selector);
            for (const auto& b : item.disjunction->branches)
                d.branches.push_back(rewrite_body(b));
            out.push_back(BodyItem::disjunct(std::move(d)));
        }
        return out;
    }
};

}  // namespace

ChanceRule desugar_cond(const ChanceRule& rule) {
    CondDesugarer d(rule);
    ChanceRule out = rule;
    if (out.prob.kind == ProbExpr::Kind::Experiment)
        out.prob.name = d.rewrite_name(out.prob.name);
    out.body = d.rewrite_body(out.body);
    out.guard.insert(out.guard.end(), d.extra_guard.begin(), d.extra_guard.end());
    return out;
}

namespace {

const std::set<std::string>& renderable_infix() {
    static const std::set<std::string> ops = {
        "times", "<=>", "==>", "<==>", "===>", "??", "\\", ";",  "|",
        "->",    ",",   "<",   ">",    "=<",   ">=", "=:=", "=\\=",
        "==",    "\\==", "=",  "is",   "+",    "-",  "*",   "/",
        "//",    "mod", ":"};
    return ops;
}

}  // namespace

std::string goal_to_source(const Term& goal) {
    if (goal.is_compound() && goal.arity() == 2 &&
        renderable_infix().count(goal.name())) {
        return "(" + goal_to_source(goal.args()[0]) + " " + goal.name() + " " +
               goal_to_source(goal.args()[1]) + ")";
    }
    if (has_functor(goal, "~", 1)) return "~" + goal_to_source(goal.args()[0]);
    if (goal.is_compound() && goal.arity() == 1 &&
        (goal.name() == "cond" || goal.name() == "-" || goal.name() == "??")) {
        return "(" + goal.name() + " " + goal_to_source(goal.args()[0]) + ")";
    }
    return goal.to_string();
}

namespace {

std::string body_to_source(const std::vector<BodyItem>& body);

std::string branch_to_source(const std::vector<BodyItem>& branch) {
    std::string s = body_to_source(branch);
    if (branch.size() != 1) return "(" + s + ")";
    return branch[0].kind == BodyItem::Kind::Disjunction ? "(" + s + ")" : s;
}

std::string item_to_source(const BodyItem& item) {
    switch (item.kind) {
        case BodyItem::Kind::Constraint:
            return item.term.to_string();
        case BodyItem::Kind::Builtin:
            return goal_to_source(item.term);
        case BodyItem::Kind::Disjunction: {
            const Disjunction& d = *item.disjunction;
            std::string s = "(";
            if (!d.fixed) s += d.selector.to_string() + " ?? ";
            for (std::size_t i = 0; i < d.branches.size(); ++i) {
                if (i > 0) s += " ; ";
                s += branch_to_source(d.branches[i]);
                if (d.fixed) s += ":" + format_double(d.probs[i]);
            }
            return s + ")";
        }
    }
    return "true";
}

std::string body_to_source(const std::vector<BodyItem>& body) {
    if (body.empty()) return "true";
    std::string s;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (i > 0) s += ", ";
        s += item_to_source(body[i]);
    }
    return s;
}

}  // namespace

std::string constraints_to_source(const std::vector<Term>& constraints) {
    std::string s;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        if (i > 0) s += ",";
        s += constraints[i].to_string();
    }
    return s;
}

std::string rule_to_source(const ChanceRule& rule) {
    std::string s;
    switch (rule.prob.kind) {
        case ProbExpr::Kind::Const:
            if (rule.prob.value != 1.0) s += format_double(rule.prob.value) + " ?? ";
            break;
        case ProbExpr::Kind::Eval:
            s += "eval(" + goal_to_source(rule.prob.expr) + ") ?? ";
            break;
        case ProbExpr::Kind::Experiment:
            s += rule.prob.name.to_string() + " ?? ";
            break;
    }
    if (!rule.kept.empty() && !rule.removed.empty()) {
        s += constraints_to_source(rule.kept) + " \\ " +
             constraints_to_source(rule.removed) + " <=> ";
    } else if (rule.removed.empty()) {
        s += constraints_to_source(rule.kept) + " ==> ";
    } else {
        s += constraints_to_source(rule.removed) + " <=> ";
    }
    if (!rule.guard.empty()) {
        for (std::size_t i = 0; i < rule.guard.size(); ++i) {
            if (i > 0) s += ", ";
            s += goal_to_source(rule.guard[i]);
        }
        s += " | ";
    }
    s += body_to_source(rule.body);
    return s + ".";
}

std::string program_to_source(const Program& program) {
    std::string s;
    for (const SwitchDecl& decl : program.declared_switches) {
        if (decl.implicit) continue;
        if (decl.probs && decl.outcomes.size() == decl.probs->size() &&
            !decl.outcomes.empty() && decl.outcomes[0] == Term::integer(1)) {
            s += "set_sw(" + decl.name.to_string() + ", [";
            for (std::size_t i = 0; i < decl.probs->size(); ++i) {
                if (i > 0) s += ",";
                s += format_double((*decl.probs)[i]);
            }
            s += "]).\n";
        } else {
            s += "values(" + decl.name.to_string() + ", [";
            for (std::size_t i = 0; i < decl.outcomes.size(); ++i) {
                if (i > 0) s += ",";
                s += decl.outcomes[i].to_string();
            }
            s += "]).\n";
        }
    }
    for (const ChanceRule& rule : program.rules) s += rule_to_source(rule) + "\n";
    return s;
}

std::string Observation::to_string() const {
    std::string s;
    if (count != 1) s += std::to_string(count) + " times ";
    s += constraints_to_source(query);
    s += kind == Kind::Full ? " <==> " : " ===> ";
    std::string rhs = constraints_to_source(answer);
    for (const Term& n : negated) {
        if (!rhs.empty()) rhs += ",";
        rhs += "~" + n.to_string();
    }
    return s + rhs;
}

}  // namespace chrism
