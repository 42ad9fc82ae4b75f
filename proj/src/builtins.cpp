#include "chrism/builtins.hpp"

#include <cmath>
#include <cstdint>

#include "chrism/errors.hpp"

namespace chrism {

namespace {

double as_double(const Term& t) {
    return t.kind() == Term::Kind::Int ? static_cast<double>(t.int_value())
                                       : t.float_value();
}

bool both_ints(const Term& a, const Term& b) {
    return a.kind() == Term::Kind::Int && b.kind() == Term::Kind::Int;
}

std::int64_t require_int(const Term& t, const char* op) {
    if (t.kind() != Term::Kind::Int)
        throw RuntimeError(std::string("'") + op + "' expects integers, got " +
                           t.to_string());
    return t.int_value();
}

}  // namespace

Term eval_arith(const Term& expr) {
    switch (expr.kind()) {
        case Term::Kind::Int:
        case Term::Kind::Float:
            return expr;
        case Term::Kind::Var:
            throw RuntimeError("instantiation error: unbound variable " +
                               expr.name() + " in arithmetic expression");
        case Term::Kind::Atom:
            throw RuntimeError("non-numeric term in arithmetic expression: " +
                               expr.to_string());
        case Term::Kind::Compound:
            break;
    }

    const std::string& f = expr.name();
    if (expr.arity() == 1 && f == "-") {
        Term a = eval_arith(expr.args()[0]);
        return a.kind() == Term::Kind::Int ? Term::integer(-a.int_value())
                                           : Term::real(-a.float_value());
    }
    if (expr.arity() == 2) {
        Term a = eval_arith(expr.args()[0]);
        Term b = eval_arith(expr.args()[1]);
        if (f == "+") {
            return both_ints(a, b) ? Term::integer(a.int_value() + b.int_value())
                                   : Term::real(as_double(a) + as_double(b));
        }
        if (f == "-") {
            return both_ints(a, b) ? Term::integer(a.int_value() - b.int_value())
                                   : Term::real(as_double(a) - as_double(b));
        }
        if (f == "*") {
            return both_ints(a, b) ? Term::integer(a.int_value() * b.int_value())
                                   : Term::real(as_double(a) * as_double(b));
        }
        if (f == "/") {
            double d = as_double(b);
            if (d == 0.0) throw RuntimeError("division by zero");
            return Term::real(as_double(a) / d);
        }
        if (f == "//") {
            std::int64_t ia = require_int(a, "//"), ib = require_int(b, "//");
            if (ib == 0) throw RuntimeError("division by zero");
            std::int64_t q = ia / ib;
            if ((ia % ib != 0) && ((ia < 0) != (ib < 0))) --q;  // floor
            return Term::integer(q);
        }
        if (f == "mod") {
            std::int64_t ia = require_int(a, "mod"), ib = require_int(b, "mod");
            if (ib == 0) throw RuntimeError("division by zero");
            std::int64_t m = ia % ib;
            if (m != 0 && ((m < 0) != (ib < 0))) m += ib;
            return Term::integer(m);
        }
    }
    throw RuntimeError("unknown arithmetic operator: " + expr.to_string());
}

double eval_number(const Term& expr) { return as_double(eval_arith(expr)); }

bool eval_goal(const Term& goal, Bindings& bindings) {
    if (goal.is_atom()) {
        if (goal.name() == "true") return true;
        if (goal.name() == "fail" || goal.name() == "false") return false;
        throw RuntimeError("unknown builtin goal: " + goal.to_string());
    }
    if (goal.is_var())
        throw RuntimeError("instantiation error: unbound goal variable " +
                           goal.name());
    if (!goal.is_compound())
        throw RuntimeError("invalid builtin goal: " + goal.to_string());

    const std::string& f = goal.name();
    if (f == "," && goal.arity() == 2) {
        return eval_goal(goal.args()[0], bindings) &&
               eval_goal(goal.args()[1], bindings);
    }
    if (f == ";" && goal.arity() == 2 && goal.args()[0].is_compound() &&
        goal.args()[0].name() == "->" && goal.args()[0].arity() == 2) {
        Bindings attempt = bindings;
        if (eval_goal(goal.args()[0].args()[0], attempt)) {
            bindings = std::move(attempt);
            return eval_goal(goal.args()[0].args()[1], bindings);
        }
        return eval_goal(goal.args()[1], bindings);
    }
    if (goal.arity() != 2)
        throw RuntimeError("unknown builtin goal: " + goal.to_string());

    Term lhs = substitute(goal.args()[0], bindings);
    Term rhs = substitute(goal.args()[1], bindings);

    if (f == "=") {
        if (lhs.is_var()) {
            if (!rhs.ground())
                throw RuntimeError("instantiation error in =: " + rhs.to_string());
            bindings[lhs.name()] = rhs;
            return true;
        }
        if (rhs.is_var()) {
            if (!lhs.ground())
                throw RuntimeError("instantiation error in =: " + lhs.to_string());
            bindings[rhs.name()] = lhs;
            return true;
        }
        return lhs == rhs;
    }
    if (f == "is") {
        Term value = eval_arith(rhs);
        if (lhs.is_var()) {
            bindings[lhs.name()] = value;
            return true;
        }
        if (!lhs.is_number())
            throw RuntimeError("'is' expects a number or variable on the left");
        return as_double(lhs) == as_double(value);
    }
    if (f == "==") return lhs == rhs;
    if (f == "\\==") return lhs != rhs;

    double a = eval_number(lhs);
    double b = eval_number(rhs);
    if (f == "<") return a < b;
    if (f == ">") return a > b;
    if (f == "=<") return a <= b;
    if (f == ">=") return a >= b;
    if (f == "=:=") return a == b;
    if (f == "=\\=") return a != b;
    throw RuntimeError("unknown builtin goal: " + goal.to_string());
}

}  // namespace chrism
