#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chrism {

/// Ground-or-pattern first-order term. Variables only appear inside rule
/// heads/guards/bodies; queries and observations are ground.
class Term {
public:
    enum class Kind { Atom, Int, Float, Var, Compound };

    static Term atom(std::string name);
    static Term integer(std::int64_t v);
    static Term real(double v);
    static Term var(std::string name);
    static Term compound(std::string functor, std::vector<Term> args);

    Kind kind() const { return kind_; }
    const std::string& name() const { return text_; }  // Atom/Var/Compound functor
    std::int64_t int_value() const { return int_; }
    double float_value() const { return float_; }
    const std::vector<Term>& args() const { return args_; }
    std::size_t arity() const { return args_.size(); }

    bool is_atom() const { return kind_ == Kind::Atom; }
    bool is_number() const { return kind_ == Kind::Int || kind_ == Kind::Float; }
    bool is_var() const { return kind_ == Kind::Var; }
    bool is_compound() const { return kind_ == Kind::Compound; }
    bool is_callable() const { return kind_ == Kind::Atom || kind_ == Kind::Compound; }

    /// Functor name for atoms and compounds, empty otherwise.
    const std::string& functor() const { return text_; }

    bool ground() const;

    /// Canonical text rendering; equal terms render identically.
    std::string to_string() const;

    bool operator==(const Term& other) const;
    bool operator!=(const Term& other) const { return !(*this == other); }
    /// Total order (kind, then content); used for canonical multiset keys.
    bool operator<(const Term& other) const;

private:
    Kind kind_ = Kind::Atom;
    std::string text_;
    std::int64_t int_ = 0;
    double float_ = 0.0;
    std::vector<Term> args_;
};

using Bindings = std::map<std::string, Term>;

/// Applies bindings to all variables in t; unbound variables stay as-is.
Term substitute(const Term& t, const Bindings& bindings);

/// One-way matching of a pattern against a ground term, extending bindings.
/// Returns false (bindings unspecified) on mismatch.
bool match(const Term& pattern, const Term& ground, Bindings& bindings);

/// Collects variable names occurring in t, in first-occurrence order.
void collect_vars(const Term& t, std::vector<std::string>& out);

std::string format_double(double v);

}  // namespace chrism
