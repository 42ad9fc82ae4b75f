#include "chrism/term.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace chrism {

Term Term::atom(std::string name) {
    Term t;
    t.kind_ = Kind::Atom;
    t.text_ = std::move(name);
    return t;
}

Term Term::integer(std::int64_t v) {
    Term t;
    t.kind_ = Kind::Int;
    t.int_ = v;
    return t;
}

Term Term::real(double v) {
    Term t;
    t.kind_ = Kind::Float;
    t.float_ = v;
    return t;
}

Term Term::var(std::string name) {
    Term t;
    t.kind_ = Kind::Var;
    t.text_ = std::move(name);
    return t;
}

Term Term::compound(std::string functor, std::vector<Term> args) {
    if (args.empty()) return atom(std::move(functor));
    Term t;
    t.kind_ = Kind::Compound;
    t.text_ = std::move(functor);
    t.args_ = std::move(args);
    return t;
}

bool Term::ground() const {
    switch (kind_) {
        case Kind::Var:
            return false;
        case Kind::Compound:
            return std::all_of(args_.begin(), args_.end(),
                               [](const Term& a) { return a.ground(); });
        default:
            return true;
    }
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, ptr);
    // make sure floats never render as bare integers
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
        s += ".0";
    }
    return s;
}

namespace {

bool needs_quotes(const std::string& name) {
    if (name.empty()) return true;
    if (!std::islower(static_cast<unsigned char>(name[0]))) return true;
    return !std::all_of(name.begin(), name.end(), [](unsigned char c) {
        return std::isalnum(c) != 0 || c == '_';
    });
}

void render(const Term& t, std::string& out) {
    switch (t.kind()) {
        case Term::Kind::Atom:
            if (needs_quotes(t.name())) {
                out += '\'';
                out += t.name();
                out += '\'';
            } else {
                out += t.name();
            }
            break;
        case Term::Kind::Int:
            out += std::to_string(t.int_value());
            break;
        case Term::Kind::Float:
            out += format_double(t.float_value());
            break;
        case Term::Kind::Var:
            out += t.name();
            break;
        case Term::Kind::Compound:
            if (t.name() == "," && t.arity() == 2) {
                // pair terms read better in switch names: (yes,no)
                out += '(';
                render(t.args()[0], out);
                out += ',';
                render(t.args()[1], out);
                out += ')';
                break;
            }
            if (needs_quotes(t.name())) {
                out += '\'';
                out += t.name();
                out += '\'';
            } else {
                out += t.name();
            }
            out += '(';
            for (std::size_t i = 0; i < t.arity(); ++i) {
                if (i > 0) out += ',';
                render(t.args()[i], out);
            }
            out += ')';
            break;
    }
}

int kind_rank(Term::Kind k) {
    switch (k) {
        case Term::Kind::Int:
        case Term::Kind::Float:
            return 0;
        case Term::Kind::Var:
            return 1;
        case Term::Kind::Atom:
            return 2;
        case Term::Kind::Compound:
            return 3;
    }
    return 4;
}

double numeric(const Term& t) {
    return t.kind() == Term::Kind::Int ? static_cast<double>(t.int_value())
                                       : t.float_value();
}

}  // namespace

std::string Term::to_string() const {
    std::string out;
    render(*this, out);
    return out;
}

bool Term::operator==(const Term& other) const {
    if (kind_ != other.kind_) return false;
    switch (kind_) {
        case Kind::Atom:
        case Kind::Var:
            return text_ == other.text_;
        case Kind::Int:
            return int_ == other.int_;
        case Kind::Float:
            return float_ == other.float_;
        case Kind::Compound:
            return text_ == other.text_ && args_ == other.args_;
    }
    return false;
}

bool Term::operator<(const Term& other) const {
    int ra = kind_rank(kind_), rb = kind_rank(other.kind_);
    if (ra != rb) return ra < rb;
    switch (kind_) {
        case Kind::Int:
        case Kind::Float: {
            double a = numeric(*this), b = numeric(other);
            if (a != b) return a < b;
            return kind_ == Kind::Int && other.kind_ == Kind::Float;
        }
        case Kind::Atom:
        case Kind::Var:
            return text_ < other.text_;
        case Kind::Compound: {
            if (arity() != other.arity()) return arity() < other.arity();
            if (text_ != other.text_) return text_ < other.text_;
            for (std::size_t i = 0; i < args_.size(); ++i) {
                if (args_[i] < other.args_[i]) return true;
                if (other.args_[i] < args_[i]) return false;
            }
            return false;
        }
    }
    return false;
}

Term substitute(const Term& t, const Bindings& bindings) {
    switch (t.kind()) {
        case Term::Kind::Var: {
            auto it = bindings.find(t.name());
            return it == bindings.end() ? t : it->second;
        }
        case Term::Kind::Compound: {
            std::vector<Term> args;
            args.reserve(t.arity());
            for (const Term& a : t.args()) args.push_back(substitute(a, bindings));
            return Term::compound(t.name(), std::move(args));
        }
        default:
            return t;
    }
}

bool match(const Term& pattern, const Term& ground, Bindings& bindings) {
    switch (pattern.kind()) {
        case Term::Kind::Var: {
            auto [it, inserted] = bindings.emplace(pattern.name(), ground);
            return inserted || it->second == ground;
        }
        case Term::Kind::Compound:
            if (ground.kind() != Term::Kind::Compound) return false;
            if (pattern.name() != ground.name() || pattern.arity() != ground.arity())
                return false;
            for (std::size_t i = 0; i < pattern.arity(); ++i) {
                if (!match(pattern.args()[i], ground.args()[i], bindings)) return false;
            }
            return true;
        default:
            return pattern == ground;
    }
}

void collect_vars(const Term& t, std::vector<std::string>& out) {
    switch (t.kind()) {
        case Term::Kind::Var:
            if (std::find(out.begin(), out.end(), t.name()) == out.end())
                out.push_back(t.name());
            break;
        case Term::Kind::Compound:
            for (const Term& a : t.args()) collect_vars(a, out);
            break;
        default:
            break;
    }
}

}  // namespace chrism
