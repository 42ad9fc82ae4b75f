#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chrism/term.hpp"

namespace chrism {

/// Reads a source text as a sequence of period-terminated terms using a fixed
/// Prolog-style operator table. Lists render as "$list"(E1,...,En) terms.
///
/// Operator table (priority, type):
///   1190 xfx times            1180 xfx <=> ==> <==> ===>
///   1150 xfx/fy ??            1120 xfx \
///   1100 xfy ; |              1050 xfy ->
///    999 fy cond               900 fy ~
///    700 xfx < > =< >= =:= =\= == \== = is
///    500 yfx + -               400 yfx * / // mod
///    200 xfx :                 200 fy - (sign)
class TermReader {
public:
    explicit TermReader(std::string_view text);

    /// Next full term, or nullopt at end of input. Throws ParseError.
    std::optional<Term> next();

    int line() const { return line_; }

private:
    struct Token {
        enum class Kind { Atom, Var, Int, Float, Punct, End, Eof };
        Kind kind = Kind::Eof;
        std::string text;
        std::int64_t int_value = 0;
        double float_value = 0.0;
        int line = 0;
        int column = 0;
        bool followed_by_open = false;  // '(' immediately after, no space
    };

    Token lex();
    void advance();
    [[noreturn]] void fail(const std::string& message) const;

    Term parse(int max_priority);
    Term parse_primary(int max_priority);
    Term parse_compound_args(std::string functor);
    Term parse_list();

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

}  // namespace chrism
