#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chrism/ast.hpp"

namespace chrism {

/// Parses a full program: chance rules plus optional values/2 and set_sw/2
/// directives. Anonymous probability expressions are named rule_<k>, cond
/// arguments desugared, fixed-distribution sums checked. Throws ParseError.
Program parse_program(std::string_view text);

/// Comma-separated ground constraints; duplicates preserved. "" is the empty
/// query. A trailing '.' is optional.
std::vector<Term> parse_query(std::string_view text);

/// One observation: "[N times] Q <==> A" or "[N times] Q ===> A[,~N1,...]",
/// also "count(Obs,N)". Throws ParseError on negation inside a full
/// observation or a non-positive count.
Observation parse_observation(std::string_view text);

/// Observation file: one observation per term, '%' comments.
std::vector<Observation> parse_observations(std::string_view text);

/// Replaces "cond C" experiment-name arguments by fresh variables bound in
/// the guard through an if-then-else on C. Identity for rules without cond
/// arguments.
ChanceRule desugar_cond(const ChanceRule& rule);

/// Surface-syntax rendering that reparses to a structurally equal Program.
std::string program_to_source(const Program& program);
std::string rule_to_source(const ChanceRule& rule);

/// Renders a goal/guard term with operators (fully parenthesized).
std::string goal_to_source(const Term& goal);

/// Renders a constraint multiset as "c1,c2,..." in the given order.
std::string constraints_to_source(const std::vector<Term>& constraints);

bool is_builtin_goal(const Term& t);

}  // namespace chrism
