#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "delcheck/formula.hpp"
#include "delcheck/kripke.hpp"

namespace delcheck {

// Brute-force ground truth. Everything here is deliberately exhaustive and
// shares no code path with the model checkers it is used to validate.

enum class Quantifier { exists, forall };

struct QuantifiedVar {
  Quantifier quantifier;
  Prop var;
};

struct Qbf {
  std::vector<QuantifiedVar> prefix;
  Formula matrix;
  /// Variables inserted by normalize_alternating(); never occur in the matrix.
  std::set<Prop> dummies;
};

/// Checks distinct prefix variables, a propositional matrix and no free
/// variables. The falsum atom used by top/bot is always false and may occur.
Qbf make_qbf(std::vector<QuantifiedVar> prefix, Formula matrix);

bool is_propositional(const Formula& f);
std::set<Prop> variables_of(const Formula& f);  // excludes the falsum atom

using Assignment = std::map<Prop, bool>;

bool eval_propositional(const Formula& f, const Assignment& alpha);

inline constexpr std::size_t kMaxOracleVariables = 20;

bool qbf_eval(const Qbf& q);

/// Strictly alternating prefix starting with exists, even length; dummies
/// are named _d1, _d2, ... skipping names already in use.
Qbf normalize_alternating(const Qbf& q);
bool is_normalized(const Qbf& q);

/// Satisfying assignment maximal with ordering[0] most significant, or
/// nullopt when `f` is unsatisfiable.
std::optional<Assignment> lexmax_sat(const Formula& f, const std::vector<Prop>& ordering);

/// Variables of `f` in natural order (x2 before x10).
std::vector<Prop> natural_order(const std::set<Prop>& vars);

/// Coarsest bisimulation on the disjoint union, then a block comparison.
bool bisimilar(const EpistemicModel& m1, Index w1, const EpistemicModel& m2, Index w2);

// Text formats.
Qbf parse_qbf(std::string_view text);      // "prefix: e x1 a x2\nmatrix: <formula>"
Qbf parse_qdimacs(std::string_view text);  // variables become x<N>
Qbf load_qbf(std::string_view text);       // sniffs which of the two formats
std::string render_qbf(const Qbf& q);
std::string render_assignment(const Assignment& alpha, const std::vector<Prop>& ordering);

}  // namespace delcheck
