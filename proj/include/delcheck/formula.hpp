#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "delcheck/error.hpp"
#include "delcheck/symbol.hpp"

namespace delcheck {

struct PointedEventModel;

enum class NodeKind { atom, negation, conjunction, knowledge, update };

/// Immutable DEL formula. Only the five core constructors exist as nodes;
/// every derived connective is desugared by the factory functions below.
/// Nodes are shared, so a Formula is a DAG and node identity (address) is
/// the identity of an occurrence.
class Formula {
 public:
  static Formula atom(Prop p);
  static Formula negation(Formula f);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula knows(Agent a, Formula f);
  static Formula box(std::shared_ptr<const PointedEventModel> event, Formula f);

  NodeKind kind() const { return node_->kind; }
  Prop prop() const { return node_->prop; }
  Agent agent() const { return node_->agent; }
  /// Operand of negation/knowledge/update, left conjunct of a conjunction.
  const Formula& operand() const { return *node_->lhs; }
  const Formula& left() const { return *node_->lhs; }
  const Formula& right() const { return *node_->rhs; }
  const PointedEventModel& event() const { return *node_->event; }
  const std::shared_ptr<const PointedEventModel>& event_ptr() const { return node_->event; }

  const void* identity() const { return node_.get(); }

  /// Structural equality; embedded event models are compared by content.
  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node {
    NodeKind kind;
    Prop prop;
    Agent agent;
    std::shared_ptr<const Formula> lhs;
    std::shared_ptr<const Formula> rhs;
    std::shared_ptr<const PointedEventModel> event;
  };
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Abbreviations.
Prop default_falsum_prop();
Formula bot(Prop p = default_falsum_prop());  // (p & ~p)
Formula top(Prop p = default_falsum_prop());  // ~(p & ~p)
Formula disjunction(Formula lhs, Formula rhs);
Formula implication(Formula lhs, Formula rhs);
Formula possible(Agent a, Formula f);  // Khat a f == ~K a ~f
Formula diamond(std::shared_ptr<const PointedEventModel> event, Formula f);
Formula conjunction_of(const std::vector<Formula>& conjuncts, Formula empty);

/// Named event models available to `[upd:NAME]` references.
using EventTable = std::map<std::string, std::shared_ptr<const PointedEventModel>, std::less<>>;

struct ParseOptions {
  const EventTable* events = nullptr;
  /// When set, K/Khat must name one of these agents.
  const std::set<std::string>* agents = nullptr;
  Prop falsum = default_falsum_prop();
};

Formula parse_formula(std::string_view text, const ParseOptions& options = {});

/// Name used when rendering an update operator.
using EventNamer = std::function<std::string(const PointedEventModel&)>;

/// Fully parenthesized rendering; parse_formula(render_formula(f)) == f.
/// Without a namer, updates render with the event model's label.
std::string render_formula(const Formula& f, const EventNamer& namer = {});

struct FormulaStats {
  std::uint64_t node_count = 0;
  std::uint64_t update_count = 0;
  std::uint64_t max_update_nesting = 0;
  std::set<std::string> props_used;
  std::set<std::string> agents_used;
};

/// node_count covers the formula tree itself (saturating at UINT64_MAX);
/// the remaining fields also descend into embedded preconditions.
FormulaStats formula_stats(const Formula& f);

/// Calls `visit` once per distinct node reachable from `f`, including nodes
/// inside embedded event-model preconditions.
void for_each_node(const Formula& f, const std::function<void(const Formula&)>& visit);

}  // namespace delcheck
