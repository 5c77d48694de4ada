#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "delcheck/formula.hpp"
#include "delcheck/symbol.hpp"

namespace delcheck {

using Index = std::uint32_t;

struct Literal {
  Prop prop;
  bool negated = false;

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

std::string render_literal(const Literal& l);
Literal parse_literal(std::string_view text);

/// Binary relation over the carrier {0, ..., size-1}, stored as sorted
/// successor lists.
class Relation {
 public:
  Relation() = default;
  explicit Relation(std::size_t carrier_size) : successors_(carrier_size) {}

  void add(Index from, Index to) { successors_[from].push_back(to); }
  /// Sorts and deduplicates successor lists; call after the last add().
  void finalize();

  std::size_t carrier_size() const { return successors_.size(); }
  std::span<const Index> successors(Index from) const { return successors_[from]; }
  bool contains(Index from, Index to) const;
  std::size_t pair_count() const;

  friend bool operator==(const Relation&, const Relation&) = default;

 private:
  std::vector<std::vector<Index>> successors_;
};

using RelationMap = std::map<Agent, Relation>;

/// Name-level relation description, the shape used by files and hand-built
/// fixtures.
using PairList = std::vector<std::pair<std::string, std::string>>;
using NamedRelations = std::map<Agent, PairList>;

/// Kripke model (W, R, V). Agents without an entry in `relations` have the
/// empty relation. A model with zero worlds exists only as the empty product
/// sentinel.
class EpistemicModel {
 public:
  EpistemicModel(std::vector<std::string> worlds, RelationMap relations,
                 std::vector<std::vector<Prop>> valuation);

  static EpistemicModel empty_product();

  std::size_t size() const { return worlds_.size(); }
  bool is_empty() const { return worlds_.empty(); }
  const std::string& world_name(Index w) const { return worlds_[w]; }
  const std::vector<std::string>& world_names() const { return worlds_; }
  std::optional<Index> find_world(std::string_view name) const;
  Index world_index(std::string_view name) const;  // throws StructuralError

  const RelationMap& relations() const { return relations_; }
  const Relation* relation(Agent a) const;

  bool holds(Index w, Prop p) const;
  const std::vector<Prop>& true_props(Index w) const { return valuation_[w]; }

 private:
  EpistemicModel() = default;
  std::vector<std::string> worlds_;
  RelationMap relations_;
  std::vector<std::vector<Prop>> valuation_;  // sorted per world
};

EpistemicModel make_model(std::vector<std::string> worlds, const NamedRelations& relations,
                          const std::map<std::string, std::vector<Prop>>& valuation);

/// Event model (E, S, pre, post). Preconditions are full DEL formulas.
class EventModel {
 public:
  EventModel(std::vector<std::string> events, RelationMap relations, std::vector<Formula> pre,
             std::vector<std::vector<Literal>> post, std::string label = {});

  std::size_t size() const { return events_.size(); }
  const std::string& event_name(Index e) const { return events_[e]; }
  const std::vector<std::string>& event_names() const { return events_; }
  std::optional<Index> find_event(std::string_view name) const;
  Index event_index(std::string_view name) const;

  const RelationMap& relations() const { return relations_; }
  const Relation* relation(Agent a) const;
  const Formula& pre(Index e) const { return pre_[e]; }
  const std::vector<Literal>& post(Index e) const { return post_[e]; }
  bool has_postconditions() const;

  const std::string& label() const { return label_; }

  friend bool operator==(const EventModel&, const EventModel&);

 private:
  std::vector<std::string> events_;
  RelationMap relations_;
  std::vector<Formula> pre_;
  std::vector<std::vector<Literal>> post_;  // sorted, no complementary pair
  std::string label_;
};

EventModel make_event_model(std::vector<std::string> events, const NamedRelations& relations,
                            const std::map<std::string, Formula>& pre,
                            const std::map<std::string, std::vector<Literal>>& post,
                            std::string label = {});

enum class Pointedness { single, multi };

struct PointedModel {
  std::shared_ptr<const EpistemicModel> model;
  std::vector<Index> designated;
  Pointedness pointedness = Pointedness::single;
};

struct PointedEventModel {
  std::shared_ptr<const EventModel> model;
  std::vector<Index> designated;
  Pointedness pointedness = Pointedness::single;

  friend bool operator==(const PointedEventModel& a, const PointedEventModel& b);
};

/// Validates designation (nonempty, in range, singleton when single).
PointedModel make_pointed(std::shared_ptr<const EpistemicModel> model, std::vector<Index> designated,
                          Pointedness pointedness);
std::shared_ptr<const PointedEventModel> make_pointed(std::shared_ptr<const EventModel> model,
                                                      std::vector<Index> designated,
                                                      Pointedness pointedness);
std::shared_ptr<const PointedEventModel> single_pointed(std::shared_ptr<const EventModel> model,
                                                        Index designated = 0);

enum class S5Property { reflexive, symmetric, transitive };
const char* to_string(S5Property p);

struct S5Violation {
  Agent agent;
  std::string from;
  std::string to;
  S5Property kind;  // (from, to) is the missing pair
};

struct S5Report {
  bool ok = true;
  std::vector<S5Violation> violations;
};

/// Every missing pair that keeps a relation from being an equivalence.
/// Throws StructuralError for endpoints outside the carrier.
S5Report validate_s5(const NamedRelations& relations, const std::vector<std::string>& carrier);
S5Report validate_s5(const RelationMap& relations, const std::vector<std::string>& carrier);
S5Report validate_s5(const EpistemicModel& m);
S5Report validate_s5(const EventModel& e);

/// Least equivalence relation per agent containing the input.
NamedRelations s5_closure(const NamedRelations& relations, const std::vector<std::string>& carrier);
Relation s5_closure(const Relation& r);

/// Two-event announcement of phi1 (designated) or phi2: informed agents
/// tell the events apart, everyone else in the roster does not.
std::shared_ptr<const PointedEventModel> make_semi_private(Formula phi1, Formula phi2,
                                                           const std::set<Agent>& informed,
                                                           const std::set<Agent>& roster,
                                                           std::string label = {});

/// Agents with a relation in the model.
std::set<Agent> agents_of(const RelationMap& relations);

}  // namespace delcheck
