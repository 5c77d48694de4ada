#pragma once

// Fixtures and random generators shared by the unit tests and the
// acceptance binary.

#include <random>
#include <string>
#include <vector>

#include "delcheck/formula.hpp"
#include "delcheck/kripke.hpp"
#include "delcheck/oracle.hpp"

namespace delcheck::testing {

inline const Agent kA{"a"};
inline const Agent kB{"b"};

/// Two worlds w1 (z) and w2, a cannot tell them apart, b can.
inline std::shared_ptr<const EpistemicModel> coin_model() {
  const Prop zp("z");
  NamedRelations rel{{kA, {{"w1", "w1"}, {"w1", "w2"}, {"w2", "w1"}, {"w2", "w2"}}},
                     {kB, {{"w1", "w1"}, {"w2", "w2"}}}};
  return std::make_shared<const EpistemicModel>(make_model({"w1", "w2"}, rel, {{"w1", {zp}}}));
}

/// Coin flip with relations exactly as listed for the two-event example:
/// R_a links e1 and e2, R_b is the identity. post(e1) = h, post(e2) = ~h.
inline std::shared_ptr<const PointedEventModel> coin_flip(Agent linked = kA, Agent separated = kB) {
  const Prop h("h");
  NamedRelations rel{{linked, {{"e1", "e1"}, {"e1", "e2"}, {"e2", "e1"}, {"e2", "e2"}}},
                     {separated, {{"e1", "e1"}, {"e2", "e2"}}}};
  auto model = std::make_shared<const EventModel>(make_event_model(
      {"e1", "e2"}, rel, {{"e1", top()}, {"e2", top()}},
      {{"e1", {Literal{h, false}}}, {"e2", {Literal{h, true}}}}, "flip"));
  return single_pointed(model, 0);
}

/// One event, pre top, no postconditions, identity for every listed agent.
inline std::shared_ptr<const PointedEventModel> identity_update(const std::vector<Agent>& agents,
                                                                std::string label = "id") {
  NamedRelations rel;
  for (Agent a : agents) rel[a] = {{"e", "e"}};
  return single_pointed(
      std::make_shared<const EventModel>(make_event_model({"e"}, rel, {{"e", top()}}, {}, std::move(label))), 0);
}

inline EventTable table_of(std::initializer_list<std::shared_ptr<const PointedEventModel>> events) {
  EventTable t;
  for (const auto& e : events) t.emplace(e->model->label(), e);
  return t;
}

// ---------------------------------------------------------------------------
// Random generation.

using Rng = std::mt19937_64;

inline std::vector<Prop> props_named(const std::vector<std::string>& names) {
  std::vector<Prop> out;
  for (const auto& n : names) out.emplace_back(n);
  return out;
}

/// Random equivalence relation: each element picks a class among `size` slots.
inline Relation random_equivalence(Rng& rng, std::size_t size) {
  std::uniform_int_distribution<std::size_t> pick(0, size - 1);
  std::vector<std::size_t> cls(size);
  for (auto& c : cls) c = pick(rng);
  Relation r(size);
  for (Index u = 0; u < size; ++u)
    for (Index v = 0; v < size; ++v)
      if (cls[u] == cls[v]) r.add(u, v);
  r.finalize();
  return r;
}

inline std::shared_ptr<const EpistemicModel> random_s5_model(Rng& rng, std::size_t worlds,
                                                             const std::vector<Agent>& agents,
                                                             const std::vector<Prop>& props) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < worlds; ++i) names.push_back("w" + std::to_string(i));
  RelationMap rel;
  for (Agent a : agents) rel.emplace(a, random_equivalence(rng, worlds));
  std::bernoulli_distribution coin(0.5);
  std::vector<std::vector<Prop>> val(worlds);
  for (auto& v : val)
    for (Prop p : props)
      if (coin(rng)) v.push_back(p);
  return std::make_shared<const EpistemicModel>(std::move(names), std::move(rel), std::move(val));
}

struct FormulaShape {
  std::vector<Agent> agents;
  std::vector<Prop> props;
  unsigned max_updates = 0;
  unsigned max_events = 3;
  bool postconditions = false;
  bool multi_pointed = false;
};

class FormulaGenerator {
 public:
  FormulaGenerator(Rng& rng, FormulaShape shape) : rng_(rng), shape_(std::move(shape)) {}

  Formula formula(unsigned depth) {
    updates_left_ = shape_.max_updates;
    return gen(depth);
  }

  Formula update_free(unsigned depth) {
    updates_left_ = 0;
    return gen(depth);
  }

  std::shared_ptr<const PointedEventModel> event_model(unsigned pre_depth) {
    std::uniform_int_distribution<std::size_t> size_dist(1, shape_.max_events);
    const std::size_t n = size_dist(rng_);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("e" + std::to_string(i));
    RelationMap rel;
    for (Agent a : shape_.agents) rel.emplace(a, random_equivalence(rng_, n));
    std::vector<Formula> pre;
    for (std::size_t i = 0; i < n; ++i) pre.push_back(gen(pre_depth));
    std::vector<std::vector<Literal>> post(n);
    if (shape_.postconditions) {
      std::bernoulli_distribution coin(0.3);
      for (auto& lits : post)
        for (Prop p : shape_.props)
          if (coin(rng_)) lits.push_back(Literal{p, coin(rng_)});
    }
    auto model = std::make_shared<const EventModel>(std::move(names), std::move(rel), std::move(pre), std::move(post),
                                                    "R" + std::to_string(counter_++));
    std::vector<Index> designated{0};
    Pointedness kind = Pointedness::single;
    if (shape_.multi_pointed && n > 1 && std::bernoulli_distribution(0.5)(rng_)) {
      designated.push_back(static_cast<Index>(n - 1));
      kind = Pointedness::multi;
    }
    return make_pointed(model, designated, kind);
  }

 private:
  Formula gen(unsigned depth) {
    std::uniform_int_distribution<int> leaf_or_not(0, 3);
    if (depth == 0 || leaf_or_not(rng_) == 0) return leaf();
    std::uniform_int_distribution<int> kind(0, 4);
    switch (kind(rng_)) {
      case 0:
        return Formula::negation(gen(depth - 1));
      case 1:
        return Formula::conjunction(gen(depth - 1), gen(depth - 1));
      case 2:
        return disjunction(gen(depth - 1), gen(depth - 1));
      case 3: {
        std::uniform_int_distribution<std::size_t> pick(0, shape_.agents.size() - 1);
        return Formula::knows(shape_.agents[pick(rng_)], gen(depth - 1));
      }
      default: {
        if (updates_left_ == 0) return possible(shape_.agents.front(), gen(depth - 1));
        --updates_left_;
        auto e = event_model(depth > 1 ? 1 : 0);
        return Formula::box(e, gen(depth - 1));
      }
    }
  }

  Formula leaf() {
    std::uniform_int_distribution<std::size_t> pick(0, shape_.props.size());
    std::size_t i = pick(rng_);
    if (i == shape_.props.size()) return top();
    return Formula::atom(shape_.props[i]);
  }

  Rng& rng_;
  FormulaShape shape_;
  unsigned updates_left_ = 0;
  unsigned counter_ = 0;
};

/// Random propositional formula over `vars`.
inline Formula random_propositional(Rng& rng, const std::vector<Prop>& vars, unsigned depth) {
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
  if (depth == 0) return Formula::atom(vars[pick(rng)]);
  switch (kind(rng)) {
    case 0:
      return Formula::atom(vars[pick(rng)]);
    case 1:
      return Formula::negation(random_propositional(rng, vars, depth - 1));
    case 2:
      return Formula::conjunction(random_propositional(rng, vars, depth - 1), random_propositional(rng, vars, depth - 1));
    default:
      return disjunction(random_propositional(rng, vars, depth - 1), random_propositional(rng, vars, depth - 1));
  }
}

/// Random QBF with every variable used in the matrix at least once.
inline Qbf random_qbf(Rng& rng, std::size_t n, bool alternating) {
  std::vector<Prop> vars;
  for (std::size_t i = 1; i <= n; ++i) vars.emplace_back("x" + std::to_string(i));
  std::bernoulli_distribution coin(0.5);
  std::vector<QuantifiedVar> prefix;
  for (std::size_t i = 0; i < n; ++i) {
    Quantifier q = alternating ? (i % 2 == 0 ? Quantifier::exists : Quantifier::forall)
                               : (coin(rng) ? Quantifier::exists : Quantifier::forall);
    prefix.push_back({q, vars[i]});
  }
  return make_qbf(std::move(prefix), random_propositional(rng, vars, 3));
}

/// Sixteen matrices over x1, x2, one per two-variable truth table. Entry k
/// is true on (x1, x2) exactly when bit (2*x1 + x2) of k is set.
inline std::vector<Formula> two_variable_templates() {
  const Formula x1 = Formula::atom(Prop("x1"));
  const Formula x2 = Formula::atom(Prop("x2"));
  std::vector<Formula> out;
  for (unsigned k = 0; k < 16; ++k) {
    std::vector<Formula> rows;
    for (unsigned row = 0; row < 4; ++row) {
      if (!(k >> row & 1)) continue;
      Formula l1 = row & 2 ? x1 : Formula::negation(x1);
      Formula l2 = row & 1 ? x2 : Formula::negation(x2);
      rows.push_back(Formula::conjunction(l1, l2));
    }
    if (rows.empty()) {
      out.push_back(Formula::conjunction(x1, Formula::negation(x1)));
      continue;
    }
    Formula d = rows.front();
    for (std::size_t i = 1; i < rows.size(); ++i) d = disjunction(d, rows[i]);
    out.push_back(d);
  }
  return out;
}

inline Qbf exists_forall(const Formula& matrix) {
  return make_qbf({{Quantifier::exists, Prop("x1")}, {Quantifier::forall, Prop("x2")}}, matrix);
}

}  // namespace delcheck::testing
