#include "delcheck/semantics.hpp"

#include <algorithm>

namespace delcheck {

namespace {

constexpr Index kAbsent = static_cast<Index>(-1);

std::vector<Prop> updated_valuation(const std::vector<Prop>& before, const std::vector<Literal>& post) {
  if (post.empty()) return before;
  std::vector<Prop> out;
  out.reserve(before.size() + post.size());
  for (Prop p : before) {
    bool deleted = std::any_of(post.begin(), post.end(), [p](const Literal& l) { return l.negated && l.prop == p; });
    if (!deleted) out.push_back(p);
  }
  for (const Literal& l : post)
    if (!l.negated) out.push_back(l.prop);
  return out;
}

}  // namespace

bool Evaluator::evaluate(const EpistemicModel& m, Index w, const Formula& f) {
  if (++calls_ > budget_) throw BudgetExceeded(calls_);
  switch (f.kind()) {
    case NodeKind::atom:
      return m.holds(w, f.prop());
    case NodeKind::negation:
      return !evaluate(m, w, f.operand());
    case NodeKind::conjunction:
      return evaluate(m, w, f.left()) && evaluate(m, w, f.right());
    case NodeKind::knowledge: {
      const Relation* r = m.relation(f.agent());
      if (!r) return true;
      for (Index v : r->successors(w))
        if (!evaluate(m, v, f.operand())) return false;
      return true;
    }
    case NodeKind::update:
      return evaluate_update(m, w, f);
  }
  return false;
}

bool Evaluator::evaluate_update(const EpistemicModel& m, Index w, const Formula& f) {
  const PointedEventModel& pe = f.event();
  const EventModel& em = *pe.model;
  std::vector<signed char> known(em.size(), -1);
  std::optional<ProductUpdate> prod;
  std::vector<Index> lookup;
  for (Index e : pe.designated) {
    known[e] = evaluate(m, w, em.pre(e)) ? 1 : 0;
    if (!known[e]) continue;  // [E,e]phi holds vacuously
    if (!prod) {
      KnownPre hint{w, &known};
      prod = build_product(m, em, &hint);
      lookup.assign(m.size() * em.size(), kAbsent);
      for (Index i = 0; i < prod->worlds.size(); ++i)
        lookup[prod->worlds[i].origin_world * em.size() + prod->worlds[i].origin_event] = i;
    }
    if (!evaluate(prod->model, lookup[w * em.size() + e], f.operand())) return false;
  }
  return true;
}

ProductUpdate Evaluator::product(const EpistemicModel& m, const EventModel& e) { return build_product(m, e, nullptr); }

ProductUpdate Evaluator::build_product(const EpistemicModel& m, const EventModel& em, const KnownPre* known) {
  const std::size_t n_events = em.size();
  std::vector<Index> index(m.size() * n_events, kAbsent);
  std::vector<ProductWorld> worlds;
  for (Index w = 0; w < m.size(); ++w) {
    for (Index e = 0; e < n_events; ++e) {
      bool sat;
      if (known && known->world == w && (*known->verdicts)[e] >= 0)
        sat = (*known->verdicts)[e] == 1;
      else
        sat = evaluate(m, w, em.pre(e));
      if (!sat) continue;
      index[w * n_events + e] = static_cast<Index>(worlds.size());
      worlds.push_back({w, e, m.world_name(w) + "|" + em.event_name(e)});
    }
  }
  product_worlds_ += worlds.size();
  if (worlds.empty()) return ProductUpdate{EpistemicModel::empty_product(), {}};

  std::set<Agent> agents = agents_of(m.relations());
  for (const auto& [a, r] : em.relations()) agents.insert(a);
  RelationMap relations;
  for (Agent a : agents) {
    Relation rel(worlds.size());
    const Relation* rw = m.relation(a);
    const Relation* re = em.relation(a);
    if (rw && re) {
      for (Index i = 0; i < worlds.size(); ++i) {
        const auto& [w, e, id] = worlds[i];
        for (Index w2 : rw->successors(w))
          for (Index e2 : re->successors(e))
            if (Index j = index[w2 * n_events + e2]; j != kAbsent) rel.add(i, j);
      }
    }
    rel.finalize();
    relations.emplace(a, std::move(rel));
  }

  std::vector<std::string> names;
  std::vector<std::vector<Prop>> valuation;
  names.reserve(worlds.size());
  valuation.reserve(worlds.size());
  for (const auto& pw : worlds) {
    names.push_back(pw.id);
    valuation.push_back(updated_valuation(m.true_props(pw.origin_world), em.post(pw.origin_event)));
  }
  return ProductUpdate{EpistemicModel(std::move(names), std::move(relations), std::move(valuation)),
                       std::move(worlds)};
}

ProductUpdate product_update(const EpistemicModel& m, const EventModel& e) { return Evaluator().product(m, e); }

PointedProduct product_update(const PointedModel& m, const PointedEventModel& e) {
  PointedProduct out{product_update(*m.model, *e.model), {}};
  for (Index i = 0; i < out.product.worlds.size(); ++i) {
    const auto& pw = out.product.worlds[i];
    if (std::binary_search(m.designated.begin(), m.designated.end(), pw.origin_world) &&
        std::binary_search(e.designated.begin(), e.designated.end(), pw.origin_event))
      out.designated.push_back(i);
  }
  return out;
}

bool evaluate(const EpistemicModel& m, Index w, const Formula& f) {
  if (w >= m.size()) throw StructuralError("world index out of range");
  return Evaluator().evaluate(m, w, f);
}

bool evaluate_pointed(const PointedModel& pm, const Formula& f) {
  Evaluator ev;
  return std::all_of(pm.designated.begin(), pm.designated.end(),
                     [&](Index w) { return ev.evaluate(*pm.model, w, f); });
}

ProbeResult call_count_probe(const EpistemicModel& m, Index w, const Formula& f, std::uint64_t call_budget) {
  if (w >= m.size()) throw StructuralError("world index out of range");
  Evaluator ev(call_budget);
  bool v = ev.evaluate(m, w, f);
  return {v, ev.calls(), ev.product_worlds()};
}

}  // namespace delcheck
