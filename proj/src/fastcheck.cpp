#include "delcheck/fastcheck.hpp"

#include <algorithm>

#include "delcheck/semantics.hpp"

namespace delcheck {

namespace {

FragmentVerdict reject(std::string reason) { return {false, std::move(reason)}; }

}  // namespace

FragmentVerdict accepts_fragment(const EpistemicModel& m, const Formula& f) {
  std::set<std::string> agents;
  for (Agent a : agents_of(m.relations())) agents.insert(a.str());
  FormulaStats stats = formula_stats(f);
  agents.insert(stats.agents_used.begin(), stats.agents_used.end());
  if (agents.empty()) return reject("no agent");
  if (agents.size() == 2) return reject("two agents");
  if (agents.size() > 2) return reject(std::to_string(agents.size()) + " agents");
  const Agent agent(*agents.begin());

  if (!m.relation(agent)) return reject("model has no relation for agent " + agent.str());
  if (!validate_s5(m).ok) return reject("model is not S5");

  FragmentVerdict verdict{true, {}};
  for_each_node(f, [&](const Formula& n) {
    if (!verdict.accepted || n.kind() != NodeKind::update) return;
    const PointedEventModel& pe = n.event();
    if (pe.pointedness != Pointedness::single || pe.designated.size() != 1)
      verdict = reject("multi-pointed event model");
    else if (pe.model->has_postconditions())
      verdict = reject("postcondition present");
    else if (!pe.model->relation(agent))
      verdict = reject("event model has no relation for agent " + agent.str());
    else if (!validate_s5(*pe.model).ok)
      verdict = reject("event model is not S5");
  });
  return verdict;
}

FragmentVerdict accepts_fragment(const FragmentInstance& instance) {
  if (!instance.model) return reject("no model");
  if (instance.world >= instance.model->size()) return reject("world out of range");
  return accepts_fragment(*instance.model, instance.formula);
}

// ---------------------------------------------------------------------------

std::size_t FastChecker::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = std::hash<const void*>{}(k.node);
  h ^= (std::size_t{k.submodel} << 32 | k.world) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

FastChecker::FastChecker(std::shared_ptr<const EpistemicModel> model, bool memoize, std::uint64_t call_budget)
    : model_(std::move(model)), memoize_(memoize), budget_(call_budget) {
  if (model_->relations().size() != 1) throw Error("fast checker needs a model with exactly one agent");
  agent_ = model_->relations().begin()->first;
  relation_ = &model_->relations().begin()->second;
}

FastChecker::SubmodelId FastChecker::intern(std::vector<Index> worlds) {
  auto [it, inserted] = submodel_ids_.emplace(std::move(worlds), static_cast<SubmodelId>(members_.size()));
  if (inserted) {
    std::vector<bool> bits(model_->size(), false);
    for (Index w : it->first) bits[w] = true;
    members_.push_back(std::move(bits));
    stats_.submodels = members_.size();
  }
  return it->second;
}

bool FastChecker::check(Index w, const Formula& f) {
  std::vector<Index> all(model_->size());
  for (Index i = 0; i < all.size(); ++i) all[i] = i;
  return check(intern(std::move(all)), w, f);
}

bool FastChecker::check(SubmodelId s, Index w, const Formula& f) {
  if (++stats_.calls > budget_) throw BudgetExceeded(stats_.calls);
  Key key{s, w, f.identity()};
  if (memoize_)
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  bool result = false;
  switch (f.kind()) {
    case NodeKind::atom:
      result = model_->holds(w, f.prop());
      break;
    case NodeKind::negation:
      result = !check(s, w, f.operand());
      break;
    case NodeKind::conjunction:
      result = check(s, w, f.left()) && check(s, w, f.right());
      break;
    case NodeKind::knowledge: {
      result = true;
      for (Index v : relation_->successors(w)) {
        if (members_[s][v] && !check(s, v, f.operand())) {
          result = false;
          break;
        }
      }
      break;
    }
    case NodeKind::update: {
      const PointedEventModel& pe = f.event();
      const Index e0 = pe.designated.front();
      if (!check(s, w, pe.model->pre(e0))) {
        result = true;
      } else {
        SubmodelId next = intern(contract(s, w, pe));
        result = check(next, w, f.operand());
      }
      break;
    }
  }
  if (memoize_) {
    memo_.emplace(key, result);
    stats_.memo_entries = memo_.size();
  }
  return result;
}

std::vector<Index> FastChecker::contract(SubmodelId s, Index w0, const PointedEventModel& pe) {
  const EventModel& em = *pe.model;
  const Relation& events = *em.relation(agent_);
  std::vector<Index> kept;
  for (Index v : relation_->successors(w0)) {
    if (!members_[s][v]) continue;
    for (Index e : events.successors(pe.designated.front())) {
      if (check(s, v, em.pre(e))) {
        kept.push_back(v);
        break;
      }
    }
  }
  return kept;  // successor lists are sorted, so `kept` is too
}

std::vector<Index> FastChecker::contract(const std::vector<Index>& within, Index w0, const PointedEventModel& event) {
  return contract(intern(within), w0, event);
}

// ---------------------------------------------------------------------------

FastResult fragment_check(const FragmentInstance& instance, bool memoize, std::uint64_t call_budget) {
  FragmentVerdict gate = accepts_fragment(instance);
  if (!gate.accepted) throw Error("instance outside the single-agent fragment: " + gate.reason);
  FastChecker checker(instance.model, memoize, call_budget);
  bool verdict = checker.check(instance.world, instance.formula);
  return {verdict, checker.stats()};
}

EpistemicModel contract_update(const EpistemicModel& m, Index w0, const EventModel& event, Index e0) {
  auto model = std::make_shared<const EpistemicModel>(m);
  auto pe = single_pointed(std::make_shared<const EventModel>(event), e0);
  FragmentVerdict gate = accepts_fragment(*model, Formula::box(pe, top()));
  if (!gate.accepted) throw Error("update outside the single-agent fragment: " + gate.reason);
  if (w0 >= m.size()) throw StructuralError("world index out of range");

  FastChecker checker(model);
  if (!checker.check(w0, event.pre(e0))) throw Error("precondition of the designated event fails at the world");
  std::vector<Index> all(m.size());
  for (Index i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<Index> kept = checker.contract(all, w0, *pe);

  std::vector<Index> position(m.size(), static_cast<Index>(-1));
  for (Index i = 0; i < kept.size(); ++i) position[kept[i]] = i;
  std::vector<std::string> names;
  std::vector<std::vector<Prop>> valuation;
  for (Index w : kept) {
    names.push_back(m.world_name(w));
    valuation.push_back(m.true_props(w));
  }
  RelationMap relations;
  for (const auto& [agent, rel] : m.relations()) {
    Relation r(kept.size());
    for (Index i = 0; i < kept.size(); ++i)
      for (Index v : rel.successors(kept[i]))
        if (position[v] != static_cast<Index>(-1)) r.add(i, position[v]);
    r.finalize();
    relations.emplace(agent, std::move(r));
  }
  return EpistemicModel(std::move(names), std::move(relations), std::move(valuation));
}

FragmentInstance nested_update_family(unsigned k) {
  const Agent a("a");
  const Prop p("p");
  NamedRelations rel{{a, {{"w0", "w0"}, {"w0", "w1"}, {"w1", "w0"}, {"w1", "w1"}}}};
  auto model = std::make_shared<const EpistemicModel>(make_model({"w0", "w1"}, rel, {{"w0", {p}}}));

  Formula current = Formula::atom(p);
  for (unsigned j = 0; j < k; ++j) {
    Formula pre = Formula::conjunction(current, current);
    auto event = std::make_shared<const EventModel>(make_event_model({"f"}, {{a, {{"f", "f"}}}}, {{"f", pre}}, {},
                                                                     "F" + std::to_string(j)));
    current = Formula::box(single_pointed(event, 0), Formula::atom(p));
  }
  return {model, 0, current};
}

}  // namespace delcheck
