#include "delcheck/kripke.hpp"

#include <algorithm>
#include <unordered_map>

namespace delcheck {

std::string render_literal(const Literal& l) { return (l.negated ? "~" : "") + l.prop.str(); }

Literal parse_literal(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  bool negated = false;
  if (!text.empty() && (text.front() == '~' || text.front() == '!')) {
    negated = true;
    text.remove_prefix(1);
  }
  if (!is_identifier(text)) throw ParseError("malformed literal '" + std::string(text) + "'", 0);
  return Literal{Prop(text), negated};
}

// ---------------------------------------------------------------------------

void Relation::finalize() {
  for (auto& s : successors_) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
}

bool Relation::contains(Index from, Index to) const {
  const auto& s = successors_[from];
  return std::binary_search(s.begin(), s.end(), to);
}

std::size_t Relation::pair_count() const {
  std::size_t n = 0;
  for (const auto& s : successors_) n += s.size();
  return n;
}

namespace {

void check_unique(const std::vector<std::string>& ids, const char* what) {
  std::vector<std::string_view> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) throw StructuralError(std::string("duplicate ") + what + " '" + std::string(*dup) + "'");
}

void check_relations(const RelationMap& relations, std::size_t carrier, const char* what) {
  for (const auto& [agent, rel] : relations) {
    if (rel.carrier_size() != carrier)
      throw StructuralError(std::string("relation for agent '") + agent.str() + "' has the wrong carrier size for " +
                            what);
    for (Index u = 0; u < carrier; ++u)
      for (Index v : rel.successors(u))
        if (v >= carrier)
          throw StructuralError(std::string("relation for agent '") + agent.str() + "' leaves the " + what);
  }
}

std::unordered_map<std::string_view, Index> index_of(const std::vector<std::string>& ids) {
  std::unordered_map<std::string_view, Index> out;
  for (Index i = 0; i < ids.size(); ++i) out.emplace(ids[i], i);
  return out;
}

RelationMap resolve_relations(const NamedRelations& named, const std::vector<std::string>& carrier,
                              const char* what) {
  auto idx = index_of(carrier);
  RelationMap out;
  for (const auto& [agent, pairs] : named) {
    Relation rel(carrier.size());
    for (const auto& [from, to] : pairs) {
      auto f = idx.find(from);
      auto t = idx.find(to);
      if (f == idx.end() || t == idx.end())
        throw StructuralError("relation pair (" + from + ", " + to + ") for agent '" + agent.str() +
                              "' names an unknown " + what);
      rel.add(f->second, t->second);
    }
    rel.finalize();
    out.emplace(agent, std::move(rel));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

EpistemicModel::EpistemicModel(std::vector<std::string> worlds, RelationMap relations,
                               std::vector<std::vector<Prop>> valuation)
    : worlds_(std::move(worlds)), relations_(std::move(relations)), valuation_(std::move(valuation)) {
  if (worlds_.empty()) throw StructuralError("an epistemic model needs at least one world");
  if (valuation_.size() != worlds_.size()) throw StructuralError("valuation size does not match the world count");
  check_relations(relations_, worlds_.size(), "set of worlds");
  for (auto& props : valuation_) {
    std::sort(props.begin(), props.end());
    props.erase(std::unique(props.begin(), props.end()), props.end());
  }
}

EpistemicModel EpistemicModel::empty_product() { return EpistemicModel(); }

std::optional<Index> EpistemicModel::find_world(std::string_view name) const {
  for (Index i = 0; i < worlds_.size(); ++i)
    if (worlds_[i] == name) return i;
  return std::nullopt;
}

Index EpistemicModel::world_index(std::string_view name) const {
  if (auto w = find_world(name)) return *w;
  throw StructuralError("unknown world '" + std::string(name) + "'");
}

const Relation* EpistemicModel::relation(Agent a) const {
  auto it = relations_.find(a);
  return it == relations_.end() ? nullptr : &it->second;
}

bool EpistemicModel::holds(Index w, Prop p) const {
  const auto& v = valuation_[w];
  return std::binary_search(v.begin(), v.end(), p);
}

EpistemicModel make_model(std::vector<std::string> worlds, const NamedRelations& relations,
                          const std::map<std::string, std::vector<Prop>>& valuation) {
  check_unique(worlds, "world");
  RelationMap rel = resolve_relations(relations, worlds, "world");
  auto idx = index_of(worlds);
  std::vector<std::vector<Prop>> val(worlds.size());
  for (const auto& [world, props] : valuation) {
    auto it = idx.find(world);
    if (it == idx.end()) throw StructuralError("valuation names an unknown world '" + world + "'");
    val[it->second] = props;
  }
  return EpistemicModel(std::move(worlds), std::move(rel), std::move(val));
}

// ---------------------------------------------------------------------------

EventModel::EventModel(std::vector<std::string> events, RelationMap relations, std::vector<Formula> pre,
                       std::vector<std::vector<Literal>> post, std::string label)
    : events_(std::move(events)),
      relations_(std::move(relations)),
      pre_(std::move(pre)),
      post_(std::move(post)),
      label_(std::move(label)) {
  if (events_.empty()) throw StructuralError("an event model needs at least one event");
  if (pre_.size() != events_.size()) throw StructuralError("precondition count does not match the event count");
  if (post_.size() != events_.size()) throw StructuralError("postcondition count does not match the event count");
  check_relations(relations_, events_.size(), "set of events");
  for (Index e = 0; e < post_.size(); ++e) {
    auto& lits = post_[e];
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (std::size_t i = 1; i < lits.size(); ++i)
      if (lits[i].prop == lits[i - 1].prop)
        throw StructuralError("postcondition of event '" + events_[e] + "' contains complementary literals on '" +
                              lits[i].prop.str() + "'");
  }
}

std::optional<Index> EventModel::find_event(std::string_view name) const {
  for (Index i = 0; i < events_.size(); ++i)
    if (events_[i] == name) return i;
  return std::nullopt;
}

Index EventModel::event_index(std::string_view name) const {
  if (auto e = find_event(name)) return *e;
  throw StructuralError("unknown event '" + std::string(name) + "'");
}

const Relation* EventModel::relation(Agent a) const {
  auto it = relations_.find(a);
  return it == relations_.end() ? nullptr : &it->second;
}

bool EventModel::has_postconditions() const {
  return std::any_of(post_.begin(), post_.end(), [](const auto& p) { return !p.empty(); });
}

bool operator==(const EventModel& a, const EventModel& b) {
  if (&a == &b) return true;
  return a.events_ == b.events_ && a.relations_ == b.relations_ && a.post_ == b.post_ && a.pre_ == b.pre_;
}

bool operator==(const PointedEventModel& a, const PointedEventModel& b) {
  if (a.designated != b.designated || a.pointedness != b.pointedness) return false;
  return a.model == b.model || *a.model == *b.model;
}

EventModel make_event_model(std::vector<std::string> events, const NamedRelations& relations,
                            const std::map<std::string, Formula>& pre,
                            const std::map<std::string, std::vector<Literal>>& post, std::string label) {
  check_unique(events, "event");
  RelationMap rel = resolve_relations(relations, events, "event");
  auto idx = index_of(events);
  std::vector<std::optional<Formula>> pres(events.size());
  for (const auto& [event, f] : pre) {
    auto it = idx.find(event);
    if (it == idx.end()) throw StructuralError("precondition names an unknown event '" + event + "'");
    pres[it->second] = f;
  }
  std::vector<Formula> pre_vec;
  pre_vec.reserve(events.size());
  for (Index i = 0; i < events.size(); ++i) {
    if (!pres[i]) throw StructuralError("event '" + events[i] + "' has no precondition");
    pre_vec.push_back(*pres[i]);
  }
  std::vector<std::vector<Literal>> post_vec(events.size());
  for (const auto& [event, lits] : post) {
    auto it = idx.find(event);
    if (it == idx.end()) throw StructuralError("postcondition names an unknown event '" + event + "'");
    post_vec[it->second] = lits;
  }
  return EventModel(std::move(events), std::move(rel), std::move(pre_vec), std::move(post_vec), std::move(label));
}

// ---------------------------------------------------------------------------

namespace {

void check_designation(const std::vector<Index>& designated, std::size_t carrier, Pointedness pointedness,
                       const char* what) {
  if (designated.empty()) throw StructuralError(std::string("no designated ") + what);
  for (Index d : designated)
    if (d >= carrier) throw StructuralError(std::string("designated ") + what + " out of range");
  if (pointedness == Pointedness::single && designated.size() != 1)
    throw StructuralError(std::string("single-pointed ") + what + " designation must have exactly one element");
}

std::vector<Index> normalized(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

PointedModel make_pointed(std::shared_ptr<const EpistemicModel> model, std::vector<Index> designated,
                          Pointedness pointedness) {
  if (!model) throw StructuralError("pointed model without a model");
  designated = normalized(std::move(designated));
  check_designation(designated, model->size(), pointedness, "world");
  return PointedModel{std::move(model), std::move(designated), pointedness};
}

std::shared_ptr<const PointedEventModel> make_pointed(std::shared_ptr<const EventModel> model,
                                                      std::vector<Index> designated, Pointedness pointedness) {
  if (!model) throw StructuralError("pointed event model without an event model");
  designated = normalized(std::move(designated));
  check_designation(designated, model->size(), pointedness, "event");
  return std::make_shared<const PointedEventModel>(
      PointedEventModel{std::move(model), std::move(designated), pointedness});
}

std::shared_ptr<const PointedEventModel> single_pointed(std::shared_ptr<const EventModel> model, Index designated) {
  return make_pointed(std::move(model), {designated}, Pointedness::single);
}

// ---------------------------------------------------------------------------

const char* to_string(S5Property p) {
  switch (p) {
    case S5Property::reflexive: return "reflexive";
    case S5Property::symmetric: return "symmetric";
    case S5Property::transitive: return "transitive";
  }
  return "?";
}

S5Report validate_s5(const RelationMap& relations, const std::vector<std::string>& carrier) {
  check_relations(relations, carrier.size(), "carrier");
  S5Report report;
  auto n = static_cast<Index>(carrier.size());
  for (const auto& [agent, rel] : relations) {
    auto flag = [&](Index u, Index v, S5Property kind) {
      report.violations.push_back({agent, carrier[u], carrier[v], kind});
    };
    for (Index u = 0; u < n; ++u)
      if (!rel.contains(u, u)) flag(u, u, S5Property::reflexive);
    for (Index u = 0; u < n; ++u)
      for (Index v : rel.successors(u))
        if (!rel.contains(v, u)) flag(v, u, S5Property::symmetric);
    std::vector<char> missing(n);
    for (Index u = 0; u < n; ++u) {
      std::fill(missing.begin(), missing.end(), 0);
      for (Index v : rel.successors(u))
        for (Index w : rel.successors(v))
          if (!rel.contains(u, w) && !missing[w]) {
            missing[w] = 1;
            flag(u, w, S5Property::transitive);
          }
    }
  }
  report.ok = report.violations.empty();
  return report;
}

S5Report validate_s5(const NamedRelations& relations, const std::vector<std::string>& carrier) {
  return validate_s5(resolve_relations(relations, carrier, "carrier element"), carrier);
}

S5Report validate_s5(const EpistemicModel& m) { return validate_s5(m.relations(), m.world_names()); }
S5Report validate_s5(const EventModel& e) { return validate_s5(e.relations(), e.event_names()); }

Relation s5_closure(const Relation& r) {
  // Union-find over the carrier; an equivalence closure is the partition
  // into connected components of the undirected graph.
  auto n = static_cast<Index>(r.carrier_size());
  std::vector<Index> parent(n);
  for (Index i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Index u = 0; u < n; ++u)
    for (Index v : r.successors(u)) parent[find(u)] = find(v);
  std::vector<std::vector<Index>> classes(n);
  for (Index u = 0; u < n; ++u) classes[find(u)].push_back(u);
  Relation out(n);
  for (const auto& cls : classes)
    for (Index u : cls)
      for (Index v : cls) out.add(u, v);
  out.finalize();
  return out;
}

NamedRelations s5_closure(const NamedRelations& relations, const std::vector<std::string>& carrier) {
  RelationMap resolved = resolve_relations(relations, carrier, "carrier element");
  NamedRelations out;
  for (const auto& [agent, rel] : resolved) {
    Relation closed = s5_closure(rel);
    PairList pairs;
    for (Index u = 0; u < carrier.size(); ++u)
      for (Index v : closed.successors(u)) pairs.emplace_back(carrier[u], carrier[v]);
    out.emplace(agent, std::move(pairs));
  }
  return out;
}

std::shared_ptr<const PointedEventModel> make_semi_private(Formula phi1, Formula phi2,
                                                           const std::set<Agent>& informed,
                                                           const std::set<Agent>& roster, std::string label) {
  for (Agent a : informed)
    if (!roster.contains(a)) throw StructuralError("informed agent '" + a.str() + "' is not in the roster");
  RelationMap relations;
  for (Agent a : roster) {
    Relation r(2);
    r.add(0, 0);
    r.add(1, 1);
    if (!informed.contains(a)) {
      r.add(0, 1);
      r.add(1, 0);
    }
    r.finalize();
    relations.emplace(a, std::move(r));
  }
  auto model = std::make_shared<const EventModel>(std::vector<std::string>{"e1", "e2"}, std::move(relations),
                                                  std::vector<Formula>{std::move(phi1), std::move(phi2)},
                                                  std::vector<std::vector<Literal>>(2), std::move(label));
  return single_pointed(std::move(model), 0);
}

std::set<Agent> agents_of(const RelationMap& relations) {
  std::set<Agent> out;
  for (const auto& [agent, rel] : relations) out.insert(agent);
  return out;
}

}  // namespace delcheck
