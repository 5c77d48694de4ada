#include "delcheck/reduction.hpp"

#include <algorithm>
#include <unordered_map>

namespace delcheck {

namespace {

const Agent kA("a");
const Agent kB("b");

Prop z(int i) { return Prop("z" + std::to_string(i)); }

Formula atom(Prop p) { return Formula::atom(p); }
Formula neg(Formula f) { return Formula::negation(std::move(f)); }
Formula conj(Formula l, Formula r) { return Formula::conjunction(std::move(l), std::move(r)); }

Formula all_of(const std::vector<Formula>& conjuncts) {
  if (conjuncts.empty()) throw Error("empty conjunction");
  return conjunction_of(conjuncts, conjuncts.front());
}

/// Replaces atoms by formulas, preserving node sharing.
class Substitution {
 public:
  explicit Substitution(std::map<Prop, Formula> table) : table_(std::move(table)) {}

  Formula apply(const Formula& f) {
    if (auto it = done_.find(f.identity()); it != done_.end()) return it->second;
    Formula out = rebuild(f);
    done_.emplace(f.identity(), out);
    return out;
  }

 private:
  Formula rebuild(const Formula& f) {
    switch (f.kind()) {
      case NodeKind::atom:
        if (auto it = table_.find(f.prop()); it != table_.end()) return it->second;
        return f;
      case NodeKind::negation:
        return neg(apply(f.operand()));
      case NodeKind::conjunction:
        return conj(apply(f.left()), apply(f.right()));
      case NodeKind::knowledge:
        return Formula::knows(f.agent(), apply(f.operand()));
      case NodeKind::update:
        throw Error("cannot substitute inside an update operator");
    }
    return f;
  }

  std::map<Prop, Formula> table_;
  std::unordered_map<const void*, Formula> done_;
};

/// Incrementally built chi family with shared nodes.
class ChiBuilder {
 public:
  ChiBuilder() : interior_(conj(neg(atom(z(1))), neg(atom(z(2))))) {
    a_.push_back(atom(z(0)));
    b_.push_back(a_.front());
  }

  Formula a_chain(unsigned j) { return grow(j), a_[j]; }
  Formula b_chain(unsigned j) { return grow(j), b_[j]; }

  Formula detects_z1(unsigned j) {
    if (j == 0) throw Error("chi_j is defined for j >= 1");
    while (z1_.size() < j) {
      unsigned k = static_cast<unsigned>(z1_.size()) + 1;
      z1_.push_back(all_of({atom(z(1)), neg(atom(z(2))), b_chain(k), neg(b_chain(k - 1))}));
    }
    return z1_[j - 1];
  }

  Formula detects_z2(unsigned j) {
    if (j == 0) throw Error("chi'_j is defined for j >= 1");
    while (z2_.size() < j) {
      unsigned k = static_cast<unsigned>(z2_.size()) + 1;
      z2_.push_back(all_of({neg(atom(z(1))), atom(z(2)), a_chain(k), neg(a_chain(k - 1))}));
    }
    return z2_[j - 1];
  }

  Formula possible_b_z2(unsigned j) {
    while (kb_z2_.size() < j) kb_z2_.push_back(possible(kB, detects_z2(static_cast<unsigned>(kb_z2_.size()) + 1)));
    return kb_z2_[j - 1];
  }

 private:
  void grow(unsigned j) {
    while (a_.size() <= j) {
      Formula next_b = possible(kB, conj(interior_, a_.back()));
      Formula next_a = possible(kA, conj(interior_, b_.back()));
      a_.push_back(next_a);
      b_.push_back(next_b);
    }
  }

  Formula interior_;
  std::vector<Formula> a_, b_, z1_, z2_, kb_z2_;
};

NamedRelations s5_closed(NamedRelations rel, const std::vector<std::string>& carrier) {
  return s5_closure(rel, carrier);
}

void add_clique(PairList& list, const std::vector<std::string>& members) {
  for (const auto& u : members)
    for (const auto& v : members) list.emplace_back(u, v);
}

std::shared_ptr<const PointedEventModel> event_model(std::vector<std::string> events, NamedRelations rel,
                                                     std::map<std::string, Formula> pre,
                                                     std::map<std::string, std::vector<Literal>> post,
                                                     std::vector<Index> designated, std::string label) {
  rel = s5_closed(std::move(rel), events);
  auto model = std::make_shared<const EventModel>(make_event_model(events, rel, pre, post, std::move(label)));
  Pointedness kind = designated.size() == 1 ? Pointedness::single : Pointedness::multi;
  return make_pointed(std::move(model), std::move(designated), kind);
}

std::string render_prefix(const Qbf& q) {
  std::string out;
  for (const auto& [quant, var] : q.prefix) {
    if (!out.empty()) out += ' ';
    out += (quant == Quantifier::exists ? "e " : "a ") + var.str();
  }
  return out;
}

struct Prepared {
  Qbf normalized;
  std::vector<Prop> vars;  // prefix order
  Provenance provenance;
};

Prepared prepare(const Qbf& q, Construction c) {
  Prepared p{is_normalized(q) ? q : normalize_alternating(q), {}, {}};
  for (const auto& qv : p.normalized.prefix) p.vars.push_back(qv.var);
  if (p.vars.empty()) throw Error("QBF has no variables");
  if (p.vars.size() % 2 != 0 || !is_normalized(p.normalized)) throw Error("QBF prefix is not alternating");
  p.provenance.construction = to_string(c);
  p.provenance.source = render_qbf(q);
  p.provenance.details["prefix"] = render_prefix(p.normalized);
  std::string dummies;
  for (Prop d : p.normalized.dummies) dummies += (dummies.empty() ? "" : " ") + d.str();
  if (!dummies.empty()) p.provenance.details["dummies"] = dummies;
  return p;
}

Instance finish(std::shared_ptr<const EpistemicModel> model, Index designated, Formula formula,
                std::optional<bool> expected, Provenance provenance) {
  Instance instance{{}, {}, make_pointed(std::move(model), {designated}, Pointedness::single), std::move(formula),
                    expected, std::move(provenance)};
  fill_vocabulary(instance);
  return instance;
}

Formula variable_substituted(const Qbf& q, const std::vector<Prop>& vars,
                             const std::function<Formula(std::size_t)>& replacement, Formula falsum) {
  std::map<Prop, Formula> table;
  for (std::size_t i = 0; i < vars.size(); ++i) table.emplace(vars[i], replacement(i));
  table.emplace(default_falsum_prop(), std::move(falsum));
  return Substitution(std::move(table)).apply(q.matrix);
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

}  // namespace

const char* to_string(Construction c) {
  switch (c) {
    case Construction::delta2:
      return "delta2";
    case Construction::multi1:
      return "multi1";
    case Construction::single2:
      return "single2";
    case Construction::semiprivate:
      return "semiprivate";
  }
  return "?";
}

Construction parse_construction(std::string_view name) {
  for (Construction c :
       {Construction::delta2, Construction::multi1, Construction::single2, Construction::semiprivate})
    if (name == to_string(c)) return c;
  throw Error("unknown construction '" + std::string(name) + "'");
}

ChiFormulas chi_formulas(unsigned j) {
  ChiBuilder chi;
  ChiFormulas out{chi.a_chain(j), chi.b_chain(j), std::nullopt, std::nullopt};
  if (j >= 1) {
    out.detects_z1 = chi.detects_z1(j);
    out.detects_z2 = chi.detects_z2(j);
  }
  return out;
}

EpistemicModel chain_model(const std::vector<bool>& alpha, unsigned z2_chains) {
  std::vector<std::string> worlds{"c"};
  std::map<std::string, std::vector<Prop>> valuation{{"c", {z(1), z(2)}}};
  NamedRelations rel{{kA, {}}, {kB, {}}};
  std::vector<std::string> a_clique{"c"}, b_clique{"c"};

  auto chain = [&](const std::string& tag, unsigned steps, Prop first_prop, bool starts_with_b) {
    std::vector<std::string> members;
    for (unsigned k = 0; k <= steps; ++k) members.push_back(tag + "w" + std::to_string(k));
    worlds.insert(worlds.end(), members.begin(), members.end());
    valuation[members.front()].push_back(first_prop);
    valuation[members.back()].push_back(z(0));
    for (unsigned s = 1; s <= steps; ++s) {
      bool b_step = (s % 2 == 1) == starts_with_b;
      rel[b_step ? kB : kA].emplace_back(members[s - 1], members[s]);
    }
    return members.front();
  };

  for (unsigned j = 1; j <= alpha.size(); ++j)
    if (alpha[j - 1]) a_clique.push_back(chain("z1c" + std::to_string(j), j, z(1), true));
  for (unsigned i = 1; i <= z2_chains; ++i) b_clique.push_back(chain("z2c" + std::to_string(i), i, z(2), false));
  add_clique(rel[kA], a_clique);
  add_clique(rel[kB], b_clique);
  return make_model(worlds, s5_closed(std::move(rel), worlds), valuation);
}

// ---------------------------------------------------------------------------

Instance reduce_delta2(const Formula& f, std::optional<std::vector<Prop>> ordering, const ReductionOptions& options) {
  if (!is_propositional(f)) throw Error("delta2 input must be a propositional formula");
  std::vector<Prop> vars = ordering ? *ordering : natural_order(variables_of(f));
  if (vars.empty()) throw Error("delta2 input needs at least one variable");
  std::optional<Assignment> lexmax = lexmax_sat(f, vars);
  if (!lexmax) throw UnsatisfiableInput("input formula is unsatisfiable");

  std::string marker = "z";
  auto used = [&](const std::string& name) {
    return std::any_of(vars.begin(), vars.end(), [&](Prop p) { return p.str() == name; });
  };
  for (int k = 1; used(marker); ++k) marker = "z_" + std::to_string(k);
  const Prop zp(marker);
  const std::size_t n = vars.size();

  std::vector<std::string> worlds{"w0", "w1"};
  NamedRelations rel{{kA, {{"w0", "w1"}}}};
  auto model = std::make_shared<const EpistemicModel>(make_model(worlds, s5_closed(rel, worlds), {{"w0", {zp}}}));

  Formula body = Substitution({{default_falsum_prop(), bot(zp)}}).apply(f);
  const Formula t = top(zp);
  const Formula is_z = atom(zp);
  const Formula not_z = neg(atom(zp));
  const std::vector<std::string> events{"e1", "e2", "e3"};
  const NamedRelations full{{kA, {{"e1", "e2"}, {"e2", "e3"}}}};

  Formula chi = possible(kA, atom(vars.back()));
  for (std::size_t i = n; i-- > 0;) {
    Formula witness = possible(kA, conj(atom(vars[i]), body));
    auto decide = event_model(events, full, {{"e1", is_z}, {"e2", conj(not_z, witness)}, {"e3", conj(not_z, neg(witness))}},
                              {{"e2", {Literal{vars[i], false}}}, {"e3", {Literal{vars[i], true}}}}, {0},
                              "Ep" + std::to_string(i + 1));
    chi = Formula::box(decide, chi);
  }
  for (std::size_t i = n; i-- > 0;) {
    auto guess = event_model(events, full, {{"e1", is_z}, {"e2", not_z}, {"e3", not_z}},
                             {{"e2", {Literal{vars[i], false}}}}, {0}, "E" + std::to_string(i + 1));
    chi = Formula::box(guess, chi);
  }

  Provenance prov{to_string(Construction::delta2), render_formula(f), {}};
  std::string order;
  for (Prop p : vars) order += (order.empty() ? "" : " ") + p.str();
  prov.details["ordering"] = order;
  prov.details["marker"] = marker;
  std::optional<bool> expected;
  if (options.compute_expected) expected = lexmax->at(vars.back());
  return finish(model, 0, chi, expected, std::move(prov));
}

Instance reduce_multi1(const Qbf& q, const ReductionOptions& options) {
  Prepared p = prepare(q, Construction::multi1);
  const auto& vars = p.vars;
  std::vector<std::string> worlds{"w0"};
  std::map<std::string, std::vector<Prop>> valuation;
  for (Prop v : vars) {
    worlds.push_back("w_" + v.str());
    valuation[worlds.back()] = {v};
  }
  NamedRelations rel{{kA, {}}};
  add_clique(rel[kA], worlds);
  auto model = std::make_shared<const EpistemicModel>(make_model(worlds, rel, valuation));

  const Formula t = top(vars.front());
  Formula chi = variable_substituted(p.normalized, vars, [&](std::size_t i) { return possible(kA, atom(vars[i])); },
                                     bot(vars.front()));
  for (std::size_t i = vars.size(); i-- > 0;) {
    auto drop = event_model({"t", "f"}, {{kA, {}}}, {{"t", t}, {"f", neg(atom(vars[i]))}}, {}, {0, 1},
                            "E" + std::to_string(i + 1));
    // Odd positions (1-based) are existential.
    chi = i % 2 == 0 ? diamond(drop, chi) : Formula::box(drop, chi);
  }
  std::optional<bool> expected;
  if (options.compute_expected) expected = qbf_eval(p.normalized);
  return finish(model, 0, chi, expected, std::move(p.provenance));
}

Instance reduce_single2(const Qbf& q, const ReductionOptions& options) {
  Prepared p = prepare(q, Construction::single2);
  const unsigned n = static_cast<unsigned>(p.vars.size());
  auto model = std::make_shared<const EpistemicModel>(chain_model(std::vector<bool>(n, true), n));
  ChiBuilder chi;
  const Formula t = top(z(0));

  // xi_{n+1} first, then outward.
  Formula xi = variable_substituted(
      p.normalized, p.vars, [&](std::size_t i) { return possible(kA, chi.detects_z1(static_cast<unsigned>(i) + 1)); },
      bot(z(0)));
  for (unsigned i = n; i >= 1; --i) {
    std::vector<Formula> guard{atom(z(1)), atom(z(2))};
    for (unsigned j = 1; j <= i; ++j) guard.push_back(neg(chi.possible_b_z2(j)));
    for (unsigned j = i + 1; j <= n; ++j) guard.push_back(chi.possible_b_z2(j));
    if (i % 2 == 1) {
      guard.push_back(xi);
      xi = possible(kB, possible(kA, all_of(guard)));
    } else {
      xi = Formula::knows(kB, Formula::knows(kA, implication(all_of(guard), xi)));
    }
  }

  Formula formula = xi;
  for (unsigned i = n; i >= 1; --i) {
    NamedRelations rel{{kB, {{"f1", "f2"}, {"f1", "f3"}, {"f2", "f3"}}}, {kA, {{"f2", "f4"}, {"f3", "f5"}}}};
    Formula not_z2_chain = neg(chi.detects_z2(i));
    auto update = event_model({"f1", "f2", "f3", "f4", "f5"}, rel,
                              {{"f1", t}, {"f2", t}, {"f3", t}, {"f4", not_z2_chain},
                               {"f5", conj(not_z2_chain, neg(chi.detects_z1(i)))}},
                              {}, {0}, "E" + std::to_string(i));
    formula = Formula::box(update, formula);
  }
  std::optional<bool> expected;
  if (options.compute_expected) expected = qbf_eval(p.normalized);
  return finish(model, 0, formula, expected, std::move(p.provenance));
}

Instance reduce_semiprivate(const Qbf& q, const ReductionOptions& options) {
  Prepared p = prepare(q, Construction::semiprivate);
  const unsigned n = static_cast<unsigned>(p.vars.size());
  auto model = std::make_shared<const EpistemicModel>(chain_model(std::vector<bool>(n, true), 3 * n));
  ChiBuilder chi;
  const Formula t = top(z(0));
  const std::set<Agent> roster{kA, kB};

  Formula xi = variable_substituted(
      p.normalized, p.vars, [&](std::size_t i) { return possible(kA, chi.detects_z1(static_cast<unsigned>(i) + 1)); },
      bot(z(0)));
  for (unsigned i = n; i >= 1; --i) {
    std::vector<Formula> passed;
    for (unsigned j = 1; j <= i; ++j) passed.push_back(neg(chi.possible_b_z2(j)));
    std::vector<Formula> central{atom(z(1)), atom(z(2))};
    central.insert(central.end(), passed.begin(), passed.end());
    for (unsigned j = i + 1; j <= n; ++j) central.push_back(chi.possible_b_z2(j));
    if (i % 2 == 1) {
      central.push_back(xi);
      xi = possible(kB, conj(all_of(passed), possible(kA, all_of(central))));
    } else {
      xi = Formula::knows(kB, implication(all_of(passed), Formula::knows(kA, implication(all_of(central), xi))));
    }
  }

  Formula formula = xi;
  for (unsigned i = n; i >= 1; --i) {
    const std::string tag = std::to_string(i);
    Formula not_here = neg(chi.detects_z2(i));
    Formula third = implication(conj(neg(chi.possible_b_z2(i + 2 * n)), atom(z(2))), not_here);
    Formula third_z1 = implication(conj(neg(possible(kA, chi.possible_b_z2(i + 2 * n))), atom(z(1))),
                                   neg(chi.detects_z1(i)));
    auto e3 = make_semi_private(t, conj(third, third_z1), {kB}, roster, "E3_" + tag);
    auto e2 = make_semi_private(t, implication(conj(neg(chi.possible_b_z2(i + n)), atom(z(2))), not_here), {kB},
                                roster, "E2_" + tag);
    auto e1 = make_semi_private(neg(chi.detects_z2(i + n)), neg(chi.detects_z2(i + 2 * n)), {kA}, roster,
                                "E1_" + tag);
    formula = Formula::box(e1, Formula::box(e2, Formula::box(e3, formula)));
  }
  std::optional<bool> expected;
  if (options.compute_expected) expected = qbf_eval(p.normalized);
  return finish(model, 0, formula, expected, std::move(p.provenance));
}

// ---------------------------------------------------------------------------

SizeEstimate instance_size_estimate(Construction c, unsigned n) {
  SizeEstimate out;
  const std::uint64_t m = n;
  std::uint64_t per_update = 1;
  unsigned updates = 0;
  switch (c) {
    case Construction::delta2:
      out.initial_worlds = 2;
      per_update = 3;
      updates = 2 * n;
      break;
    case Construction::multi1:
      out.initial_worlds = m + 1;
      per_update = 2;
      updates = n;
      break;
    case Construction::single2:
      // Central world, z1-chains of 1..n steps, z2-chains of 1..n steps.
      out.initial_worlds = 1 + 2 * (m * (m + 1) / 2 + m);
      per_update = 5;
      updates = n;
      break;
    case Construction::semiprivate:
      out.initial_worlds = 1 + (m * (m + 1) / 2 + m) + (3 * m * (3 * m + 1) / 2 + 3 * m);
      per_update = 2;
      updates = 3 * n;
      break;
  }
  out.max_product_worlds = out.initial_worlds;
  for (unsigned k = 0; k < updates; ++k) out.max_product_worlds = saturating_mul(out.max_product_worlds, per_update);
  return out;
}

SizeEstimate instance_size_estimate(const Instance& instance) {
  SizeEstimate out;
  out.initial_worlds = instance.model.model->size();
  out.max_product_worlds = out.initial_worlds;
  // Only updates on the main path multiply the model; updates nested in
  // preconditions act on copies that are never larger.
  for (const Formula* cur = &instance.formula;;) {
    if (cur->kind() == NodeKind::update) {
      out.max_product_worlds = saturating_mul(out.max_product_worlds, cur->event().model->size());
      cur = &cur->operand();
    } else if (cur->kind() == NodeKind::negation && cur->operand().kind() == NodeKind::update) {
      cur = &cur->operand();
    } else {
      break;
    }
  }
  out.formula_nodes = formula_stats(instance.formula).node_count;
  return out;
}

}  // namespace delcheck
