// Runs the nine acceptance criteria and prints one PASS/FAIL line for each.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "delcheck/fastcheck.hpp"
#include "delcheck/oracle.hpp"
#include "delcheck/reduction.hpp"
#include "delcheck/semantics.hpp"
#include "support.hpp"

using namespace delcheck;
using namespace delcheck::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

bool verdict(const Instance& in) { return evaluate_pointed(in.model, in.formula); }

std::vector<Instance> compliance_pool;

Instance reduce(Construction c, const Qbf& q) {
  switch (c) {
    case Construction::multi1:
      return reduce_multi1(q);
    case Construction::single2:
      return reduce_single2(q);
    case Construction::semiprivate:
      return reduce_semiprivate(q);
    case Construction::delta2:
      break;
  }
  throw Error("delta2 takes a propositional formula");
}

void semantics_fixtures(Outcome& o) {
  auto m = coin_model();
  const char* text = "[upd:flip] (Khat b h & ~K b h & K a h)";
  EventTable as_listed{{"flip", coin_flip(kA, kB)}};
  bool listed = evaluate(*m, 0, parse_formula(text, {&as_listed}));
  EventTable swapped{{"flip", coin_flip(kB, kA)}};
  bool other = evaluate(*m, 0, parse_formula(text, {&swapped}));
  o.detail << "flip with R_a linking the events: " << (listed ? "true" : "false")
           << ", with R_b linking them: " << (other ? "true" : "false") << "; ";
  o.require(listed, "coin flip formula is false at w1");

  EpistemicModel chains = chain_model({true, true, false, true}, 0);
  std::vector<std::string> where;
  const Formula chi2 = *chi_formulas(2).detects_z1;
  for (Index w = 0; w < chains.size(); ++w)
    if (evaluate(chains, w, chi2)) where.push_back(chains.world_name(w));
  o.require(where == std::vector<std::string>{"z1c2w0"}, "chi_2 is not localized");
  o.detail << "chi_2 true at " << where.size() << " world(s)";
}

void exhaustive_soundness(Outcome& o) {
  std::map<std::string, std::pair<int, int>> tally;  // agreements, cases
  for (const Formula& matrix : two_variable_templates()) {
    Qbf q = exists_forall(matrix);
    const bool truth = qbf_eval(q);
    for (Construction c : {Construction::multi1, Construction::single2, Construction::semiprivate}) {
      Instance in = reduce(c, q);
      compliance_pool.push_back(in);
      auto& [agree, total] = tally[to_string(c)];
      ++total;
      agree += verdict(in) == truth;
    }
    auto alpha = lexmax_sat(matrix, {Prop("x1"), Prop("x2")});
    if (!alpha) continue;
    Instance in = reduce_delta2(matrix);
    compliance_pool.push_back(in);
    auto& [agree, total] = tally["delta2"];
    ++total;
    agree += verdict(in) == alpha->at(Prop("x2"));
  }
  for (const auto& [name, counts] : tally) {
    o.detail << name << " " << counts.first << "/" << counts.second << " ";
    o.require(counts.first == counts.second, name + " disagrees with the oracle");
  }
}

void random_soundness(Outcome& o) {
  Rng rng(2024);
  std::map<std::string, std::pair<int, int>> tally;
  for (int i = 0; i < 10; ++i) {
    Qbf q = random_qbf(rng, 4, true);
    const bool truth = qbf_eval(q);
    for (Construction c : {Construction::multi1, Construction::single2}) {
      auto& [agree, total] = tally[to_string(c)];
      ++total;
      if (instance_size_estimate(c, 4).max_product_worlds > 200000) continue;
      Instance in = reduce(c, q);
      compliance_pool.push_back(in);
      agree += verdict(in) == truth;
    }
  }
  for (const auto& [name, counts] : tally) {
    o.detail << name << " " << counts.first << "/" << counts.second << " ";
    o.require(counts.first == counts.second, name + " disagrees with the oracle");
  }
}

void fast_equivalence(Outcome& o) {
  Rng rng(4);
  FormulaGenerator gen(rng, {{kA}, props_named({"p", "q"}), 3, 3, false, false});
  int agree = 0;
  for (int i = 0; i < 200; ++i) {
    auto m = random_s5_model(rng, 1 + rng() % 8, {kA}, props_named({"p", "q"}));
    FragmentInstance inst{m, static_cast<Index>(rng() % m->size()), gen.formula(5)};
    o.require(accepts_fragment(inst).accepted, "generated instance rejected");
    agree += fragment_check(inst).verdict == evaluate(*m, inst.world, inst.formula);
  }
  o.detail << agree << "/200 agree";
  o.require(agree == 200, "fast and naive verdicts differ");
}

void contraction_bisimilarity(Outcome& o) {
  Rng rng(5);
  FormulaGenerator gen(rng, {{kA}, props_named({"p", "q"}), 0, 3});
  int applied = 0, ok = 0;
  while (applied < 100) {
    auto m = random_s5_model(rng, 1 + rng() % 8, {kA}, props_named({"p", "q"}));
    auto e = gen.event_model(2);
    Index w0 = static_cast<Index>(rng() % m->size());
    Index e0 = e->designated.front();
    if (!evaluate(*m, w0, e->model->pre(e0))) continue;
    ++applied;
    ProductUpdate full = product_update(*m, *e->model);
    EpistemicModel small = contract_update(*m, w0, *e->model, e0);
    for (Index i = 0; i < full.worlds.size(); ++i)
      if (full.worlds[i].origin_world == w0 && full.worlds[i].origin_event == e0)
        ok += bisimilar(full.model, i, small, small.world_index(m->world_name(w0)));
  }
  o.detail << ok << "/100 bisimilar";
  o.require(ok == 100, "contracted model not bisimilar to the product");
}

void memoization_gap(Outcome& o) {
  std::vector<std::uint64_t> naive, memo;
  for (unsigned k = 4; k <= 12; ++k) {
    FragmentInstance inst = nested_update_family(k);
    naive.push_back(call_count_probe(*inst.model, inst.world, inst.formula).recursive_calls);
    memo.push_back(fragment_check(inst).stats.memo_entries);
  }
  double worst_ratio = 1e9;
  for (std::size_t i = 1; i < naive.size(); ++i)
    worst_ratio = std::min(worst_ratio, static_cast<double>(naive[i]) / static_cast<double>(naive[i - 1]));
  long long worst_second = 0;
  for (std::size_t i = 2; i < memo.size(); ++i)
    worst_second = std::max(worst_second, std::llabs(static_cast<long long>(memo[i]) - 2 * static_cast<long long>(memo[i - 1]) +
                                                     static_cast<long long>(memo[i - 2])));
  o.require(worst_ratio >= 1.9, "naive growth ratio below 1.9");
  o.require(worst_second <= 2, "memo entries not growing by a constant step");

  FragmentInstance k16 = nested_update_family(16);
  Stopwatch clock;
  FastResult fast = fragment_check(k16);
  double fast_seconds = clock.seconds();
  o.require(fast_seconds < 1.0, "fast checker too slow at k=16");
  bool stopped = false;
  std::uint64_t spent = 0;
  try {
    call_count_probe(*k16.model, k16.world, k16.formula, std::uint64_t{1} << 16);
  } catch (const BudgetExceeded& e) {
    stopped = true;
    spent = e.calls();
  }
  o.require(stopped && spent >= (std::uint64_t{1} << 16), "naive evaluation not budget-stopped at k=16");
  o.detail << "min naive ratio " << worst_ratio << ", max memo second difference " << worst_second
           << ", fast k=16 " << fast_seconds * 1000 << " ms (" << fast.stats.memo_entries << " entries), naive k=16 "
           << (stopped ? "budget-stopped" : "completed");
}

void s5_preservation(Outcome& o) {
  Rng rng(7);
  FormulaGenerator gen(rng, {{kA, kB}, props_named({"p", "q"}), 0, 4, true});
  int ok = 0, empty = 0;
  for (int i = 0; i < 100; ++i) {
    auto m = random_s5_model(rng, 1 + rng() % 6, {kA, kB}, props_named({"p", "q"}));
    ProductUpdate u = product_update(*m, *gen.event_model(2)->model);
    if (u.model.is_empty()) {
      ++empty;
      ++ok;
      continue;
    }
    ok += validate_s5(u.model).ok;
  }
  o.detail << ok << "/100 S5 (" << empty << " empty products)";
  o.require(ok == 100, "a product is not S5");
}

void restriction_compliance(Outcome& o) {
  int violations = 0;
  for (const Instance& in : compliance_pool) {
    const std::string c = in.provenance->construction;
    std::set<std::string> agents, props;
    for (Agent a : in.agents) agents.insert(a.str());
    for (Prop p : in.props) props.insert(p.str());
    bool post = false;
    for_each_node(in.formula, [&](const Formula& n) {
      if (n.kind() == NodeKind::update && n.event().model->has_postconditions()) post = true;
    });
    bool ok = true;
    if (c == "single2" || c == "semiprivate") {
      ok = agents == std::set<std::string>{"a", "b"} && props == std::set<std::string>{"z0", "z1", "z2"} && !post;
    } else {
      ok = agents.size() == 1 && post == (c == "delta2");
    }
    violations += !ok;
  }
  o.detail << compliance_pool.size() << " instances, " << violations << " violations";
  o.require(violations == 0, "restriction violated");
}

std::optional<Assignment> lexmax_by_enumeration(const Formula& f, const std::vector<Prop>& order) {
  const std::size_t n = order.size();
  for (std::uint64_t code = std::uint64_t{1} << n; code-- > 0;) {
    Assignment alpha;
    for (std::size_t i = 0; i < n; ++i) alpha[order[i]] = (code >> (n - 1 - i)) & 1;
    if (eval_propositional(f, alpha)) return alpha;
  }
  return std::nullopt;
}

void oracle_self_tests(Outcome& o) {
  int lex_ok = 0, lex_total = 0;
  std::vector<std::vector<Prop>> orders{{Prop("x1"), Prop("x2")}, {Prop("x2"), Prop("x1")}};
  for (const Formula& f : two_variable_templates())
    for (const auto& order : orders) {
      ++lex_total;
      lex_ok += lexmax_sat(f, order) == lexmax_by_enumeration(f, order);
    }
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    std::vector<Prop> vars;
    for (std::size_t k = 1; k <= 3 + rng() % 2; ++k) vars.emplace_back("x" + std::to_string(k));
    Formula f = random_propositional(rng, vars, 4);
    ++lex_total;
    lex_ok += lexmax_sat(f, vars) == lexmax_by_enumeration(f, vars);
  }
  int norm_ok = 0;
  for (int i = 0; i < 500; ++i) {
    Qbf q = random_qbf(rng, 1 + rng() % 6, false);
    Qbf n = normalize_alternating(q);
    norm_ok += is_normalized(n) && qbf_eval(n) == qbf_eval(q);
  }
  o.detail << "lexmax " << lex_ok << "/" << lex_total << ", normalization " << norm_ok << "/500";
  o.require(lex_ok == lex_total, "lexmax disagrees with enumeration");
  o.require(norm_ok == 500, "normalization changed a truth value");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"semantics fixtures", semantics_fixtures},
      {"reduction soundness, exhaustive n=2", exhaustive_soundness},
      {"reduction soundness, random n=4", random_soundness},
      {"fast checker equals naive evaluation", fast_equivalence},
      {"contraction bisimilar to product", contraction_bisimilarity},
      {"memoization gap", memoization_gap},
      {"S5 preservation", s5_preservation},
      {"restriction compliance", restriction_compliance},
      {"oracle self-tests", oracle_self_tests},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    Stopwatch clock;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::printf("criterion %zu %s: %s (%.2f s) %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                clock.seconds(), o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
