#include "delcheck/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>

namespace delcheck {

bool is_propositional(const Formula& f) {
  bool ok = true;
  for_each_node(f, [&](const Formula& n) {
    if (n.kind() == NodeKind::knowledge || n.kind() == NodeKind::update) ok = false;
  });
  return ok;
}

std::set<Prop> variables_of(const Formula& f) {
  std::set<Prop> out;
  for_each_node(f, [&](const Formula& n) {
    if (n.kind() == NodeKind::atom && n.prop() != default_falsum_prop()) out.insert(n.prop());
  });
  return out;
}

Qbf make_qbf(std::vector<QuantifiedVar> prefix, Formula matrix) {
  std::set<Prop> bound;
  for (const auto& qv : prefix) {
    if (qv.var == default_falsum_prop()) throw Error("'" + qv.var.str() + "' is reserved");
    if (!bound.insert(qv.var).second) throw Error("variable '" + qv.var.str() + "' is quantified twice");
  }
  if (!is_propositional(matrix)) throw Error("QBF matrix must be propositional");
  for (Prop p : variables_of(matrix))
    if (!bound.contains(p)) throw Error("free variable '" + p.str() + "' in QBF matrix");
  return Qbf{std::move(prefix), std::move(matrix), {}};
}

bool eval_propositional(const Formula& f, const Assignment& alpha) {
  switch (f.kind()) {
    case NodeKind::atom: {
      if (f.prop() == default_falsum_prop()) return false;
      auto it = alpha.find(f.prop());
      if (it == alpha.end()) throw Error("unassigned variable '" + f.prop().str() + "'");
      return it->second;
    }
    case NodeKind::negation:
      return !eval_propositional(f.operand(), alpha);
    case NodeKind::conjunction:
      return eval_propositional(f.left(), alpha) && eval_propositional(f.right(), alpha);
    default:
      throw Error("formula is not propositional");
  }
}

namespace {

bool qbf_expand(const Qbf& q, std::size_t depth, Assignment& alpha) {
  if (depth == q.prefix.size()) return eval_propositional(q.matrix, alpha);
  const auto& [quantifier, var] = q.prefix[depth];
  bool any = false;
  bool all = true;
  for (bool value : {true, false}) {
    alpha[var] = value;
    bool r = qbf_expand(q, depth + 1, alpha);
    any = any || r;
    all = all && r;
  }
  alpha.erase(var);
  return quantifier == Quantifier::exists ? any : all;
}

}  // namespace

bool qbf_eval(const Qbf& q) {
  for (Prop p : variables_of(q.matrix)) {
    bool bound = std::any_of(q.prefix.begin(), q.prefix.end(), [p](const auto& qv) { return qv.var == p; });
    if (!bound) throw Error("free variable '" + p.str() + "' in QBF matrix");
  }
  std::size_t used = 0;
  for (const auto& qv : q.prefix)
    if (!q.dummies.contains(qv.var)) ++used;
  if (used > kMaxOracleVariables) throw Error("QBF oracle is limited to 20 variables");
  // Dummies never occur in the matrix, so expanding them is pointless but
  // harmless; skip them to keep normalized inputs cheap.
  Qbf pruned{{}, q.matrix, {}};
  for (const auto& qv : q.prefix)
    if (!q.dummies.contains(qv.var)) pruned.prefix.push_back(qv);
  Assignment alpha;
  return qbf_expand(pruned, 0, alpha);
}

bool is_normalized(const Qbf& q) {
  if (q.prefix.size() % 2 != 0) return false;
  for (std::size_t i = 0; i < q.prefix.size(); ++i) {
    Quantifier expected = i % 2 == 0 ? Quantifier::exists : Quantifier::forall;
    if (q.prefix[i].quantifier != expected) return false;
  }
  return true;
}

Qbf normalize_alternating(const Qbf& q) {
  std::set<std::string> taken;
  for (const auto& qv : q.prefix) taken.insert(qv.var.str());
  for (Prop p : variables_of(q.matrix)) taken.insert(p.str());
  int counter = 0;
  auto fresh = [&] {
    std::string name;
    do name = "_d" + std::to_string(++counter);
    while (taken.contains(name));
    taken.insert(name);
    return Prop(name);
  };
  Qbf out{{}, q.matrix, q.dummies};
  auto expected = [&] { return out.prefix.size() % 2 == 0 ? Quantifier::exists : Quantifier::forall; };
  for (const auto& qv : q.prefix) {
    if (qv.quantifier != expected()) {
      Prop d = fresh();
      out.prefix.push_back({expected(), d});
      out.dummies.insert(d);
    }
    out.prefix.push_back(qv);
  }
  if (out.prefix.size() % 2 != 0) {
    Prop d = fresh();
    out.prefix.push_back({Quantifier::forall, d});
    out.dummies.insert(d);
  }
  return out;
}

std::optional<Assignment> lexmax_sat(const Formula& f, const std::vector<Prop>& ordering) {
  if (!is_propositional(f)) throw Error("lexmax_sat needs a propositional formula");
  if (ordering.size() > kMaxOracleVariables) throw Error("lexmax oracle is limited to 20 variables");
  std::set<Prop> ordered(ordering.begin(), ordering.end());
  if (ordered.size() != ordering.size()) throw Error("ordering lists a variable twice");
  for (Prop p : variables_of(f))
    if (!ordered.contains(p)) throw Error("unknown variable '" + p.str() + "' (not in the ordering)");
  const std::size_t n = ordering.size();
  // Bit (n-1-i) of `code` holds ordering[i], so counting down from all-ones
  // walks assignments in decreasing lexicographic order.
  for (std::uint64_t code = (std::uint64_t{1} << n); code-- > 0;) {
    Assignment alpha;
    for (std::size_t i = 0; i < n; ++i) alpha[ordering[i]] = (code >> (n - 1 - i)) & 1;
    if (eval_propositional(f, alpha)) return alpha;
  }
  return std::nullopt;
}

std::vector<Prop> natural_order(const std::set<Prop>& vars) {
  std::vector<Prop> out(vars.begin(), vars.end());
  auto key = [](const std::string& s) {
    std::size_t cut = s.size();
    while (cut > 0 && std::isdigit(static_cast<unsigned char>(s[cut - 1]))) --cut;
    std::string stem = s.substr(0, cut);
    std::string digits = s.substr(cut);
    return std::make_tuple(stem, digits.size(), digits);
  };
  std::sort(out.begin(), out.end(), [&](Prop a, Prop b) { return key(a.str()) < key(b.str()); });
  return out;
}

// ---------------------------------------------------------------------------

bool bisimilar(const EpistemicModel& m1, Index w1, const EpistemicModel& m2, Index w2) {
  if (w1 >= m1.size() || w2 >= m2.size()) throw StructuralError("world outside its model");
  const Index n1 = static_cast<Index>(m1.size());
  const Index n = n1 + static_cast<Index>(m2.size());
  auto model_of = [&](Index u) -> const EpistemicModel& { return u < n1 ? m1 : m2; };
  auto local = [&](Index u) { return u < n1 ? u : u - n1; };

  std::set<Agent> agents = agents_of(m1.relations());
  for (Agent a : agents_of(m2.relations())) agents.insert(a);

  // Initial partition: worlds with identical valuations.
  std::vector<Index> block(n);
  {
    std::map<std::vector<Prop>, Index> ids;
    for (Index u = 0; u < n; ++u) {
      auto [it, inserted] = ids.emplace(model_of(u).true_props(local(u)), static_cast<Index>(ids.size()));
      block[u] = it->second;
    }
  }
  std::size_t blocks = *std::max_element(block.begin(), block.end()) + 1;

  while (true) {
    using Signature = std::pair<Index, std::vector<std::pair<std::size_t, Index>>>;
    std::map<Signature, Index> ids;
    std::vector<Index> next(n);
    for (Index u = 0; u < n; ++u) {
      Signature sig{block[u], {}};
      std::size_t agent_no = 0;
      for (Agent a : agents) {
        if (const Relation* r = model_of(u).relation(a))
          for (Index v : r->successors(local(u))) sig.second.emplace_back(agent_no, block[u < n1 ? v : v + n1]);
        ++agent_no;
      }
      std::sort(sig.second.begin(), sig.second.end());
      sig.second.erase(std::unique(sig.second.begin(), sig.second.end()), sig.second.end());
      auto [it, inserted] = ids.emplace(std::move(sig), static_cast<Index>(ids.size()));
      next[u] = it->second;
    }
    block = std::move(next);
    if (ids.size() == blocks) break;
    blocks = ids.size();
  }
  return block[w1] == block[n1 + w2];
}

// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Qbf parse_qbf(std::string_view text) {
  std::optional<std::string> prefix_line;
  std::optional<std::string> matrix_line;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string_view l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    if (l.starts_with("prefix:")) {
      prefix_line = std::string(trim(l.substr(7)));
    } else if (l.starts_with("matrix:")) {
      matrix_line = std::string(trim(l.substr(7)));
    } else if (matrix_line) {
      *matrix_line += " " + std::string(l);  // continuation
    } else {
      throw Error("unexpected line in QBF file: '" + std::string(l) + "'");
    }
  }
  if (!prefix_line) throw Error("QBF file has no 'prefix:' line");
  if (!matrix_line) throw Error("QBF file has no 'matrix:' line");
  std::vector<QuantifiedVar> prefix;
  std::istringstream ps(*prefix_line);
  std::string q, v;
  while (ps >> q) {
    if (!(ps >> v)) throw Error("quantifier '" + q + "' without a variable");
    Quantifier quant;
    if (q == "e" || q == "E" || q == "exists")
      quant = Quantifier::exists;
    else if (q == "a" || q == "A" || q == "forall")
      quant = Quantifier::forall;
    else
      throw Error("unknown quantifier '" + q + "'");
    if (!is_identifier(v)) throw Error("malformed variable name '" + v + "'");
    prefix.push_back({quant, Prop(v)});
  }
  return make_qbf(std::move(prefix), parse_formula(*matrix_line));
}

Qbf parse_qdimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  long declared_vars = 0;
  std::vector<QuantifiedVar> prefix;
  std::set<long> bound;
  std::vector<std::vector<long>> clauses;
  std::vector<long> current;
  auto var = [](long v) { return Prop("x" + std::to_string(v)); };
  while (std::getline(in, line)) {
    std::string_view l = trim(line);
    if (l.empty() || l.front() == 'c') continue;
    std::istringstream ls{std::string(l)};
    if (l.front() == 'p') {
      std::string p, cnf;
      long n_clauses = 0;
      ls >> p >> cnf >> declared_vars >> n_clauses;
      if (cnf != "cnf" || !ls) throw Error("malformed QDIMACS header");
      header = true;
      continue;
    }
    if (!header) throw Error("QDIMACS content before the 'p cnf' header");
    if (l.front() == 'e' || l.front() == 'a') {
      if (!clauses.empty() || !current.empty()) throw Error("quantifier line after clauses");
      Quantifier quant = l.front() == 'e' ? Quantifier::exists : Quantifier::forall;
      std::string tag;
      ls >> tag;
      long v;
      while (ls >> v && v != 0) {
        if (v < 0 || v > declared_vars) throw Error("quantified variable out of range");
        if (!bound.insert(v).second) throw Error("variable quantified twice");
        prefix.push_back({quant, var(v)});
      }
      continue;
    }
    long lit;
    while (ls >> lit) {
      if (lit == 0) {
        clauses.push_back(std::move(current));
        current.clear();
      } else {
        if (std::labs(lit) > declared_vars) throw Error("literal out of range");
        current.push_back(lit);
      }
    }
  }
  if (!current.empty()) clauses.push_back(std::move(current));
  // Free variables are existentially quantified outermost.
  std::vector<QuantifiedVar> free_vars;
  for (const auto& c : clauses)
    for (long lit : c)
      if (bound.insert(std::labs(lit)).second) free_vars.push_back({Quantifier::exists, var(std::labs(lit))});
  std::sort(free_vars.begin(), free_vars.end(),
            [](const auto& a, const auto& b) { return natural_order({a.var, b.var}).front() == a.var; });
  prefix.insert(prefix.begin(), free_vars.begin(), free_vars.end());

  std::vector<Formula> conjuncts;
  for (const auto& c : clauses) {
    if (c.empty()) {
      conjuncts.push_back(bot());
      continue;
    }
    auto literal = [&](long l) {
      Formula a = Formula::atom(var(std::labs(l)));
      return l < 0 ? Formula::negation(a) : a;
    };
    Formula d = literal(c.front());
    for (std::size_t i = 1; i < c.size(); ++i) d = disjunction(d, literal(c[i]));
    conjuncts.push_back(d);
  }
  return make_qbf(std::move(prefix), conjunction_of(conjuncts, top()));
}

Qbf load_qbf(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string_view l = trim(line);
    if (l.empty()) continue;
    if (l.starts_with("prefix:") || l.starts_with("matrix:") || l.front() == '#') return parse_qbf(text);
    if (l.front() == 'c' || l.front() == 'p') return parse_qdimacs(text);
    break;
  }
  return parse_qbf(text);
}

std::string render_qbf(const Qbf& q) {
  std::string out = "prefix:";
  for (const auto& qv : q.prefix) {
    out += qv.quantifier == Quantifier::exists ? " e " : " a ";
    out += qv.var.str();
  }
  out += "\nmatrix: " + render_formula(q.matrix) + "\n";
  return out;
}

std::string render_assignment(const Assignment& alpha, const std::vector<Prop>& ordering) {
  std::string out;
  for (Prop p : ordering) {
    if (!out.empty()) out += ' ';
    out += p.str() + "=" + (alpha.at(p) ? "1" : "0");
  }
  return out;
}

}  // namespace delcheck
