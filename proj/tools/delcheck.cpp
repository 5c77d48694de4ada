#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "delcheck/fastcheck.hpp"
#include "delcheck/instance.hpp"
#include "delcheck/oracle.hpp"
#include "delcheck/reduction.hpp"
#include "delcheck/semantics.hpp"

using namespace delcheck;
using nlohmann::json;

namespace {

enum Exit : int { kTrue = 0, kFalse = 1, kError = 2, kMismatch = 3, kOversize = 4 };

constexpr std::uint64_t kDefaultMaxWorlds = 200000;
constexpr std::uint64_t kBenchNaiveBudget = std::uint64_t{1} << 24;

struct Output {
  bool as_json = false;
  bool quiet = false;

  void line(const std::string& text) const {
    if (!quiet && !as_json) std::cout << text << '\n';
  }
  void note(const std::string& text) const {
    if (!quiet) std::cerr << text << '\n';
  }
  void emit(const json& doc) const {
    if (as_json) std::cout << doc.dump(2) << '\n';
  }
};

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct RunReport {
  std::optional<bool> verdict;
  std::string error;
  std::string engine;
  double ms = 0;
  std::uint64_t recursive_calls = 0;
  std::uint64_t product_worlds = 0;
  std::optional<std::uint64_t> memo_entries;

  json to_json() const {
    json j;
    if (verdict)
      j["verdict"] = *verdict;
    else
      j["error"] = error;
    j["engine"] = engine;
    j["ms"] = ms;
    j["recursive_calls"] = recursive_calls;
    j["product_worlds_materialized"] = product_worlds;
    if (memo_entries) j["memo_entries"] = *memo_entries;
    return j;
  }
};

std::uint64_t max_worlds() {
  const char* env = std::getenv("DELCHECK_MAX_WORLDS");
  if (!env || !*env) return kDefaultMaxWorlds;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw Error(std::string("DELCHECK_MAX_WORLDS is not a number: '") + env + "'");
  }
}

std::vector<Prop> parse_order(const std::string& text) {
  std::vector<Prop> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.emplace_back(item);
  return out;
}

std::string trim(std::string s) {
  auto space = [](unsigned char c) { return std::isspace(c); };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), space));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), space).base(), s.end());
  return s;
}

bool evaluate_with(const std::string& engine, const Instance& in, RunReport& report) {
  Stopwatch clock;
  if (engine == "naive") {
    Evaluator ev;
    bool all = true;
    for (Index w : in.model.designated) all = ev.evaluate(*in.model.model, w, in.formula) && all;
    report.recursive_calls = ev.calls();
    report.product_worlds = ev.product_worlds();
    report.ms = clock.ms();
    return all;
  }
  if (in.model.designated.size() != 1) throw Error("fast engine needs a single designated world");
  FragmentInstance fi{in.model.model, in.model.designated.front(), in.formula};
  FragmentVerdict gate = accepts_fragment(fi);
  if (!gate.accepted) throw Error("outside the single-agent fragment: " + gate.reason);
  FastResult r = fragment_check(fi);
  report.recursive_calls = r.stats.calls;
  report.memo_entries = r.stats.memo_entries;
  report.ms = clock.ms();
  return r.verdict;
}

int cmd_check(const Output& out, const std::string& path, const std::string& engine, bool expect,
              const std::string& formula_override) {
  RunReport report;
  report.engine = engine;
  try {
    InstanceFile file = read_instance_file(path);
    if (!formula_override.empty()) file.formula = formula_override;
    Instance in = to_instance(file);
    bool v = evaluate_with(engine, in, report);
    report.verdict = v;
    json doc = report.to_json();
    if (expect) {
      if (!in.expected) throw Error("--expect given but the file has no expected verdict");
      doc["expected"] = *in.expected;
    }
    out.emit(doc);
    out.line(std::string(v ? "true" : "false") + "  engine=" + engine + " calls=" + std::to_string(report.recursive_calls) +
             " ms=" + std::to_string(report.ms));
    if (expect && *in.expected != v) {
      out.note("verdict " + std::string(v ? "true" : "false") + " differs from expected " +
               (*in.expected ? "true" : "false"));
      return kMismatch;
    }
    return v ? kTrue : kFalse;
  } catch (const std::exception& e) {
    report.error = e.what();
    out.emit(report.to_json());
    out.note(std::string("error: ") + e.what());
    return kError;
  }
}

const PointedEventModel& select_event(const InstanceFile& file, const std::string& name) {
  if (!name.empty()) {
    auto it = file.events.find(name);
    if (it == file.events.end()) throw Error("no event model named '" + name + "'");
    return *it->second;
  }
  if (file.events.size() != 1) throw Error("event file must hold exactly one event model, or pass --event");
  return *file.events.begin()->second;
}

int cmd_update(const Output& out, const std::string& model_path, const std::string& event_path,
               const std::string& out_path, const std::string& event_name) {
  InstanceFile models = read_instance_file(model_path);
  InstanceFile events = model_path == event_path ? models : read_instance_file(event_path);
  const PointedModel& pm = select_model(models);
  PointedProduct product = product_update(pm, select_event(events, event_name));
  const EpistemicModel& m = product.product.model;

  json doc;
  doc["agents"] = models.agents;
  doc["props"] = models.props;
  doc["models"]["main"] = model_to_json(m, product.designated, validate_s5(m).ok);
  write_json(out_path, doc);

  out.emit({{"worlds", m.size()}, {"designated", product.designated.size()}, {"out", out_path}});
  out.line("wrote " + std::to_string(m.size()) + " worlds to " + out_path);
  if (m.is_empty()) {
    out.note("the product is empty: no designated world satisfies any precondition");
    return kFalse;
  }
  return kTrue;
}

int cmd_reduce(const Output& out, const std::string& input, const std::string& construction_name,
               const std::string& out_path, bool no_oracle, const std::string& order) {
  Construction c = parse_construction(construction_name);
  std::string text = read_text(input);
  ReductionOptions options{!no_oracle};

  unsigned n = 0;
  std::optional<Qbf> q;
  std::optional<Formula> f;
  if (c == Construction::delta2) {
    f = parse_formula(trim(text));
    n = static_cast<unsigned>(variables_of(*f).size());
  } else {
    q = load_qbf(text);
    n = static_cast<unsigned>(normalize_alternating(*q).prefix.size());
  }
  SizeEstimate est = instance_size_estimate(c, n);
  out.note("size estimate: initial_worlds=" + std::to_string(est.initial_worlds) +
           " max_product_worlds=" + std::to_string(est.max_product_worlds) +
           " formula_nodes=" + std::to_string(est.formula_nodes));
  const std::uint64_t cap = max_worlds();
  if (est.max_product_worlds > cap) {
    out.emit({{"error", "oversize"}, {"max_product_worlds", est.max_product_worlds}, {"cap", cap}});
    out.note("refusing: max_product_worlds " + std::to_string(est.max_product_worlds) + " exceeds the cap " +
             std::to_string(cap) + " (set DELCHECK_MAX_WORLDS to raise it)");
    return kOversize;
  }

  Instance in = [&] {
    switch (c) {
      case Construction::delta2: {
        std::optional<std::vector<Prop>> ordering;
        if (!order.empty()) ordering = parse_order(order);
        return reduce_delta2(*f, ordering, options);
      }
      case Construction::multi1:
        return reduce_multi1(*q, options);
      case Construction::single2:
        return reduce_single2(*q, options);
      case Construction::semiprivate:
        return reduce_semiprivate(*q, options);
    }
    throw Error("unknown construction");
  }();
  write_json(out_path, instance_to_json(in));
  json report{{"out", out_path},
              {"construction", to_string(c)},
              {"initial_worlds", est.initial_worlds},
              {"max_product_worlds", est.max_product_worlds},
              {"formula_nodes", est.formula_nodes}};
  report["expected"] = in.expected ? json(*in.expected) : json(nullptr);
  out.emit(report);
  out.line("wrote " + out_path + " (expected " + (in.expected ? (*in.expected ? "true" : "false") : "null") + ")");
  return kTrue;
}

int cmd_qbf(const Output& out, const std::string& path) {
  Qbf q = load_qbf(read_text(path));
  bool v = qbf_eval(q);
  out.emit({{"verdict", v}});
  out.line(v ? "true" : "false");
  return v ? kTrue : kFalse;
}

int cmd_lexmax(const Output& out, const std::string& path, const std::string& order) {
  Formula f = parse_formula(trim(read_text(path)));
  std::vector<Prop> ordering = order.empty() ? natural_order(variables_of(f)) : parse_order(order);
  auto alpha = lexmax_sat(f, ordering);
  if (!alpha) {
    out.emit({{"satisfiable", false}});
    out.line("UNSAT");
    return kFalse;
  }
  std::string rendered = render_assignment(*alpha, ordering);
  json assignment = json::object();
  for (Prop p : ordering) assignment[p.str()] = alpha->at(p);
  out.emit({{"satisfiable", true}, {"assignment", assignment}});
  if (!out.as_json) std::cout << rendered << '\n';
  return kTrue;
}

int cmd_bisim(const Output& out, const std::string& path1, const std::string& world1, const std::string& path2,
              const std::string& world2) {
  InstanceFile f1 = read_instance_file(path1);
  InstanceFile f2 = read_instance_file(path2);
  const EpistemicModel& m1 = *select_model(f1).model;
  const EpistemicModel& m2 = *select_model(f2).model;
  bool v = bisimilar(m1, m1.world_index(world1), m2, m2.world_index(world2));
  out.emit({{"verdict", v}});
  out.line(v ? "bisimilar" : "not bisimilar");
  return v ? kTrue : kFalse;
}

int cmd_validate(const Output& out, const std::string& path) {
  InstanceFile file = read_instance_file(path);
  json report = json::object();
  bool ok = true;
  auto record = [&](const std::string& kind, const std::string& name, const S5Report& r) {
    json violations = json::array();
    for (const auto& v : r.violations)
      violations.push_back({{"agent", v.agent.str()}, {"kind", to_string(v.kind)}, {"from", v.from}, {"to", v.to}});
    report[kind][name] = {{"s5", r.ok}, {"violations", violations}};
    ok = ok && r.ok;
    out.line(kind + " " + name + ": " + (r.ok ? "S5" : "not S5 (" + std::to_string(r.violations.size()) + " missing pairs)"));
  };
  for (const auto& [name, pm] : file.models) record("model", name, validate_s5(*pm.model));
  for (const auto& [name, pe] : file.events) record("event", name, validate_s5(*pe->model));
  if (file.formula) {
    to_instance(file);
    out.line("formula parses");
  }
  out.emit(report);
  return ok ? kTrue : kFalse;
}

struct BenchRow {
  std::string family;
  unsigned k;
  std::string engine;
  std::string verdict;
  double ms;
  std::uint64_t calls;
  std::optional<std::uint64_t> memo_entries;
};

std::vector<BenchRow> bench_nested(unsigned from, unsigned to) {
  std::vector<BenchRow> rows;
  for (unsigned k = from; k <= to; ++k) {
    FragmentInstance inst = nested_update_family(k);
    {
      Stopwatch clock;
      FastResult r = fragment_check(inst);
      rows.push_back({"nested", k, "fast", r.verdict ? "true" : "false", clock.ms(), r.stats.calls, r.stats.memo_entries});
    }
    Stopwatch clock;
    try {
      ProbeResult r = call_count_probe(*inst.model, inst.world, inst.formula, kBenchNaiveBudget);
      rows.push_back({"nested", k, "naive", r.verdict ? "true" : "false", clock.ms(), r.recursive_calls, std::nullopt});
    } catch (const BudgetExceeded& e) {
      rows.push_back({"nested", k, "naive", "timeout", clock.ms(), e.calls(), std::nullopt});
    }
  }
  return rows;
}

Qbf scaling_qbf(unsigned n) {
  // x1 & (x2 | x3) & (x3 | x4) ... keeps every variable relevant.
  std::vector<QuantifiedVar> prefix;
  for (unsigned i = 1; i <= n; ++i)
    prefix.push_back({i % 2 ? Quantifier::exists : Quantifier::forall, Prop("x" + std::to_string(i))});
  Formula m = Formula::atom(Prop("x1"));
  for (unsigned i = 2; i <= n; ++i) {
    Formula xi = Formula::atom(Prop("x" + std::to_string(i)));
    Formula prev = Formula::atom(Prop("x" + std::to_string(i - 1)));
    m = Formula::conjunction(m, disjunction(prev, xi));
  }
  return make_qbf(std::move(prefix), m);
}

std::vector<BenchRow> bench_reduction_scaling(unsigned from, unsigned to) {
  std::vector<BenchRow> rows;
  const std::uint64_t cap = max_worlds();
  for (unsigned n = std::max(from, 1u); n <= to; ++n) {
    Qbf q = scaling_qbf(n);
    for (Construction c : {Construction::multi1, Construction::single2}) {
      const unsigned normalized = static_cast<unsigned>(normalize_alternating(q).prefix.size());
      const std::string family = std::string("reduction-") + to_string(c);
      if (instance_size_estimate(c, normalized).max_product_worlds > cap) {
        rows.push_back({family, n, "naive", "oversize", 0, 0, std::nullopt});
        continue;
      }
      Instance in = c == Construction::multi1 ? reduce_multi1(q, {false}) : reduce_single2(q, {false});
      Stopwatch clock;
      Evaluator ev;
      bool v = true;
      for (Index w : in.model.designated) v = ev.evaluate(*in.model.model, w, in.formula) && v;
      rows.push_back({family, n, "naive", v ? "true" : "false", clock.ms(), ev.calls(), std::nullopt});
    }
  }
  return rows;
}

int cmd_bench(const Output& out, const std::string& family, unsigned from, unsigned to, const std::string& csv_path) {
  std::vector<BenchRow> rows;
  if (family == "nested")
    rows = bench_nested(from, to);
  else if (family == "reduction-scaling")
    rows = bench_reduction_scaling(from, to);
  else
    throw Error("unknown bench family '" + family + "' (expected nested or reduction-scaling)");
  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.family, a.k, a.engine) < std::tie(b.family, b.k, b.engine);
  });

  std::ostringstream csv;
  csv << "family,k,engine,verdict,ms,calls,memo_entries\n";
  for (const auto& r : rows)
    csv << r.family << ',' << r.k << ',' << r.engine << ',' << r.verdict << ',' << r.ms << ',' << r.calls << ','
        << (r.memo_entries ? std::to_string(*r.memo_entries) : "") << '\n';
  if (csv_path.empty() || csv_path == "-") {
    if (!out.as_json) std::cout << csv.str();
  } else {
    std::ofstream file(csv_path);
    if (!file) throw Error("cannot write '" + csv_path + "'");
    file << csv.str();
  }
  if (out.as_json) {
    json list = json::array();
    for (const auto& r : rows) {
      json j{{"family", r.family}, {"k", r.k}, {"engine", r.engine}, {"verdict", r.verdict}, {"ms", r.ms}, {"calls", r.calls}};
      if (r.memo_entries) j["memo_entries"] = *r.memo_entries;
      list.push_back(j);
    }
    out.emit(list);
  }
  if (!out.quiet) {
    std::fprintf(stderr, "%-22s %4s %-6s %-9s %10s %12s %8s\n", "family", "k", "engine", "verdict", "ms", "calls", "memo");
    for (const auto& r : rows)
      std::fprintf(stderr, "%-22s %4u %-6s %-9s %10.2f %12llu %8s\n", r.family.c_str(), r.k, r.engine.c_str(),
                   r.verdict.c_str(), r.ms, static_cast<unsigned long long>(r.calls),
                   r.memo_entries ? std::to_string(*r.memo_entries).c_str() : "-");
  }
  return kTrue;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model checking and hardness reductions for dynamic epistemic logic"};
  app.require_subcommand(1);
  Output out;
  app.add_flag("--json", out.as_json, "Print machine-readable JSON on stdout");
  app.add_flag("--quiet", out.quiet, "Suppress human-readable output");

  std::string file, file2, world, world2, engine = "naive", formula, out_path, construction, order, event_name;
  bool expect = false, no_oracle = false;

  auto* check = app.add_subcommand("check", "Evaluate an instance file");
  check->add_option("file", file, "Instance file")->required();
  check->add_option("--engine", engine, "naive or fast")->check(CLI::IsMember({"naive", "fast"}));
  check->add_option("--formula", formula, "Formula replacing the file's formula");
  check->add_flag("--expect", expect, "Exit 3 when the verdict differs from the file's expected value");

  std::string event_file;
  auto* update = app.add_subcommand("update", "Write the product of a model and an event model");
  update->add_option("model", file, "File holding the model")->required();
  update->add_option("events", event_file, "File holding the event model")->required();
  update->add_option("-o,--out", out_path, "Output file")->required();
  update->add_option("--event", event_name, "Event model name when the file holds several");

  auto* reduce = app.add_subcommand("reduce", "Build a reduction instance from a QBF or propositional formula");
  reduce->add_option("input", file, "QBF file, or formula file for delta2")->required();
  reduce->add_option("--construction", construction, "delta2, multi1, single2 or semiprivate")->required();
  reduce->add_option("-o,--out", out_path, "Output instance file")->required();
  reduce->add_flag("--no-oracle", no_oracle, "Leave the expected verdict null");
  reduce->add_option("--order", order, "Comma-separated variable order for delta2");

  auto* qbf = app.add_subcommand("qbf", "Decide a QBF by expansion");
  qbf->add_option("file", file, "QBF file (prefix/matrix or QDIMACS)")->required();

  auto* lexmax = app.add_subcommand("lexmax", "Lexicographically maximal satisfying assignment");
  lexmax->add_option("file", file, "Formula file")->required();
  lexmax->add_option("--order", order, "Comma-separated variable order");

  auto* bisim = app.add_subcommand("bisim", "Decide bisimilarity of two pointed models");
  bisim->add_option("file1", file, "First instance file")->required();
  bisim->add_option("world1", world, "World of the first model")->required();
  bisim->add_option("file2", file2, "Second instance file")->required();
  bisim->add_option("world2", world2, "World of the second model")->required();

  std::string family = "nested", range = "4..12";
  auto* bench = app.add_subcommand("bench", "Benchmark the naive and memoized checkers");
  bench->add_option("--family", family, "nested or reduction-scaling");
  bench->add_option("--k", range, "Range FROM..TO");
  bench->add_option("-o,--out", out_path, "CSV output file (stdout when omitted)");

  auto* validate = app.add_subcommand("validate", "Check that every model in a file is S5 and well formed");
  validate->add_option("file", file, "Instance file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kTrue : kError;
  }

  try {
    if (*check) return cmd_check(out, file, engine, expect, formula);
    if (*update) return cmd_update(out, file, event_file, out_path, event_name);
    if (*reduce) return cmd_reduce(out, file, construction, out_path, no_oracle, order);
    if (*qbf) return cmd_qbf(out, file);
    if (*lexmax) return cmd_lexmax(out, file, order);
    if (*bisim) return cmd_bisim(out, file, world, file2, world2);
    if (*validate) return cmd_validate(out, file);
    if (*bench) {
      auto dots = range.find("..");
      if (dots == std::string::npos) throw Error("--k expects FROM..TO");
      unsigned from = static_cast<unsigned>(std::stoul(range.substr(0, dots)));
      unsigned to = static_cast<unsigned>(std::stoul(range.substr(dots + 2)));
      return cmd_bench(out, family, from, to, out_path);
    }
  } catch (const std::exception& e) {
    if (out.as_json) std::cout << json{{"error", e.what()}}.dump(2) << '\n';
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
