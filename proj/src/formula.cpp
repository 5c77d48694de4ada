#include "delcheck/formula.hpp"

#include <cctype>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "delcheck/kripke.hpp"

namespace delcheck {

Formula Formula::atom(Prop p) {
  return Formula(std::make_shared<const Node>(Node{NodeKind::atom, p, {}, nullptr, nullptr, nullptr}));
}

Formula Formula::negation(Formula f) {
  return Formula(std::make_shared<const Node>(
      Node{NodeKind::negation, {}, {}, std::make_shared<const Formula>(std::move(f)), nullptr, nullptr}));
}

Formula Formula::conjunction(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{NodeKind::conjunction,
                                                   {},
                                                   {},
                                                   std::make_shared<const Formula>(std::move(lhs)),
                                                   std::make_shared<const Formula>(std::move(rhs)),
                                                   nullptr}));
}

Formula Formula::knows(Agent a, Formula f) {
  return Formula(std::make_shared<const Node>(
      Node{NodeKind::knowledge, {}, a, std::make_shared<const Formula>(std::move(f)), nullptr, nullptr}));
}

Formula Formula::box(std::shared_ptr<const PointedEventModel> event, Formula f) {
  if (!event || !event->model) throw StructuralError("update operator without an event model");
  return Formula(std::make_shared<const Node>(Node{NodeKind::update,
                                                   {},
                                                   {},
                                                   std::make_shared<const Formula>(std::move(f)),
                                                   nullptr,
                                                   std::move(event)}));
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case NodeKind::atom:
      return a.prop() == b.prop();
    case NodeKind::negation:
      return a.operand() == b.operand();
    case NodeKind::conjunction:
      return a.left() == b.left() && a.right() == b.right();
    case NodeKind::knowledge:
      return a.agent() == b.agent() && a.operand() == b.operand();
    case NodeKind::update:
      return a.event() == b.event() && a.operand() == b.operand();
  }
  return false;
}

Prop default_falsum_prop() {
  static const Prop p("_bot");
  return p;
}

Formula bot(Prop p) { return Formula::conjunction(Formula::atom(p), Formula::negation(Formula::atom(p))); }
Formula top(Prop p) { return Formula::negation(bot(p)); }

Formula disjunction(Formula lhs, Formula rhs) {
  return Formula::negation(Formula::conjunction(Formula::negation(std::move(lhs)),
                                                Formula::negation(std::move(rhs))));
}

Formula implication(Formula lhs, Formula rhs) {
  return disjunction(Formula::negation(std::move(lhs)), std::move(rhs));
}

Formula possible(Agent a, Formula f) {
  return Formula::negation(Formula::knows(a, Formula::negation(std::move(f))));
}

Formula diamond(std::shared_ptr<const PointedEventModel> event, Formula f) {
  return Formula::negation(Formula::box(std::move(event), Formula::negation(std::move(f))));
}

Formula conjunction_of(const std::vector<Formula>& conjuncts, Formula empty) {
  if (conjuncts.empty()) return empty;
  Formula acc = conjuncts.front();
  for (std::size_t i = 1; i < conjuncts.size(); ++i) acc = Formula::conjunction(acc, conjuncts[i]);
  return acc;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { ident, tilde, lparen, rparen, amp, bar, arrow, lbracket, rbracket, langle, rangle, colon, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto ident_char = [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '\'' || c == '.';
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    switch (c) {
      case '~': out.push_back({Tok::tilde, "~", start}); ++i; continue;
      case '!': out.push_back({Tok::tilde, "!", start}); ++i; continue;
      case '(': out.push_back({Tok::lparen, "(", start}); ++i; continue;
      case ')': out.push_back({Tok::rparen, ")", start}); ++i; continue;
      case '&': out.push_back({Tok::amp, "&", start}); ++i; continue;
      case '|': out.push_back({Tok::bar, "|", start}); ++i; continue;
      case '[': out.push_back({Tok::lbracket, "[", start}); ++i; continue;
      case ']': out.push_back({Tok::rbracket, "]", start}); ++i; continue;
      case '<': out.push_back({Tok::langle, "<", start}); ++i; continue;
      case '>': out.push_back({Tok::rangle, ">", start}); ++i; continue;
      case ':': out.push_back({Tok::colon, ":", start}); ++i; continue;
      case '-':
        if (i + 1 < s.size() && s[i + 1] == '>') {
          out.push_back({Tok::arrow, "->", start});
          i += 2;
          continue;
        }
        throw ParseError("expected '->'", start);
      default:
        break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && ident_char(s[i])) ++i;
      out.push_back({Tok::ident, std::string(s.substr(start, i - start)), start});
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", start);
  }
  out.push_back({Tok::end, "", s.size()});
  return out;
}

bool is_keyword(const std::string& s) { return s == "K" || s == "Khat" || s == "top" || s == "bot"; }

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options) : tokens_(tokenize(text)), options_(options) {}

  Formula parse() {
    Formula f = implication_level();
    if (peek().kind != Tok::end) throw ParseError("unexpected '" + peek().text + "'", peek().pos);
    return f;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) {
      std::string got = peek().kind == Tok::end ? "end of input" : "'" + peek().text + "'";
      throw ParseError(std::string("expected ") + what + ", got " + got, peek().pos);
    }
    return next();
  }

  Formula implication_level() {
    Formula lhs = disjunction_level();
    if (accept(Tok::arrow)) return implication(std::move(lhs), implication_level());
    return lhs;
  }

  Formula disjunction_level() {
    Formula lhs = conjunction_level();
    while (accept(Tok::bar)) lhs = disjunction(std::move(lhs), conjunction_level());
    return lhs;
  }

  Formula conjunction_level() {
    Formula lhs = unary();
    while (accept(Tok::amp)) lhs = Formula::conjunction(std::move(lhs), unary());
    return lhs;
  }

  Agent agent_name() {
    const Token& t = expect(Tok::ident, "agent name");
    if (is_keyword(t.text)) throw ParseError("keyword '" + t.text + "' is not an agent name", t.pos);
    if (options_.agents && !options_.agents->contains(t.text))
      throw ParseError("unknown agent '" + t.text + "'", t.pos);
    return Agent(t.text);
  }

  std::shared_ptr<const PointedEventModel> event_reference(Tok close) {
    const Token& kw = expect(Tok::ident, "'upd'");
    if (kw.text != "upd") throw ParseError("expected 'upd:'", kw.pos);
    expect(Tok::colon, "':'");
    const Token& name = expect(Tok::ident, "event model name");
    expect(close, close == Tok::rbracket ? "']'" : "'>'");
    if (!options_.events) throw ParseError("unknown event model '" + name.text + "'", name.pos);
    auto it = options_.events->find(name.text);
    if (it == options_.events->end()) throw ParseError("unknown event model '" + name.text + "'", name.pos);
    return it->second;
  }

  Formula unary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::tilde:
        next();
        return Formula::negation(unary());
      case Tok::lparen: {
        next();
        Formula inner = implication_level();
        expect(Tok::rparen, "')'");
        return inner;
      }
      case Tok::lbracket: {
        next();
        auto event = event_reference(Tok::rbracket);
        return Formula::box(std::move(event), unary());
      }
      case Tok::langle: {
        next();
        auto event = event_reference(Tok::rangle);
        return diamond(std::move(event), unary());
      }
      case Tok::ident: {
        next();
        if (t.text == "K") {
          Agent a = agent_name();
          return Formula::knows(a, unary());
        }
        if (t.text == "Khat") {
          Agent a = agent_name();
          return possible(a, unary());
        }
        if (t.text == "top") return top(options_.falsum);
        if (t.text == "bot") return bot(options_.falsum);
        return Formula::atom(Prop(t.text));
      }
      case Tok::end:
        throw ParseError("unexpected end of input", t.pos);
      default:
        throw ParseError("unexpected '" + t.text + "'", t.pos);
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const ParseOptions& options_;
};

}  // namespace

Formula parse_formula(std::string_view text, const ParseOptions& options) {
  return Parser(text, options).parse();
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

void render_into(const Formula& f, const EventNamer& namer, std::string& out) {
  switch (f.kind()) {
    case NodeKind::atom:
      out += f.prop().str();
      return;
    case NodeKind::negation:
      out += '~';
      render_into(f.operand(), namer, out);
      return;
    case NodeKind::conjunction:
      out += '(';
      render_into(f.left(), namer, out);
      out += " & ";
      render_into(f.right(), namer, out);
      out += ')';
      return;
    case NodeKind::knowledge:
      out += "K ";
      out += f.agent().str();
      out += ' ';
      render_into(f.operand(), namer, out);
      return;
    case NodeKind::update:
      out += "[upd:";
      out += namer ? namer(f.event()) : f.event().model->label();
      out += "] ";
      render_into(f.operand(), namer, out);
      return;
  }
}

}  // namespace

std::string render_formula(const Formula& f, const EventNamer& namer) {
  std::string out;
  render_into(f, namer, out);
  return out;
}

// ---------------------------------------------------------------------------
// Traversal and statistics

void for_each_node(const Formula& f, const std::function<void(const Formula&)>& visit) {
  std::unordered_set<const void*> seen;
  std::unordered_set<const EventModel*> seen_events;
  std::vector<const Formula*> stack{&f};
  while (!stack.empty()) {
    const Formula* cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur->identity()).second) continue;
    visit(*cur);
    switch (cur->kind()) {
      case NodeKind::atom:
        break;
      case NodeKind::conjunction:
        stack.push_back(&cur->right());
        stack.push_back(&cur->left());
        break;
      case NodeKind::negation:
      case NodeKind::knowledge:
        stack.push_back(&cur->operand());
        break;
      case NodeKind::update: {
        stack.push_back(&cur->operand());
        const EventModel& em = *cur->event().model;
        if (seen_events.insert(&em).second)
          for (Index e = 0; e < em.size(); ++e) stack.push_back(&em.pre(e));
        break;
      }
    }
  }
}

namespace {

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max() : a + b;
}

struct StatsWalker {
  std::unordered_map<const void*, std::uint64_t> nodes;
  std::unordered_map<const void*, std::uint64_t> updates;
  std::unordered_map<const void*, std::uint64_t> nesting;

  std::uint64_t node_count(const Formula& f) {
    if (auto it = nodes.find(f.identity()); it != nodes.end()) return it->second;
    std::uint64_t n = 1;
    switch (f.kind()) {
      case NodeKind::atom:
        break;
      case NodeKind::conjunction:
        n = saturating_add(n, saturating_add(node_count(f.left()), node_count(f.right())));
        break;
      default:
        n = saturating_add(n, node_count(f.operand()));
    }
    nodes.emplace(f.identity(), n);
    return n;
  }

  std::uint64_t update_count(const Formula& f) {
    if (auto it = updates.find(f.identity()); it != updates.end()) return it->second;
    std::uint64_t n = 0;
    switch (f.kind()) {
      case NodeKind::atom:
        break;
      case NodeKind::conjunction:
        n = saturating_add(update_count(f.left()), update_count(f.right()));
        break;
      case NodeKind::update: {
        n = saturating_add(1, update_count(f.operand()));
        const EventModel& em = *f.event().model;
        for (Index e = 0; e < em.size(); ++e) n = saturating_add(n, update_count(em.pre(e)));
        break;
      }
      default:
        n = update_count(f.operand());
    }
    updates.emplace(f.identity(), n);
    return n;
  }

  std::uint64_t update_nesting(const Formula& f) {
    if (auto it = nesting.find(f.identity()); it != nesting.end()) return it->second;
    std::uint64_t n = 0;
    switch (f.kind()) {
      case NodeKind::atom:
        break;
      case NodeKind::conjunction:
        n = std::max(update_nesting(f.left()), update_nesting(f.right()));
        break;
      case NodeKind::update: {
        std::uint64_t inner = update_nesting(f.operand());
        const EventModel& em = *f.event().model;
        for (Index e = 0; e < em.size(); ++e) inner = std::max(inner, update_nesting(em.pre(e)));
        n = inner + 1;
        break;
      }
      default:
        n = update_nesting(f.operand());
    }
    nesting.emplace(f.identity(), n);
    return n;
  }
};

}  // namespace

FormulaStats formula_stats(const Formula& f) {
  FormulaStats stats;
  StatsWalker walker;
  stats.node_count = walker.node_count(f);
  stats.update_count = walker.update_count(f);
  stats.max_update_nesting = walker.update_nesting(f);
  for_each_node(f, [&](const Formula& n) {
    if (n.kind() == NodeKind::atom) stats.props_used.insert(n.prop().str());
    if (n.kind() == NodeKind::knowledge) stats.agents_used.insert(n.agent().str());
    if (n.kind() == NodeKind::update)
      for (const auto& [agent, rel] : n.event().model->relations()) stats.agents_used.insert(agent.str());
  });
  return stats;
}

}  // namespace delcheck
