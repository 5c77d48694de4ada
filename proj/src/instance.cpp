#include "delcheck/instance.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace delcheck {

using nlohmann::json;

namespace {

std::vector<std::string> string_list(const json& j, const std::string& what) {
  if (!j.is_array()) throw StructuralError(what + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) throw StructuralError(what + " must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

bool s5_flag(const json& j) {
  if (!j.contains("s5")) return false;
  if (!j["s5"].is_boolean()) throw StructuralError("'s5' must be a boolean");
  return j["s5"].get<bool>();
}

// Relations keyed by agent name, with reflexive and symmetric pairs added when
// the object claims S5. Transitivity is checked afterwards, never invented.
NamedRelations read_relations(const json& j, const std::vector<std::string>& carrier,
                              const std::vector<std::string>& roster, bool s5, const std::string& where) {
  NamedRelations named;
  if (j.contains("relations")) {
    if (!j["relations"].is_object()) throw StructuralError(where + ": 'relations' must be an object");
    for (const auto& [agent, pairs] : j["relations"].items()) {
      if (!roster.empty() && std::find(roster.begin(), roster.end(), agent) == roster.end())
        throw StructuralError(where + ": unknown agent '" + agent + "'");
      if (!is_identifier(agent)) throw StructuralError(where + ": malformed agent name '" + agent + "'");
      PairList& list = named[Agent(agent)];
      for (const auto& pair : pairs) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
          throw StructuralError(where + ": relation pairs must be [from, to]");
        list.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
    }
  }
  if (s5) {
    for (const auto& agent : roster) named.try_emplace(Agent(agent));
    for (auto& [agent, list] : named) {
      PairList extra;
      for (const auto& w : carrier) extra.emplace_back(w, w);
      for (const auto& [u, v] : list) extra.emplace_back(v, u);
      list.insert(list.end(), extra.begin(), extra.end());
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    S5Report report = validate_s5(named, carrier);
    if (!report.ok) {
      const auto& v = report.violations.front();
      throw StructuralError(where + ": declared s5 but relation for " + v.agent.str() + " is not " +
                            to_string(v.kind) + " (missing " + v.from + " -> " + v.to + ")");
    }
  }
  return named;
}

std::vector<Index> read_designated(const json& j, const std::vector<std::string>& carrier, const std::string& where) {
  if (!j.contains("designated")) throw StructuralError(where + ": missing 'designated'");
  std::vector<Index> out;
  for (const auto& name : string_list(j["designated"], where + ": 'designated'")) {
    auto it = std::find(carrier.begin(), carrier.end(), name);
    if (it == carrier.end()) throw StructuralError(where + ": designated '" + name + "' is not declared");
    out.push_back(static_cast<Index>(it - carrier.begin()));
  }
  return out;
}

void check_props(const Formula& f, const std::vector<std::string>& props, const std::string& where) {
  if (props.empty()) return;
  for (const auto& p : formula_stats(f).props_used) {
    if (p == default_falsum_prop().str()) continue;
    if (std::find(props.begin(), props.end(), p) == props.end())
      throw StructuralError(where + ": unknown proposition '" + p + "'");
  }
}

class EventLoader {
 public:
  EventLoader(const json& events, const InstanceFile& file) : events_(events), file_(file) {
    for (const auto& a : file.agents) roster_.insert(a);
  }

  EventTable load_all() {
    for (const auto& [name, body] : events_.items()) load(name);
    return std::move(table_);
  }

 private:
  std::shared_ptr<const PointedEventModel> load(const std::string& name) {
    if (auto it = table_.find(name); it != table_.end()) return it->second;
    if (!events_.contains(name)) throw StructuralError("unknown event model '" + name + "'");
    if (!in_progress_.insert(name).second) throw StructuralError("event model '" + name + "' refers to itself");
    const std::string where = "event model '" + name + "'";
    const json& j = events_[name];
    if (!j.is_object()) throw StructuralError(where + " must be an object");
    if (!j.contains("events")) throw StructuralError(where + ": missing 'events'");
    auto ids = string_list(j["events"], where + ": 'events'");
    bool s5 = s5_flag(j);
    NamedRelations relations = read_relations(j, ids, file_.agents, s5, where);

    // Preconditions may mention other event models; resolve those first.
    std::map<std::string, Formula> pre;
    if (j.contains("pre")) {
      for (const auto& [event, text] : j["pre"].items()) {
        if (!text.is_string()) throw StructuralError(where + ": preconditions must be formula strings");
        pre.emplace(event, parse_with_dependencies(text.get<std::string>(), where));
      }
    }
    std::map<std::string, std::vector<Literal>> post;
    if (j.contains("post")) {
      for (const auto& [event, lits] : j["post"].items()) {
        auto& out = post[event];
        for (const auto& text : string_list(lits, where + ": postcondition")) {
          Literal l = parse_literal(text);
          if (!file_.props.empty() &&
              std::find(file_.props.begin(), file_.props.end(), l.prop.str()) == file_.props.end())
            throw StructuralError(where + ": unknown proposition '" + l.prop.str() + "'");
          out.push_back(l);
        }
      }
    }
    auto model = std::make_shared<const EventModel>(make_event_model(ids, relations, pre, post, name));
    std::vector<Index> designated = read_designated(j, ids, where);
    Pointedness kind = designated.size() == 1 ? Pointedness::single : Pointedness::multi;
    auto pointed = make_pointed(model, std::move(designated), kind);
    in_progress_.erase(name);
    table_.emplace(name, pointed);
    return pointed;
  }

  Formula parse_with_dependencies(const std::string& text, const std::string& where) {
    // Parse against a table holding every event model referenced so far;
    // an unknown reference triggers loading that model and a retry.
    while (true) {
      try {
        ParseOptions options{&table_, roster_.empty() ? nullptr : &roster_};
        Formula f = parse_formula(text, options);
        check_props(f, file_.props, where);
        return f;
      } catch (const ParseError& e) {
        std::string missing = missing_event(text);
        if (missing.empty() || !events_.contains(missing)) throw;
        load(missing);
      }
    }
  }

  std::string missing_event(const std::string& text) const {
    for (std::size_t pos = text.find("upd:"); pos != std::string::npos; pos = text.find("upd:", pos + 4)) {
      std::size_t end = pos + 4;
      while (end < text.size() && text[end] != ']' && text[end] != '>' && !std::isspace(static_cast<unsigned char>(text[end])))
        ++end;
      std::string name = text.substr(pos + 4, end - pos - 4);
      if (!table_.contains(name)) return name;
    }
    return {};
  }

  const json& events_;
  const InstanceFile& file_;
  std::set<std::string> roster_;
  std::set<std::string> in_progress_;
  EventTable table_;
};

PointedModel read_model(const std::string& name, const json& j, const InstanceFile& file) {
  const std::string where = "model '" + name + "'";
  if (!j.is_object()) throw StructuralError(where + " must be an object");
  if (!j.contains("worlds")) throw StructuralError(where + ": missing 'worlds'");
  auto worlds = string_list(j["worlds"], where + ": 'worlds'");
  if (worlds.empty()) throw StructuralError(where + " has no worlds");
  bool s5 = s5_flag(j);
  NamedRelations relations = read_relations(j, worlds, file.agents, s5, where);
  std::map<std::string, std::vector<Prop>> valuation;
  if (j.contains("valuation")) {
    for (const auto& [world, props] : j["valuation"].items()) {
      auto& out = valuation[world];
      for (const auto& p : string_list(props, where + ": valuation")) {
        if (!file.props.empty() && std::find(file.props.begin(), file.props.end(), p) == file.props.end())
          throw StructuralError(where + ": unknown proposition '" + p + "'");
        if (!is_identifier(p)) throw StructuralError(where + ": malformed proposition '" + p + "'");
        out.emplace_back(p);
      }
    }
  }
  auto model = std::make_shared<const EpistemicModel>(make_model(worlds, relations, valuation));
  std::vector<Index> designated = read_designated(j, worlds, where);
  Pointedness kind = designated.size() == 1 ? Pointedness::single : Pointedness::multi;
  return make_pointed(std::move(model), std::move(designated), kind);
}

}  // namespace

InstanceFile parse_instance_file(const json& doc) {
  if (!doc.is_object()) throw StructuralError("instance file must hold a JSON object");
  InstanceFile file;
  if (doc.contains("agents")) file.agents = string_list(doc["agents"], "'agents'");
  if (doc.contains("props")) file.props = string_list(doc["props"], "'props'");
  for (const auto& a : file.agents)
    if (!is_identifier(a)) throw StructuralError("malformed agent name '" + a + "'");
  for (const auto& p : file.props)
    if (!is_identifier(p)) throw StructuralError("malformed proposition '" + p + "'");

  if (doc.contains("events")) {
    if (!doc["events"].is_object()) throw StructuralError("'events' must be an object");
    file.events = EventLoader(doc["events"], file).load_all();
  }
  if (doc.contains("models")) {
    if (!doc["models"].is_object()) throw StructuralError("'models' must be an object");
    for (const auto& [name, body] : doc["models"].items()) file.models.emplace(name, read_model(name, body, file));
  }
  if (doc.contains("model")) file.selected_model = doc["model"].get<std::string>();
  if (doc.contains("formula") && !doc["formula"].is_null()) {
    if (!doc["formula"].is_string()) throw StructuralError("'formula' must be a string");
    file.formula = doc["formula"].get<std::string>();
  }
  if (doc.contains("expected") && !doc["expected"].is_null()) {
    if (!doc["expected"].is_boolean()) throw StructuralError("'expected' must be true, false or null");
    file.expected = doc["expected"].get<bool>();
  }
  if (doc.contains("provenance") && doc["provenance"].is_object()) {
    const json& p = doc["provenance"];
    Provenance prov;
    prov.construction = p.value("construction", "");
    prov.source = p.value("source", "");
    for (const auto& [k, v] : p.items())
      if (k != "construction" && k != "source") prov.details[k] = v.is_string() ? v.get<std::string>() : v.dump();
    file.provenance = std::move(prov);
  }
  return file;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

InstanceFile read_instance_file(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": invalid JSON (" + e.what() + ")", e.byte);
  }
  return parse_instance_file(doc);
}

const PointedModel& select_model(const InstanceFile& file) {
  if (file.selected_model) {
    auto it = file.models.find(*file.selected_model);
    if (it == file.models.end()) throw StructuralError("model '" + *file.selected_model + "' is not defined");
    return it->second;
  }
  if (auto it = file.models.find("main"); it != file.models.end()) return it->second;
  if (file.models.size() == 1) return file.models.begin()->second;
  if (file.models.empty()) throw StructuralError("file defines no model");
  throw StructuralError("several models and none named 'main'; set the top-level 'model' key");
}

Instance to_instance(const InstanceFile& file) {
  if (!file.formula) throw StructuralError("file has no formula");
  std::set<std::string> roster(file.agents.begin(), file.agents.end());
  ParseOptions options{&file.events, roster.empty() ? nullptr : &roster};
  Formula f = parse_formula(*file.formula, options);
  check_props(f, file.props, "formula");
  Instance instance{{}, {}, select_model(file), std::move(f), file.expected, file.provenance};
  fill_vocabulary(instance);
  for (const auto& a : file.agents) instance.agents.emplace_back(a);
  for (const auto& p : file.props) instance.props.emplace_back(p);
  auto dedupe = [](auto& v) {
    std::sort(v.begin(), v.end(), [](auto x, auto y) { return x.str() < y.str(); });
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedupe(instance.agents);
  dedupe(instance.props);
  return instance;
}

Instance load_instance(const std::filesystem::path& path) { return to_instance(read_instance_file(path)); }

void fill_vocabulary(Instance& instance) {
  std::set<std::string> agents, props;
  for (const auto& [a, r] : instance.model.model->relations()) agents.insert(a.str());
  for (Index w = 0; w < instance.model.model->size(); ++w)
    for (Prop p : instance.model.model->true_props(w)) props.insert(p.str());
  FormulaStats stats = formula_stats(instance.formula);
  agents.insert(stats.agents_used.begin(), stats.agents_used.end());
  props.insert(stats.props_used.begin(), stats.props_used.end());
  for_each_node(instance.formula, [&](const Formula& n) {
    if (n.kind() != NodeKind::update) return;
    const EventModel& em = *n.event().model;
    for (Index e = 0; e < em.size(); ++e)
      for (const Literal& l : em.post(e)) props.insert(l.prop.str());
  });
  props.erase(default_falsum_prop().str());
  instance.agents.clear();
  instance.props.clear();
  for (const auto& a : agents) instance.agents.emplace_back(a);
  for (const auto& p : props) instance.props.emplace_back(p);
}

// ---------------------------------------------------------------------------

namespace {

json relations_to_json(const RelationMap& relations, const std::vector<std::string>& names) {
  json out = json::object();
  for (const auto& [agent, rel] : relations) {
    json pairs = json::array();
    for (Index u = 0; u < rel.carrier_size(); ++u)
      for (Index v : rel.successors(u)) pairs.push_back({names[u], names[v]});
    out[agent.str()] = std::move(pairs);
  }
  return out;
}

bool is_s5(const RelationMap& relations, const std::vector<std::string>& carrier) {
  return validate_s5(relations, carrier).ok;
}

}  // namespace

json model_to_json(const EpistemicModel& m, const std::vector<Index>& designated, bool s5) {
  json out;
  out["s5"] = s5;
  out["worlds"] = m.world_names();
  out["relations"] = relations_to_json(m.relations(), m.world_names());
  json valuation = json::object();
  for (Index w = 0; w < m.size(); ++w) {
    std::vector<std::string> props;
    for (Prop p : m.true_props(w)) props.push_back(p.str());
    std::sort(props.begin(), props.end());
    if (!props.empty()) valuation[m.world_name(w)] = props;
  }
  out["valuation"] = std::move(valuation);
  json d = json::array();
  for (Index w : designated) d.push_back(m.world_name(w));
  out["designated"] = std::move(d);
  return out;
}

json instance_to_json(const Instance& instance) {
  // Name every distinct event model reachable from the formula. Labels are
  // reused when they are valid and unambiguous.
  std::vector<const PointedEventModel*> order;
  std::map<const PointedEventModel*, std::string> names;
  std::set<std::string> taken;
  for_each_node(instance.formula, [&](const Formula& n) {
    if (n.kind() != NodeKind::update || names.contains(&n.event())) return;
    const PointedEventModel* pe = &n.event();
    std::string base = pe->model->label();
    if (base.empty() || !is_identifier(base)) base = "E";
    std::string name = base;
    for (int k = 2; taken.contains(name); ++k) name = base + "_" + std::to_string(k);
    taken.insert(name);
    names.emplace(pe, name);
    order.push_back(pe);
  });
  EventNamer namer = [&](const PointedEventModel& pe) { return names.at(&pe); };

  json doc;
  json agents = json::array(), props = json::array();
  for (Agent a : instance.agents) agents.push_back(a.str());
  for (Prop p : instance.props) props.push_back(p.str());
  doc["agents"] = std::move(agents);
  doc["props"] = std::move(props);

  const EpistemicModel& m = *instance.model.model;
  doc["models"]["main"] = model_to_json(m, instance.model.designated, is_s5(m.relations(), m.world_names()));

  json events = json::object();
  for (const PointedEventModel* pe : order) {
    const EventModel& em = *pe->model;
    json e;
    e["s5"] = is_s5(em.relations(), em.event_names());
    e["events"] = em.event_names();
    e["relations"] = relations_to_json(em.relations(), em.event_names());
    json pre = json::object(), post = json::object();
    for (Index i = 0; i < em.size(); ++i) {
      pre[em.event_name(i)] = render_formula(em.pre(i), namer);
      if (!em.post(i).empty()) {
        json lits = json::array();
        for (const Literal& l : em.post(i)) lits.push_back(render_literal(l));
        post[em.event_name(i)] = std::move(lits);
      }
    }
    e["pre"] = std::move(pre);
    e["post"] = std::move(post);
    json d = json::array();
    for (Index i : pe->designated) d.push_back(em.event_name(i));
    e["designated"] = std::move(d);
    events[names.at(pe)] = std::move(e);
  }
  doc["events"] = std::move(events);
  doc["formula"] = render_formula(instance.formula, namer);
  doc["expected"] = instance.expected ? json(*instance.expected) : json(nullptr);
  if (instance.provenance) {
    json p;
    p["construction"] = instance.provenance->construction;
    p["source"] = instance.provenance->source;
    for (const auto& [k, v] : instance.provenance->details) p[k] = v;
    doc["provenance"] = std::move(p);
  }
  return doc;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace delcheck
