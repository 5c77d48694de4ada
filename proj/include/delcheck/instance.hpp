#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "delcheck/formula.hpp"
#include "delcheck/kripke.hpp"

namespace delcheck {

struct Provenance {
  std::string construction;
  std::string source;  // the input QBF or propositional formula, as text
  std::map<std::string, std::string> details;
};

/// A pointed model, a formula and an optional expected verdict: the unit
/// read and written by the command-line tool.
struct Instance {
  std::vector<Agent> agents;
  std::vector<Prop> props;
  PointedModel model;
  Formula formula;
  std::optional<bool> expected;
  std::optional<Provenance> provenance;
};

/// Agents and propositions occurring anywhere in the model and formula,
/// sorted by spelling.
void fill_vocabulary(Instance& instance);

/// Models and event models named in a file, before a formula is attached.
struct InstanceFile {
  std::vector<std::string> agents;
  std::vector<std::string> props;
  std::map<std::string, PointedModel> models;
  EventTable events;
  std::optional<std::string> formula;
  std::optional<std::string> selected_model;
  std::optional<bool> expected;
  std::optional<Provenance> provenance;
};

InstanceFile parse_instance_file(const nlohmann::json& doc);
InstanceFile read_instance_file(const std::filesystem::path& path);

/// The model named "main", the one named by the file's "model" key, or the
/// only model present.
const PointedModel& select_model(const InstanceFile& file);

/// Requires a formula in the file.
Instance to_instance(const InstanceFile& file);
Instance load_instance(const std::filesystem::path& path);

nlohmann::json model_to_json(const EpistemicModel& m, const std::vector<Index>& designated, bool s5);
nlohmann::json instance_to_json(const Instance& instance);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

std::string read_text(const std::filesystem::path& path);

}  // namespace delcheck
