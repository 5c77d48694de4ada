#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "delcheck/formula.hpp"
#include "delcheck/kripke.hpp"

namespace delcheck {

/// Input to the single-agent checker: one S5 agent, single-pointed event
/// models without postconditions.
struct FragmentInstance {
  std::shared_ptr<const EpistemicModel> model;
  Index world = 0;
  Formula formula;
};

struct FragmentVerdict {
  bool accepted = false;
  std::string reason;  // empty when accepted
};

FragmentVerdict accepts_fragment(const FragmentInstance& instance);
FragmentVerdict accepts_fragment(const EpistemicModel& m, const Formula& f);

struct FastStats {
  std::uint64_t calls = 0;
  std::uint64_t memo_entries = 0;
  std::uint64_t submodels = 0;
};

/// Memoized checker for accepted instances. Every model reached through
/// updates is represented as a set of worlds of the original model, so the
/// memo key is (submodel, world, formula node).
class FastChecker {
 public:
  explicit FastChecker(std::shared_ptr<const EpistemicModel> model, bool memoize = true,
                       std::uint64_t call_budget = std::numeric_limits<std::uint64_t>::max());

  bool check(Index w, const Formula& f);

  /// Worlds of the contracted submodel for [E,e0] applied at w0 in the
  /// submodel `within` (a sorted world list of the original model).
  std::vector<Index> contract(const std::vector<Index>& within, Index w0, const PointedEventModel& event);

  const FastStats& stats() const { return stats_; }

 private:
  using SubmodelId = std::uint32_t;

  struct Key {
    SubmodelId submodel;
    Index world;
    const void* node;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  SubmodelId intern(std::vector<Index> worlds);
  bool check(SubmodelId s, Index w, const Formula& f);
  std::vector<Index> contract(SubmodelId s, Index w0, const PointedEventModel& event);

  std::shared_ptr<const EpistemicModel> model_;
  Agent agent_;
  const Relation* relation_ = nullptr;
  bool memoize_;
  std::uint64_t budget_;
  std::map<std::vector<Index>, SubmodelId> submodel_ids_;
  std::vector<std::vector<bool>> members_;  // membership bitmap per submodel
  std::unordered_map<Key, bool, KeyHash> memo_;
  FastStats stats_;
};

struct FastResult {
  bool verdict = false;
  FastStats stats;
};

/// Throws Error with the rejection reason when the instance is outside the
/// fragment.
FastResult fragment_check(const FragmentInstance& instance, bool memoize = true,
                          std::uint64_t call_budget = std::numeric_limits<std::uint64_t>::max());

/// Submodel of `m` induced by the contracted world set, keeping world names.
EpistemicModel contract_update(const EpistemicModel& m, Index w0, const EventModel& event, Index e0);

/// N_0 = p, N_{j+1} = [F_j, f] p with pre(f) = (N_j & N_j), both operands
/// sharing one node. Two worlds, p true only at the designated one.
FragmentInstance nested_update_family(unsigned k);

}  // namespace delcheck
