#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "delcheck/formula.hpp"
#include "delcheck/kripke.hpp"

namespace delcheck {

/// Provenance of a product-update world: (origin world, origin event).
struct ProductWorld {
  Index origin_world;
  Index origin_event;
  std::string id;  // "<world>|<event>"
};

struct ProductUpdate {
  EpistemicModel model;  // empty_product() when nothing survives
  std::vector<ProductWorld> worlds;
};

/// Thrown when an evaluation exceeds its recursive-call budget.
class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(std::uint64_t calls)
      : Error("evaluation exceeded its call budget after " + std::to_string(calls) + " calls"), calls_(calls) {}
  std::uint64_t calls() const { return calls_; }

 private:
  std::uint64_t calls_;
};

/// Reference semantics: plain recursion over the truth clauses, with
/// products materialized eagerly and nothing cached between calls.
class Evaluator {
 public:
  explicit Evaluator(std::uint64_t call_budget = std::numeric_limits<std::uint64_t>::max())
      : budget_(call_budget) {}

  bool evaluate(const EpistemicModel& m, Index w, const Formula& f);
  ProductUpdate product(const EpistemicModel& m, const EventModel& e);

  std::uint64_t calls() const { return calls_; }
  std::uint64_t product_worlds() const { return product_worlds_; }

 private:
  // Precondition results already known for one world of `m`; -1 = unknown.
  struct KnownPre {
    Index world;
    const std::vector<signed char>* verdicts;
  };
  ProductUpdate build_product(const EpistemicModel& m, const EventModel& e, const KnownPre* known);
  bool evaluate_update(const EpistemicModel& m, Index w, const Formula& f);

  std::uint64_t budget_;
  std::uint64_t calls_ = 0;
  std::uint64_t product_worlds_ = 0;
};

ProductUpdate product_update(const EpistemicModel& m, const EventModel& e);

/// Product of pointed models: designated pairs that survive the update.
/// The result's designation may be empty when no designated pair survives.
struct PointedProduct {
  ProductUpdate product;
  std::vector<Index> designated;
};
PointedProduct product_update(const PointedModel& m, const PointedEventModel& e);

bool evaluate(const EpistemicModel& m, Index w, const Formula& f);
bool evaluate_pointed(const PointedModel& pm, const Formula& f);

struct ProbeResult {
  bool verdict = false;
  std::uint64_t recursive_calls = 0;
  std::uint64_t product_worlds = 0;
};

/// evaluate() with instrumentation. Throws BudgetExceeded past `call_budget`.
ProbeResult call_count_probe(const EpistemicModel& m, Index w, const Formula& f,
                             std::uint64_t call_budget = std::numeric_limits<std::uint64_t>::max());

}  // namespace delcheck
