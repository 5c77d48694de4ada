#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "delcheck/instance.hpp"
#include "delcheck/oracle.hpp"

namespace delcheck {

enum class Construction { delta2, multi1, single2, semiprivate };

const char* to_string(Construction c);
Construction parse_construction(std::string_view name);

struct ReductionOptions {
  /// Fill Instance::expected from the oracle.
  bool compute_expected = true;
};

/// Chain-detection formulas over z0, z1, z2. `detects_z1` / `detects_z2`
/// are only defined for j >= 1.
struct ChiFormulas {
  Formula a_chain;  // an alternating path of >= j steps to z0, first step a
  Formula b_chain;  // same, first step b
  std::optional<Formula> detects_z1;  // first world of a z1-chain with exactly j steps
  std::optional<Formula> detects_z2;  // first world of a z2-chain with exactly j steps
};

ChiFormulas chi_formulas(unsigned j);

/// Central world "c" with z1 and z2, plus a z1-chain of j steps for every
/// true entry alpha[j-1]; first worlds and "c" form an a-clique. When
/// `z2_chains` > 0, z2-chains of 1..z2_chains steps are added, their first
/// worlds forming a b-clique with "c". All relations are S5-closed.
EpistemicModel chain_model(const std::vector<bool>& alpha, unsigned z2_chains);

/// Variables ordered x1 (most significant) first. Defaults to natural order.
Instance reduce_delta2(const Formula& f, std::optional<std::vector<Prop>> ordering = std::nullopt,
                       const ReductionOptions& options = {});
Instance reduce_multi1(const Qbf& q, const ReductionOptions& options = {});
Instance reduce_single2(const Qbf& q, const ReductionOptions& options = {});
Instance reduce_semiprivate(const Qbf& q, const ReductionOptions& options = {});

/// Thrown by reduce_delta2 for an unsatisfiable input.
class UnsatisfiableInput : public Error {
 public:
  using Error::Error;
};

struct SizeEstimate {
  std::uint64_t initial_worlds = 0;
  std::uint64_t max_product_worlds = 0;  // saturating
  std::uint64_t formula_nodes = 0;       // saturating
};

/// `variables` is n, the number of (normalized) QBF variables or, for
/// delta2, of formula variables.
SizeEstimate instance_size_estimate(Construction c, unsigned variables);
SizeEstimate instance_size_estimate(const Instance& instance);

}  // namespace delcheck
