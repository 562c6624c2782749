#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "blindspot/core_model.hpp"
#include "blindspot/correlation.hpp"

namespace blindspot {

/// How a node's prediction credit reaches its predictors. MaxPredictor
/// gives each node's value only to its strongest in-neighbor; FullSum
/// credits every out-edge, which double-counts redundant predictors.
enum class CreditStrategy { MaxPredictor, FullSum };

std::string_view to_string(CreditStrategy strategy);
/// Accepts "max" and "sum".
CreditStrategy parse_strategy(std::string_view name);

struct SelectionProblem {
  CorrelationGraph graph;
  std::vector<double> costs;   // c_i > 0
  std::vector<double> values;  // v_i >= 0
  double budget = 0.0;         // W >= 0

  /// Throws InvalidProblem on mismatched sizes or out-of-domain numbers.
  void validate() const;
  std::size_t node_count() const noexcept { return graph.node_count(); }
};

struct SelectionResult {
  /// Selection order.
  std::vector<PoiIndex> selected;
  double total_cost = 0.0;
  /// v'_i of selected[k] when it was picked.
  std::vector<double> weighted_values;
  /// Sum of weighted_values for the greedy algorithms; the objective value
  /// of the chosen subset for the exhaustive oracle.
  double objective_estimate = 0.0;
};

/// Weighted value v'_i of every node before anything is selected.
std::vector<double> static_values(const SelectionProblem& problem,
                                  CreditStrategy strategy = CreditStrategy::MaxPredictor);

/// Marginal weighted values of the unselected nodes given the current
/// selection; selected nodes map to nullopt. With an empty selection this
/// equals static_values exactly.
std::vector<std::optional<double>> dynamic_values(
    const SelectionProblem& problem, std::span<const PoiIndex> selected,
    CreditStrategy strategy = CreditStrategy::MaxPredictor);

SelectionResult static_greedy(const SelectionProblem& problem,
                              CreditStrategy strategy = CreditStrategy::MaxPredictor);

SelectionResult dynamic_greedy(const SelectionProblem& problem,
                               CreditStrategy strategy = CreditStrategy::MaxPredictor);

/// Shuffled order, every node added if it still fits. weighted_values
/// report the static (max-predictor) values.
SelectionResult random_selection(const SelectionProblem& problem, std::uint64_t seed);

/// Value of the whole system when `subset` is queried: selected nodes count
/// in full, every other node counts v_j times its best selected predictor's
/// weight.
double coverage_value(const SelectionProblem& problem, std::span<const PoiIndex> subset);

using SubsetObjective = std::function<double(std::span<const PoiIndex>)>;

inline constexpr std::size_t kOracleMaxNodes = 20;

/// Enumerates every budget-feasible subset and keeps the best under
/// `objective` (coverage_value when empty). Ties go to the
/// lexicographically smallest sorted index list. Throws TooManyNodes above
/// kOracleMaxNodes.
SelectionResult exhaustive_oracle(const SelectionProblem& problem,
                                  const SubsetObjective& objective = {});

/// `rank,poi_id,cost,weighted_value_at_pick`, rank starting at 1.
void write_selection_csv(const SelectionResult& result, const SelectionProblem& problem,
                         const std::filesystem::path& path);

}  // namespace blindspot
