#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blindspot/core_model.hpp"

namespace blindspot {

/// KendallTau is the binary agreement score 1 - mean XOR. ChangeCorrelation
/// is P(change in target | same change in proxy) counted only over cycles
/// where the proxy changed; ChangeCorrelationLiteral keeps the unrestricted
/// numerator (it can exceed 1 and is offered for comparison only).
enum class CorrelationMetric { KendallTau, ChangeCorrelation, ChangeCorrelationLiteral };

std::string_view to_string(CorrelationMetric metric);
/// Accepts "kt", "change" and "change-literal".
CorrelationMetric parse_metric(std::string_view name);

enum class ChangeRule { Restricted, Literal };

double kendall_tau(std::span<const State> x, std::span<const State> y);

/// Score for predicting changes of x from changes of the proxy y.
/// Returns 0 when y never changed.
double change_correlation(std::span<const Delta> dx, std::span<const Delta> dy,
                          ChangeRule rule = ChangeRule::Restricted);

/// Unpruned n x n table of metric scores computed over cycles 1..horizon.
/// score(source, target) is how well `source` predicts `target`.
class PairwiseScores {
 public:
  PairwiseScores() = default;
  PairwiseScores(std::size_t poi_count, std::size_t horizon, CorrelationMetric metric,
                 std::vector<double> scores);

  std::size_t poi_count() const noexcept { return n_; }
  std::size_t horizon() const noexcept { return horizon_; }
  CorrelationMetric metric() const noexcept { return metric_; }

  double operator()(PoiIndex source, PoiIndex target) const {
    return scores_[source * n_ + target];
  }

 private:
  std::size_t n_ = 0;
  std::size_t horizon_ = 0;
  CorrelationMetric metric_ = CorrelationMetric::KendallTau;
  std::vector<double> scores_;
};

/// Throws InvalidHorizon unless 1 <= horizon <= cycle_count.
PairwiseScores pairwise_scores(const Scenario& scenario, std::size_t horizon,
                               CorrelationMetric metric);

struct Edge {
  PoiIndex source = 0;
  PoiIndex target = 0;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

/// Directed graph of prediction coefficients p(source -> target). Every
/// edge weight is >= threshold and there are no self-edges.
class CorrelationGraph {
 public:
  CorrelationGraph() = default;
  CorrelationGraph(std::vector<std::string> nodes, CorrelationMetric metric, double threshold,
                   std::size_t horizon);

  void add_edge(PoiIndex source, PoiIndex target, double weight);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::span<const std::string> nodes() const noexcept { return nodes_; }
  CorrelationMetric metric() const noexcept { return metric_; }
  double threshold() const noexcept { return threshold_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t edge_count() const noexcept { return edge_count_; }

  std::optional<double> weight(PoiIndex source, PoiIndex target) const;

  /// Adjacency, each list ordered by neighbor index.
  std::span<const Edge> in_edges(PoiIndex target) const { return in_.at(target); }
  std::span<const Edge> out_edges(PoiIndex source) const { return out_.at(source); }

  /// All edges ordered by (source, target).
  std::vector<Edge> edges() const;

  bool operator==(const CorrelationGraph& other) const;

 private:
  std::vector<std::string> nodes_;
  CorrelationMetric metric_ = CorrelationMetric::KendallTau;
  double threshold_ = 0.0;
  std::size_t horizon_ = 0;
  std::size_t edge_count_ = 0;
  std::vector<std::vector<Edge>> in_;
  std::vector<std::vector<Edge>> out_;
};

inline constexpr double kDefaultEdgeThreshold = 0.5;

/// For the change metrics the edge j -> i carries the score of j as proxy
/// for i.
CorrelationGraph build_graph(const Scenario& scenario, std::size_t horizon,
                             CorrelationMetric metric, double threshold = kDefaultEdgeThreshold);

CorrelationGraph graph_from_scores(const PairwiseScores& scores,
                                   std::span<const std::string> nodes, double threshold);

struct ProxyMatch {
  PoiIndex proxy = 0;
  double score = 0.0;

  bool operator==(const ProxyMatch&) const = default;
};

/// Candidate with the highest score against `target`; ties go to the lower
/// index. Throws EmptyCandidates on an empty set.
ProxyMatch best_proxy(PoiIndex target, std::span<const PoiIndex> candidates,
                      const Scenario& scenario, std::size_t horizon, CorrelationMetric metric);

/// Same selection rule against a precomputed table; nullopt when no
/// candidate other than the target exists.
std::optional<ProxyMatch> best_proxy(const PairwiseScores& scores, PoiIndex target,
                                     std::span<const PoiIndex> candidates);

/// `# metric=<m> threshold=<t> horizon=<h>` then `source,target,weight` rows.
void write_graph_csv(const CorrelationGraph& graph, const std::filesystem::path& path);

/// Node ids must cover every edge endpoint; they fix the index order.
CorrelationGraph read_graph_csv(const std::filesystem::path& path,
                                std::vector<std::string> nodes);

}  // namespace blindspot
