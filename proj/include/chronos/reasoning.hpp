#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chronos/framework.hpp"

namespace chronos {

/// Evaluation context shared by the reasoning operations: the dynamics, the
/// metric backing rho consistency modes, the structural tolerance and the
/// probability band for true/false verdicts.
struct Context {
  PropagatorFamily fam;
  OperatorMetric metric = OperatorMetric::plain_complex();
  ConsistencyMode mode = ConsistencyMode::Strong;
  double tol = kDefaultTol;
  double tol_prob = 1e-9;
};

/// A consistent decomposition together with its verdict report and cached
/// minimal-element weights. The only arena in which probabilities and truth
/// values are defined.
class Framework {
 public:
  /// Checks consistency; throws InconsistentFramework on a failing verdict.
  static Framework make(DecompositionPtr d, const Context& ctx);

  const DecompositionPtr& decomposition() const { return decomp_; }
  const Decomposition& decomp() const { return *decomp_; }
  const ConsistencyReport& report() const { return report_; }
  const std::vector<double>& minimal_weights() const { return *weights_; }

  AlgebraElement element(std::vector<bool> indicator) const;
  /// Element matching the given history, via slot-wise containment.
  /// Throws ElementNotInFramework when the history is not in the algebra.
  AlgebraElement element_of(const ProductHistory& y, double tol = kDefaultTol) const;
  /// Sum of the selected minimal-element weights.
  double element_weight(const AlgebraElement& e) const;

  bool same_as(const Framework& other) const { return decomp_ == other.decomp_; }

 private:
  Framework(DecompositionPtr d, ConsistencyReport report, std::vector<double> weights)
      : decomp_(std::move(d)),
        report_(report),
        weights_(std::make_shared<std::vector<double>>(std::move(weights))) {}
  DecompositionPtr decomp_;
  ConsistencyReport report_;
  std::shared_ptr<const std::vector<double>> weights_;
};

/// The trivial framework {0, I} realized on the dynamics grid: complete
/// ignorance, the starting point when no initial data is given.
Framework ignorance_framework(const Context& ctx);

/// Nonnegative reals over a framework's minimal elements summing to one and
/// vanishing on zero-weight (dynamically impossible) elements.
class ProbabilityDistribution {
 public:
  const Framework& owner() const { return owner_; }
  const std::vector<double>& values() const { return values_; }
  double probability(const AlgebraElement& e) const;

 private:
  friend ProbabilityDistribution assign(const Framework&, std::vector<double>, const Context&);
  ProbabilityDistribution(Framework owner, std::vector<double> values)
      : owner_(std::move(owner)), values_(std::move(values)) {}
  Framework owner_;
  std::vector<double> values_;
};

/// Validates the probability axioms plus the zero-weight rule.
/// Throws NegativeProbability / NotNormalized / PositiveOnZeroWeight.
ProbabilityDistribution assign(const Framework& f, std::vector<double> values, const Context& ctx);

/// True iff every minimal element of `coarse` is a sum of minimal elements
/// of `fine` (after extending both to the merged grid).
bool is_refinement(const Framework& coarse, const Framework& fine, double tol = kDefaultTol);

/// Transports a distribution to a refinement: Pr'(G) = sum_i theta(G|F_i)
/// Pr(F_i), with zero-probability terms skipped. The restriction of the
/// result to the coarse algebra reproduces the original distribution.
/// Throws NotARefinement.
ProbabilityDistribution refine_distribution(const ProbabilityDistribution& pr,
                                            const Framework& fine, const Context& ctx);

/// Smallest common refinement: minimal elements are all nonzero slot-wise
/// products of one minimal element from each framework. Throws
/// NonCommutingFrameworks when same-slot projectors across frameworks fail
/// to commute, InconsistentRefinement when the generated family fails its
/// consistency check.
Framework generate_common(const std::vector<Framework>& fs, const Context& ctx);

bool compatible(const std::vector<Framework>& fs, const Context& ctx);

/// Initial data: elements asserted true, each within its own framework.
struct InitialData {
  struct Item {
    Framework framework;
    AlgebraElement element;
  };
  std::vector<Item> items;
};

struct CombinedData {
  Framework framework;                // the generated framework D
  AlgebraElement data_element;        // D = D_1 D_2 ... via indicator meet
  ProbabilityDistribution distribution;
};

/// Combines the items into the generated framework and asserts their
/// simultaneous truth. Throws IncompatibleData when the frameworks are
/// incompatible and ZeroWeightData when the conjunction has zero weight
/// (inconsistent initial data). Empty data yields complete ignorance.
CombinedData combine_initial_data(const InitialData& data, const Context& ctx);

/// One event pinned to a grid time; queries are posed as conjunctions of
/// these.
struct EventConstraint {
  double time;
  Projector event;
  std::string label;
};

struct FrameworkSummary {
  int minimal_count = 0;
  std::vector<double> grid;
  double worst_magnitude = 0.0;
  bool consistent = false;
};

struct Verdict {
  enum class Kind { Probability, True, False, Meaningless, DataInconsistent };
  Kind kind = Kind::Meaningless;
  double probability = 0.0;  // meaningful for Probability / True / False only
  std::optional<Framework> framework;  // framework of record, when one exists
  FrameworkSummary summary;            // of the framework of record or failed candidate
  std::string note;
};

const char* verdict_kind_name(Verdict::Kind k);

/// Answers Pr(targets | conditions and data) in the coarsest framework that
/// refines the combined data and contains every queried event, built by
/// slot-wise products with each event's {E, I-E} partition. Returns a
/// meaningless verdict when the events cannot share a consistent framework
/// with the data, and a data-inconsistent verdict when the data itself
/// cannot be combined. Throws ZeroConditionWeight when the condition weight
/// vanishes.
Verdict query(const InitialData& data, const std::vector<EventConstraint>& targets,
              const std::vector<EventConstraint>& conditions, const Context& ctx);

enum class Classification { Tautology, Contradiction, Contingent };

/// Tautology: every positive-weight minimal element lies inside y (y is true
/// under every admissible distribution). Contradiction: y selects only
/// zero-weight elements. Contingent otherwise.
Classification classify(const Framework& f, const AlgebraElement& y, const Context& ctx);

}  // namespace chronos
