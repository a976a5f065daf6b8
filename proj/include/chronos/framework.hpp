#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "chronos/histories.hpp"

namespace chronos {

/// A decomposition of the history identity (or of a smaller cap history)
/// into pairwise-orthogonal product histories, the minimal elements of a
/// Boolean algebra of histories.
class Decomposition {
 public:
  const TimeGrid& grid() const { return cap_.grid(); }
  const std::vector<ProductHistory>& minimal() const { return minimal_; }
  const ProductHistory& cap() const { return cap_; }
  int size() const { return static_cast<int>(minimal_.size()); }
  int dim() const { return cap_.dim(); }
  bool cap_is_identity() const;

 private:
  friend std::shared_ptr<const Decomposition> build_decomposition(std::vector<ProductHistory>,
                                                                  ProductHistory, double);
  Decomposition(std::vector<ProductHistory> minimal, ProductHistory cap)
      : minimal_(std::move(minimal)), cap_(std::move(cap)) {}
  std::vector<ProductHistory> minimal_;
  ProductHistory cap_;
};

using DecompositionPtr = std::shared_ptr<const Decomposition>;

/// Validates pairwise orthogonality (slot-wise), containment of every
/// minimal element under the cap, and the completeness trace identity.
/// Throws NotOrthogonal(i,j) or IncompleteSum with the trace deficit.
DecompositionPtr build_decomposition(std::vector<ProductHistory> minimal, ProductHistory cap,
                                     double tol = kDefaultTol);

/// Convenience: cap = full identity history on the common grid.
DecompositionPtr build_identity_decomposition(std::vector<ProductHistory> minimal,
                                              double tol = kDefaultTol);

enum class ConsistencyMode { Weak, Strong, Rho, RhoRho };

const char* consistency_mode_name(ConsistencyMode m);

/// Metric matching a mode: Weak uses the real operator inner product, Strong
/// the complex one; the rho modes take their density matrices from `metric`.
OperatorMetric metric_for_mode(ConsistencyMode mode, const OperatorMetric& metric);

struct ConsistencyReport {
  ConsistencyMode mode = ConsistencyMode::Strong;
  bool verdict = false;
  int worst_j = -1;  // -1 when there is no off-diagonal pair
  int worst_k = -1;
  double worst_magnitude = 0.0;
  double tolerance = 0.0;  // the applied bound, tol * d
};

/// Computes all pairwise <K(F_j), K(F_k)> under the mode's metric and
/// reports the worst off-diagonal magnitude. Verdict: worst <= tol * d.
/// Single-time decompositions pass automatically.
ConsistencyReport check_consistency(const Decomposition& d, const PropagatorFamily& fam,
                                    const OperatorMetric& metric, ConsistencyMode mode,
                                    double tol = kDefaultTol);

/// An element of a decomposition's Boolean algebra: an indicator vector over
/// the minimal elements. Elements of different decompositions cannot be
/// combined.
class AlgebraElement {
 public:
  AlgebraElement(DecompositionPtr owner, std::vector<bool> indicator);
  const DecompositionPtr& owner() const { return owner_; }
  const std::vector<bool>& indicator() const { return indicator_; }
  bool empty() const;

  /// The element as an explicit history sum (selected minimal elements).
  /// Empty elements have no terms and are reported via empty().
  std::vector<ProductHistory> selected() const;

 private:
  DecompositionPtr owner_;
  std::vector<bool> indicator_;
};

AlgebraElement negate(const AlgebraElement& y);
AlgebraElement meet(const AlgebraElement& x, const AlgebraElement& y);
AlgebraElement join(const AlgebraElement& x, const AlgebraElement& y);

/// The indicator of y within d, when y is expressible as a sum of minimal
/// elements (slot-wise containment test plus the trace identity); absent
/// otherwise. y is extended to d's grid first.
std::optional<std::vector<bool>> contains(const Decomposition& d, const ProductHistory& y,
                                          double tol = kDefaultTol);

/// For a consistent fixed-initial-event family with cap A (.) I ... I,
/// appends I - A as an extra minimal element, giving a family with cap equal
/// to the full history identity. A cap that is already the identity is
/// returned unchanged. Throws InconsistentInput when the input family fails
/// its consistency check.
DecompositionPtr complete_fixed_initial(const DecompositionPtr& d, const PropagatorFamily& fam,
                                        const OperatorMetric& metric, ConsistencyMode mode,
                                        double tol = kDefaultTol);

}  // namespace chronos
