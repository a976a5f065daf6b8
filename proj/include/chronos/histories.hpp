#pragma once

#include <vector>

#include "chronos/qalg.hpp"

namespace chronos {

/// Strictly increasing, finite list of time labels.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> labels);
  const std::vector<double>& labels() const { return labels_; }
  int size() const { return static_cast<int>(labels_.size()); }
  bool contains(double t) const;
  int index_of(double t) const;  // throws UnknownTime
  bool is_superset_of(const TimeGrid& other) const;
  static TimeGrid merge(const TimeGrid& a, const TimeGrid& b);
  bool operator==(const TimeGrid& other) const { return labels_ == other.labels_; }

 private:
  std::vector<double> labels_;
};

/// A history: one event projector per grid slot, standing for the
/// slot-ordered tensor product E_1 (.) E_2 (.) ... (.) E_n on history space.
/// History-space operators are never materialized; everything is computed
/// slot-wise on single-time d x d matrices.
class ProductHistory {
 public:
  ProductHistory(TimeGrid grid, std::vector<Projector> events);
  /// All-identity history on the grid.
  static ProductHistory identity(const TimeGrid& grid, int dim);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<Projector>& events() const { return events_; }
  const Projector& event_at(double t) const { return events_[grid_.index_of(t)]; }
  int dim() const { return events_.front().dim(); }

  /// Inserts identity projectors at the new slots of a superset grid;
  /// original events are unchanged. Throws NotASuperset.
  ProductHistory extend(const TimeGrid& target) const;

  /// Trace on history space = product of slot ranks (exact in double at desk
  /// scale).
  double history_trace() const;
  /// True when some slot event has rank zero.
  bool is_zero() const;

 private:
  TimeGrid grid_;
  std::vector<Projector> events_;
};

/// Slot-wise operator product of two histories on a common grid. Each slot
/// pair must commute within tol (their product is then again a projector);
/// throws NotAProjectorProduct otherwise.
ProductHistory history_product(const ProductHistory& x, const ProductHistory& y, double tol);

/// True iff the two histories are orthogonal on history space, decided
/// slot-wise: some slot has ||E_x E_y||_inf <= tol.
bool slotwise_orthogonal(const ProductHistory& x, const ProductHistory& y, double tol);

/// True iff x <= y on history space, decided slot-wise: every slot satisfies
/// Y_j X_j = X_j within tol. Exact for nonzero product histories.
bool slotwise_contained(const ProductHistory& x, const ProductHistory& y, double tol);

/// A sum of pairwise-orthogonal product histories on a common grid.
class HistorySum {
 public:
  HistorySum(std::vector<ProductHistory> terms, double tol = kDefaultTol);
  explicit HistorySum(ProductHistory term);
  const std::vector<ProductHistory>& terms() const { return terms_; }
  const TimeGrid& grid() const { return terms_.front().grid(); }

 private:
  std::vector<ProductHistory> terms_;
};

using WeightOperator = CMatrix;

/// K(Y) = E_1 T(t_1,t_2) E_2 ... T(t_{n-1},t_n) E_n, a d x d matrix.
WeightOperator weight_operator(const ProductHistory& y, const PropagatorFamily& fam);
/// K extended linearly over the sum's terms.
WeightOperator weight_operator(const HistorySum& y, const PropagatorFamily& fam);

/// Heisenberg form: the product of events conjugated to the reference time
/// t_r; equals T(t_r,t_1) K T(t_n,t_r), so it carries the same weight.
WeightOperator weight_operator_heisenberg(const ProductHistory& y, const PropagatorFamily& fam,
                                          double t_reference);

/// W(Y) = <K(Y), K(Y)> under the metric; nonnegative for the plain metrics.
double weight(const ProductHistory& y, const PropagatorFamily& fam,
              const OperatorMetric& metric = OperatorMetric::plain_complex());
double weight(const HistorySum& y, const PropagatorFamily& fam,
              const OperatorMetric& metric = OperatorMetric::plain_complex());

/// theta(X|Y) = W(XY)/W(Y), the weight ratio acting as a conditional
/// probability. Defined when the product XY = YX is again a projector, which
/// holds for indicator sums over one framework's minimal elements. Throws
/// ZeroConditionWeight when W(Y) is below the zero cutoff.
double theta(const HistorySum& x, const HistorySum& y, const PropagatorFamily& fam,
             const OperatorMetric& metric = OperatorMetric::plain_complex(),
             double tol = kDefaultTol);

/// Zero-weight cutoff: weights at or below tol*d are treated as exactly zero.
inline double weight_zero_cutoff(int dim, double tol) { return tol * static_cast<double>(dim); }

/// Diagnostic for a single history outside any family: true when K(Y) is
/// orthogonal to K(I - Y) within tol*d, i.e. some consistent family could
/// contain Y.
bool history_self_consistent(const ProductHistory& y, const PropagatorFamily& fam,
                             const OperatorMetric& metric = OperatorMetric::plain_complex(),
                             double tol = kDefaultTol);

}  // namespace chronos
