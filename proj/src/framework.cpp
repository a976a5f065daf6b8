#include "chronos/framework.hpp"

#include <cmath>
#include <string>

namespace chronos {

bool Decomposition::cap_is_identity() const {
  for (const Projector& e : cap_.events())
    if (e.rank() != e.dim()) return false;
  return true;
}

DecompositionPtr build_decomposition(std::vector<ProductHistory> minimal, ProductHistory cap,
                                     double tol) {
  if (minimal.empty())
    throw Error(Errc::IncompleteSum, "a decomposition needs at least one minimal element");
  const TimeGrid& grid = cap.grid();
  const int d = cap.dim();
  for (auto& m : minimal) {
    if (!(m.grid() == grid)) m = m.extend(grid);
    if (m.dim() != d)
      throw Error(Errc::DimensionMismatch, "minimal elements and cap have mixed dimensions");
    if (m.is_zero())
      throw Error(Errc::ZeroVector, "minimal element is the zero history; drop zero products first");
  }
  for (size_t i = 0; i < minimal.size(); ++i)
    for (size_t j = i + 1; j < minimal.size(); ++j)
      if (!slotwise_orthogonal(minimal[i], minimal[j], tol))
        throw Error(Errc::NotOrthogonal, "minimal elements " + std::to_string(i) + " and " +
                                             std::to_string(j) + " are not orthogonal");
  double total = 0.0;
  for (const auto& m : minimal) {
    if (!slotwise_contained(m, cap, tol))
      throw Error(Errc::IncompleteSum, "a minimal element is not contained under the cap");
    total += m.history_trace();
  }
  const double cap_trace = cap.history_trace();
  if (total != cap_trace)
    throw Error(Errc::IncompleteSum, "minimal elements cover trace " + std::to_string(total) +
                                         " of the cap's " + std::to_string(cap_trace) +
                                         " (deficit " + std::to_string(cap_trace - total) + ")");
  return DecompositionPtr(new Decomposition(std::move(minimal), std::move(cap)));
}

DecompositionPtr build_identity_decomposition(std::vector<ProductHistory> minimal, double tol) {
  if (minimal.empty())
    throw Error(Errc::IncompleteSum, "a decomposition needs at least one minimal element");
  TimeGrid grid = minimal.front().grid();
  for (const auto& m : minimal) grid = TimeGrid::merge(grid, m.grid());
  const int d = minimal.front().dim();
  return build_decomposition(std::move(minimal), ProductHistory::identity(grid, d), tol);
}

const char* consistency_mode_name(ConsistencyMode m) {
  switch (m) {
    case ConsistencyMode::Weak: return "weak";
    case ConsistencyMode::Strong: return "strong";
    case ConsistencyMode::Rho: return "rho";
    case ConsistencyMode::RhoRho: return "rho-rho";
  }
  return "?";
}

OperatorMetric metric_for_mode(ConsistencyMode mode, const OperatorMetric& metric) {
  switch (mode) {
    case ConsistencyMode::Weak:
      return OperatorMetric::plain_real();
    case ConsistencyMode::Strong:
      return OperatorMetric::plain_complex();
    case ConsistencyMode::Rho:
    case ConsistencyMode::RhoRho:
      if (!metric.rho || (mode == ConsistencyMode::RhoRho && !metric.rho_prime))
        throw Error(Errc::NotDensityMatrix,
                    "rho consistency modes need the corresponding density matrices");
      return metric;
  }
  return metric;
}

ConsistencyReport check_consistency(const Decomposition& d, const PropagatorFamily& fam,
                                    const OperatorMetric& metric, ConsistencyMode mode,
                                    double tol) {
  const OperatorMetric m = metric_for_mode(mode, metric);
  ConsistencyReport report;
  report.mode = mode;
  report.tolerance = tol * static_cast<double>(d.dim());
  std::vector<CMatrix> ks;
  ks.reserve(d.minimal().size());
  for (const auto& f : d.minimal()) ks.push_back(weight_operator(f, fam));
  double worst = -1.0;
  for (size_t j = 0; j < ks.size(); ++j) {
    for (size_t k = j + 1; k < ks.size(); ++k) {
      const double mag = std::abs(op_inner(ks[j], ks[k], m));
      if (mag > worst) {
        worst = mag;
        report.worst_j = static_cast<int>(j);
        report.worst_k = static_cast<int>(k);
      }
    }
  }
  report.worst_magnitude = std::max(worst, 0.0);
  report.verdict = report.worst_magnitude <= report.tolerance;
  return report;
}

AlgebraElement::AlgebraElement(DecompositionPtr owner, std::vector<bool> indicator)
    : owner_(std::move(owner)), indicator_(std::move(indicator)) {
  if (static_cast<int>(indicator_.size()) != owner_->size())
    throw Error(Errc::DimensionMismatch,
                "indicator length does not match the number of minimal elements");
}

bool AlgebraElement::empty() const {
  for (bool b : indicator_)
    if (b) return false;
  return true;
}

std::vector<ProductHistory> AlgebraElement::selected() const {
  std::vector<ProductHistory> out;
  for (size_t i = 0; i < indicator_.size(); ++i)
    if (indicator_[i]) out.push_back(owner_->minimal()[i]);
  return out;
}

namespace {
void require_same_owner(const AlgebraElement& x, const AlgebraElement& y) {
  if (x.owner() != y.owner())
    throw Error(Errc::OwnerMismatch,
                "elements of different decompositions cannot be combined; use a single framework");
}
}  // namespace

AlgebraElement negate(const AlgebraElement& y) {
  std::vector<bool> ind = y.indicator();
  for (size_t i = 0; i < ind.size(); ++i) ind[i] = !ind[i];
  return AlgebraElement(y.owner(), std::move(ind));
}

AlgebraElement meet(const AlgebraElement& x, const AlgebraElement& y) {
  require_same_owner(x, y);
  std::vector<bool> ind(x.indicator().size());
  for (size_t i = 0; i < ind.size(); ++i) ind[i] = x.indicator()[i] && y.indicator()[i];
  return AlgebraElement(x.owner(), std::move(ind));
}

AlgebraElement join(const AlgebraElement& x, const AlgebraElement& y) {
  require_same_owner(x, y);
  std::vector<bool> ind(x.indicator().size());
  for (size_t i = 0; i < ind.size(); ++i) ind[i] = x.indicator()[i] || y.indicator()[i];
  return AlgebraElement(x.owner(), std::move(ind));
}

std::optional<std::vector<bool>> contains(const Decomposition& d, const ProductHistory& y,
                                          double tol) {
  ProductHistory ye = y;
  if (!(ye.grid() == d.grid())) {
    if (!d.grid().is_superset_of(ye.grid())) return std::nullopt;
    ye = ye.extend(d.grid());
  }
  std::vector<bool> ind(d.minimal().size(), false);
  double covered = 0.0;
  for (size_t i = 0; i < d.minimal().size(); ++i) {
    if (slotwise_contained(d.minimal()[i], ye, tol)) {
      ind[i] = true;
      covered += d.minimal()[i].history_trace();
    }
  }
  if (covered != ye.history_trace()) return std::nullopt;
  return ind;
}

DecompositionPtr complete_fixed_initial(const DecompositionPtr& d, const PropagatorFamily& fam,
                                        const OperatorMetric& metric, ConsistencyMode mode,
                                        double tol) {
  if (d->cap_is_identity()) return d;
  const ConsistencyReport report = check_consistency(*d, fam, metric, mode, tol);
  if (!report.verdict)
    throw Error(Errc::InconsistentInput,
                "fixed-event family is inconsistent (worst pair magnitude " +
                    std::to_string(report.worst_magnitude) + ")");
  // I - cap is itself a product history only when one slot differs from the
  // identity; that is exactly the fixed-event shape this operation covers.
  int fixed_slot = -1;
  for (size_t j = 0; j < d->cap().events().size(); ++j) {
    const Projector& e = d->cap().events()[j];
    if (e.rank() != e.dim()) {
      if (fixed_slot >= 0)
        throw Error(Errc::InconsistentInput,
                    "cap fixes more than one time; its complement is no product history");
      fixed_slot = static_cast<int>(j);
    }
  }
  std::vector<Projector> slots;
  for (size_t j = 0; j < d->cap().events().size(); ++j)
    slots.push_back(static_cast<int>(j) == fixed_slot ? complement(d->cap().events()[j])
                                                      : d->cap().events()[j]);
  std::vector<ProductHistory> minimal = d->minimal();
  minimal.emplace_back(d->grid(), std::move(slots));
  return build_decomposition(std::move(minimal),
                             ProductHistory::identity(d->grid(), d->dim()), tol);
}

}  // namespace chronos
