#include "chronos/histories.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chronos {

TimeGrid::TimeGrid(std::vector<double> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw Error(Errc::UnknownTime, "a time grid needs at least one time");
  for (size_t j = 0; j + 1 < labels_.size(); ++j)
    if (!(labels_[j] < labels_[j + 1]))
      throw Error(Errc::UnknownTime, "time grid must be strictly increasing");
}

namespace {
bool close_times(double a, double b) {
  return a == b || std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}
}  // namespace

bool TimeGrid::contains(double t) const {
  return std::any_of(labels_.begin(), labels_.end(), [&](double u) { return close_times(u, t); });
}

int TimeGrid::index_of(double t) const {
  for (size_t j = 0; j < labels_.size(); ++j)
    if (close_times(labels_[j], t)) return static_cast<int>(j);
  throw Error(Errc::UnknownTime, "time " + std::to_string(t) + " is not on the grid");
}

bool TimeGrid::is_superset_of(const TimeGrid& other) const {
  return std::all_of(other.labels_.begin(), other.labels_.end(),
                     [&](double t) { return contains(t); });
}

TimeGrid TimeGrid::merge(const TimeGrid& a, const TimeGrid& b) {
  std::vector<double> all = a.labels_;
  for (double t : b.labels_)
    if (!a.contains(t)) all.push_back(t);
  std::sort(all.begin(), all.end());
  return TimeGrid(std::move(all));
}

ProductHistory::ProductHistory(TimeGrid grid, std::vector<Projector> events)
    : grid_(std::move(grid)), events_(std::move(events)) {
  if (static_cast<int>(events_.size()) != grid_.size())
    throw Error(Errc::DimensionMismatch, "history needs exactly one event per grid slot");
  const int d = events_.front().dim();
  for (const Projector& e : events_)
    if (e.dim() != d)
      throw Error(Errc::DimensionMismatch, "history events live on mixed dimensions");
}

ProductHistory ProductHistory::identity(const TimeGrid& grid, int dim) {
  return ProductHistory(grid, std::vector<Projector>(grid.size(), Projector::identity(dim)));
}

ProductHistory ProductHistory::extend(const TimeGrid& target) const {
  if (!target.is_superset_of(grid_))
    throw Error(Errc::NotASuperset, "target grid does not contain the history's grid");
  std::vector<Projector> events;
  events.reserve(target.size());
  for (double t : target.labels())
    events.push_back(grid_.contains(t) ? events_[grid_.index_of(t)] : Projector::identity(dim()));
  return ProductHistory(target, std::move(events));
}

double ProductHistory::history_trace() const {
  double tr = 1.0;
  for (const Projector& e : events_) tr *= static_cast<double>(e.rank());
  return tr;
}

bool ProductHistory::is_zero() const {
  return std::any_of(events_.begin(), events_.end(),
                     [](const Projector& e) { return e.rank() == 0; });
}

ProductHistory history_product(const ProductHistory& x, const ProductHistory& y, double tol) {
  if (!(x.grid() == y.grid()))
    throw Error(Errc::DimensionMismatch, "history product requires a common grid; extend first");
  std::vector<Projector> slots;
  slots.reserve(x.events().size());
  for (size_t j = 0; j < x.events().size(); ++j) {
    const Projector& a = x.events()[j];
    const Projector& b = y.events()[j];
    if (!commutes(a, b, tol))
      throw Error(Errc::NotAProjectorProduct,
                  "slot " + std::to_string(j) + " events do not commute; the product is no history");
    slots.push_back(make_projector(CMatrix(a.matrix() * b.matrix()), tol));
  }
  return ProductHistory(x.grid(), std::move(slots));
}

bool slotwise_orthogonal(const ProductHistory& x, const ProductHistory& y, double tol) {
  for (size_t j = 0; j < x.events().size(); ++j)
    if (inf_norm(CMatrix(x.events()[j].matrix() * y.events()[j].matrix())) <= tol) return true;
  return false;
}

bool slotwise_contained(const ProductHistory& x, const ProductHistory& y, double tol) {
  for (size_t j = 0; j < x.events().size(); ++j) {
    const CMatrix& a = x.events()[j].matrix();
    const CMatrix& b = y.events()[j].matrix();
    if (inf_norm(CMatrix(b * a - a)) > tol) return false;
  }
  return true;
}

HistorySum::HistorySum(std::vector<ProductHistory> terms, double tol) : terms_(std::move(terms)) {
  if (terms_.empty()) throw Error(Errc::DimensionMismatch, "a history sum needs at least one term");
  for (size_t i = 0; i < terms_.size(); ++i) {
    if (!(terms_[i].grid() == terms_.front().grid()))
      throw Error(Errc::DimensionMismatch, "history sum terms live on different grids");
    for (size_t j = i + 1; j < terms_.size(); ++j)
      if (!slotwise_orthogonal(terms_[i], terms_[j], tol))
        throw Error(Errc::NotOrthogonal, "history sum terms " + std::to_string(i) + " and " +
                                             std::to_string(j) + " are not orthogonal");
  }
}

HistorySum::HistorySum(ProductHistory term) : terms_{std::move(term)} {}

WeightOperator weight_operator(const ProductHistory& y, const PropagatorFamily& fam) {
  const auto& times = y.grid().labels();
  const auto& events = y.events();
  if (events.front().dim() != fam.dim())
    throw Error(Errc::DimensionMismatch, "history and dynamics dimensions differ");
  CMatrix k = events.front().matrix();
  for (size_t j = 1; j < events.size(); ++j)
    k = k * fam.propagator(times[j - 1], times[j]) * events[j].matrix();
  return k;
}

WeightOperator weight_operator(const HistorySum& y, const PropagatorFamily& fam) {
  CMatrix k = weight_operator(y.terms().front(), fam);
  for (size_t i = 1; i < y.terms().size(); ++i) k += weight_operator(y.terms()[i], fam);
  return k;
}

WeightOperator weight_operator_heisenberg(const ProductHistory& y, const PropagatorFamily& fam,
                                          double t_reference) {
  const auto& times = y.grid().labels();
  const auto& events = y.events();
  CMatrix k = CMatrix::Identity(fam.dim(), fam.dim());
  for (size_t j = 0; j < events.size(); ++j) {
    const CMatrix heis = fam.propagator(t_reference, times[j]) * events[j].matrix() *
                         fam.propagator(times[j], t_reference);
    k = k * heis;
  }
  return k;
}

namespace {
double metric_weight(const CMatrix& k, const OperatorMetric& metric) {
  return op_inner(k, k, metric).real();
}
}  // namespace

double weight(const ProductHistory& y, const PropagatorFamily& fam, const OperatorMetric& metric) {
  return metric_weight(weight_operator(y, fam), metric);
}

double weight(const HistorySum& y, const PropagatorFamily& fam, const OperatorMetric& metric) {
  return metric_weight(weight_operator(y, fam), metric);
}

double theta(const HistorySum& x, const HistorySum& y, const PropagatorFamily& fam,
             const OperatorMetric& metric, double tol) {
  const TimeGrid grid = TimeGrid::merge(x.grid(), y.grid());
  const double wy = weight(y, fam, metric);
  const int d = y.terms().front().dim();
  if (wy <= weight_zero_cutoff(d, tol))
    throw Error(Errc::ZeroConditionWeight,
                "conditioning on weight " + std::to_string(wy) + ", below the zero cutoff");
  // XY expands to the pairwise slot-wise products; zero terms drop out.
  std::vector<ProductHistory> products;
  for (const ProductHistory& xt : x.terms()) {
    const ProductHistory xe = xt.extend(grid);
    for (const ProductHistory& yt : y.terms()) {
      const ProductHistory ye = yt.extend(grid);
      bool zero = false;
      std::vector<Projector> slots;
      for (size_t j = 0; j < xe.events().size(); ++j) {
        const Projector& a = xe.events()[j];
        const Projector& b = ye.events()[j];
        const CMatrix prod = a.matrix() * b.matrix();
        if (inf_norm(prod) <= tol) {
          zero = true;
          break;
        }
        if (!commutes(a, b, tol))
          throw Error(Errc::NotAProjectorProduct,
                      "slot products of the two history sums are not projectors");
        slots.push_back(make_projector(prod, tol));
      }
      if (!zero) products.emplace_back(grid, std::move(slots));
    }
  }
  if (products.empty()) return 0.0;
  return weight(HistorySum(std::move(products), tol), fam, metric) / wy;
}

bool history_self_consistent(const ProductHistory& y, const PropagatorFamily& fam,
                             const OperatorMetric& metric, double tol) {
  // K(I - Y) = K(I) - K(Y) by linearity; K(I) is the full propagation chain.
  const CMatrix k = weight_operator(y, fam);
  const CMatrix k_full =
      weight_operator(ProductHistory::identity(y.grid(), y.dim()), fam);
  const Complex cross = op_inner(k, CMatrix(k_full - k), metric);
  return std::abs(cross) <= weight_zero_cutoff(y.dim(), tol);
}

}  // namespace chronos
