#include "chronos/qalg.hpp"

#include <cmath>
#include <string>

namespace chronos {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NotHermitian: return "NotHermitian";
    case Errc::NotIdempotent: return "NotIdempotent";
    case Errc::NonIntegerTrace: return "NonIntegerTrace";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::NonCommuting: return "NonCommuting";
    case Errc::NotUnitary: return "NotUnitary";
    case Errc::NotDensityMatrix: return "NotDensityMatrix";
    case Errc::UnknownTime: return "UnknownTime";
    case Errc::NotASuperset: return "NotASuperset";
    case Errc::NotAProjectorProduct: return "NotAProjectorProduct";
    case Errc::ZeroConditionWeight: return "ZeroConditionWeight";
    case Errc::NotOrthogonal: return "NotOrthogonal";
    case Errc::IncompleteSum: return "IncompleteSum";
    case Errc::OwnerMismatch: return "OwnerMismatch";
    case Errc::InconsistentInput: return "InconsistentInput";
    case Errc::NegativeProbability: return "NegativeProbability";
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::PositiveOnZeroWeight: return "PositiveOnZeroWeight";
    case Errc::NotARefinement: return "NotARefinement";
    case Errc::NonCommutingFrameworks: return "NonCommutingFrameworks";
    case Errc::InconsistentRefinement: return "InconsistentRefinement";
    case Errc::IncompatibleData: return "IncompatibleData";
    case Errc::ZeroWeightData: return "ZeroWeightData";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::DuplicateIdentifier: return "DuplicateIdentifier";
    case Errc::UnknownIdentifier: return "UnknownIdentifier";
    case Errc::NonUnitaryDynamics: return "NonUnitaryDynamics";
    case Errc::InconsistentFramework: return "InconsistentFramework";
    case Errc::ElementNotInFramework: return "ElementNotInFramework";
    case Errc::DimensionCap: return "DimensionCap";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

double inf_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

namespace {

void require_square(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw Error(Errc::DimensionMismatch, "expected a nonempty square matrix, got " +
                                             std::to_string(m.rows()) + "x" +
                                             std::to_string(m.cols()));
}

void require_same_dim(const Projector& p, const Projector& q) {
  if (p.dim() != q.dim())
    throw Error(Errc::DimensionMismatch, "projector dimensions differ: " +
                                             std::to_string(p.dim()) + " vs " +
                                             std::to_string(q.dim()));
}

}  // namespace

Projector Projector::identity(int dim) {
  return make_projector(CMatrix::Identity(dim, dim), kDefaultTol);
}

Projector Projector::zero(int dim) {
  return make_projector(CMatrix::Zero(dim, dim), kDefaultTol);
}

Projector make_projector(const CMatrix& m, double tol) {
  require_square(m);
  if (!m.allFinite()) throw Error(Errc::DimensionMismatch, "matrix has non-finite entries");
  const double herm = inf_norm(CMatrix(m - m.adjoint()));
  if (herm > tol)
    throw Error(Errc::NotHermitian,
                "||P - P^dag||_inf = " + std::to_string(herm) + " exceeds tol " + std::to_string(tol));
  const double idem = inf_norm(CMatrix(m * m - m));
  if (idem > tol)
    throw Error(Errc::NotIdempotent,
                "||P^2 - P||_inf = " + std::to_string(idem) + " exceeds tol " + std::to_string(tol));
  const double tr = m.trace().real();
  const double rounded = std::round(tr);
  const double drift = std::abs(tr - rounded);
  if (drift > tol * static_cast<double>(m.rows()))
    throw Error(Errc::NonIntegerTrace, "trace " + std::to_string(tr) + " is " +
                                           std::to_string(drift) +
                                           " away from an integer (bound tol*dim)");
  return Projector(m, static_cast<int>(rounded));
}

Projector projector_from_kets(const std::vector<Ket>& kets, double tol) {
  if (kets.empty()) throw Error(Errc::ZeroVector, "span of no kets");
  const Eigen::Index dim = kets.front().size();
  const double dep_cut = tol * std::sqrt(static_cast<double>(dim));
  std::vector<Ket> basis;
  for (const Ket& k : kets) {
    if (k.size() != dim)
      throw Error(Errc::DimensionMismatch, "ket length " + std::to_string(k.size()) +
                                               " does not match dimension " + std::to_string(dim));
    if (k.norm() <= dep_cut) throw Error(Errc::ZeroVector, "ket has (near-)zero norm");
    Ket v = k;
    // modified Gram-Schmidt, run twice for re-orthogonalization
    for (int pass = 0; pass < 2; ++pass)
      for (const Ket& e : basis) v -= e.dot(v) * e;
    if (v.norm() < dep_cut) continue;  // dependent on earlier kets
    basis.push_back(v.normalized());
  }
  CMatrix p = CMatrix::Zero(dim, dim);
  for (const Ket& e : basis) p += e * e.adjoint();
  return make_projector(p, tol);
}

Projector complement(const Projector& p) {
  return make_projector(CMatrix(CMatrix::Identity(p.dim(), p.dim()) - p.matrix()), kDefaultTol);
}

bool commutes(const Projector& p, const Projector& q, double tol) {
  require_same_dim(p, q);
  return inf_norm(CMatrix(p.matrix() * q.matrix() - q.matrix() * p.matrix())) <= tol;
}

Projector meet(const Projector& p, const Projector& q, double tol) {
  require_same_dim(p, q);
  if (!commutes(p, q, tol))
    throw Error(Errc::NonCommuting,
                "meet of non-commuting projectors: the pair lies in no common Boolean algebra");
  return make_projector(CMatrix(p.matrix() * q.matrix()), tol);
}

Projector join(const Projector& p, const Projector& q, double tol) {
  require_same_dim(p, q);
  if (!commutes(p, q, tol))
    throw Error(Errc::NonCommuting,
                "join of non-commuting projectors: the pair lies in no common Boolean algebra");
  return make_projector(CMatrix(p.matrix() + q.matrix() - p.matrix() * q.matrix()), tol);
}

namespace {

void validate_density(const CMatrix& rho, double tol) {
  require_square(rho);
  if (inf_norm(CMatrix(rho - rho.adjoint())) > tol)
    throw Error(Errc::NotDensityMatrix, "density matrix is not Hermitian within tol");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol)
    throw Error(Errc::NotDensityMatrix, "density matrix has eigenvalue " +
                                            std::to_string(es.eigenvalues().minCoeff()) +
                                            " below the -tol floor");
  if (std::abs(rho.trace().real() - 1.0) > tol || std::abs(rho.trace().imag()) > tol)
    throw Error(Errc::NotDensityMatrix,
                "density matrix trace " + std::to_string(rho.trace().real()) + " != 1");
}

}  // namespace

OperatorMetric OperatorMetric::initial_rho(CMatrix rho, double tol) {
  validate_density(rho, tol);
  return {Kind::InitialRho, std::move(rho), {}};
}

OperatorMetric OperatorMetric::initial_final_rho(CMatrix rho, CMatrix rho_prime, double tol) {
  validate_density(rho, tol);
  validate_density(rho_prime, tol);
  return {Kind::InitialFinalRho, std::move(rho), std::move(rho_prime)};
}

Complex op_inner(const CMatrix& a, const CMatrix& b, const OperatorMetric& metric) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(Errc::DimensionMismatch, "operator inner product with mismatched shapes");
  switch (metric.kind) {
    case OperatorMetric::Kind::PlainComplex:
      return (a.adjoint() * b).trace();
    case OperatorMetric::Kind::PlainReal:
      return Complex((a.adjoint() * b).trace().real(), 0.0);
    case OperatorMetric::Kind::InitialRho:
      return (a.adjoint() * *metric.rho * b).trace();
    case OperatorMetric::Kind::InitialFinalRho:
      return (a.adjoint() * *metric.rho * b * *metric.rho_prime).trace();
  }
  return {};
}

PropagatorFamily PropagatorFamily::identity(std::vector<double> times, int dim) {
  std::vector<CMatrix> steps;
  if (times.empty()) throw Error(Errc::UnknownTime, "a propagator family needs at least one time");
  for (size_t j = 0; j + 1 < times.size(); ++j) {
    if (!(times[j] < times[j + 1]))
      throw Error(Errc::UnknownTime, "time grid must be strictly increasing");
    steps.push_back(CMatrix::Identity(dim, dim));
  }
  return PropagatorFamily(std::move(times), std::move(steps), dim);
}

PropagatorFamily PropagatorFamily::from_steps(std::vector<double> times, std::vector<CMatrix> steps,
                                              double tol) {
  if (times.empty()) throw Error(Errc::UnknownTime, "a propagator family needs at least one time");
  if (steps.size() + 1 != times.size())
    throw Error(Errc::DimensionMismatch, "expected one step map per adjacent time pair");
  for (size_t j = 0; j + 1 < times.size(); ++j)
    if (!(times[j] < times[j + 1]))
      throw Error(Errc::UnknownTime, "time grid must be strictly increasing");
  int dim = steps.empty() ? 1 : static_cast<int>(steps.front().rows());
  for (const CMatrix& u : steps) {
    require_square(u);
    if (static_cast<int>(u.rows()) != dim)
      throw Error(Errc::DimensionMismatch, "step maps have mixed dimensions");
    const double dev = inf_norm(CMatrix(u.adjoint() * u - CMatrix::Identity(dim, dim)));
    if (dev > tol)
      throw Error(Errc::NotUnitary,
                  "step map deviates from unitarity by " + std::to_string(dev));
  }
  return PropagatorFamily(std::move(times), std::move(steps), dim);
}

PropagatorFamily PropagatorFamily::from_hamiltonian(std::vector<double> times, const CMatrix& h,
                                                    double tol) {
  std::vector<CMatrix> steps;
  for (size_t j = 0; j + 1 < times.size(); ++j)
    steps.push_back(unitary_from_hamiltonian(h, times[j + 1], times[j], tol));
  return from_steps(std::move(times), std::move(steps), tol);
}

bool PropagatorFamily::has_time(double t) const {
  for (double u : times_)
    if (u == t || std::abs(u - t) <= 1e-12 * std::max(1.0, std::abs(u))) return true;
  return false;
}

int PropagatorFamily::time_index(double t) const {
  for (size_t j = 0; j < times_.size(); ++j)
    if (times_[j] == t || std::abs(times_[j] - t) <= 1e-12 * std::max(1.0, std::abs(times_[j])))
      return static_cast<int>(j);
  throw Error(Errc::UnknownTime, "time " + std::to_string(t) + " is not on the family grid");
}

CMatrix PropagatorFamily::propagator(double t_to, double t_from) const {
  const int a = time_index(t_to);
  const int b = time_index(t_from);
  if (a == b) return CMatrix::Identity(dim_, dim_);
  if (a > b) {
    // forward chain T(t_a, t_b) = steps[a-1] ... steps[b]
    CMatrix u = steps_[b];
    for (int j = b + 1; j < a; ++j) u = steps_[j] * u;
    return u;
  }
  return propagator(t_from, t_to).adjoint();
}

CMatrix unitary_from_hamiltonian(const CMatrix& h, double t_to, double t_from, double tol) {
  require_square(h);
  const double herm = inf_norm(CMatrix(h - h.adjoint()));
  if (herm > tol)
    throw Error(Errc::NotHermitian, "Hamiltonian deviates from Hermitian by " + std::to_string(herm));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const double dt = t_to - t_from;
  Eigen::VectorXcd phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k)
    phases[k] = std::exp(Complex(0.0, -dt * es.eigenvalues()[k]));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace chronos
