#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "chronos/errors.hpp"

namespace chronos {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using Ket = Eigen::VectorXcd;

/// Default tolerance for structural checks (hermiticity, idempotence,
/// commutation, orthogonality). Overridable per scenario.
inline constexpr double kDefaultTol = 1e-9;

/// Max-abs-entry norm; all structural bounds in this library use it.
double inf_norm(const CMatrix& m);

/// A validated orthogonal projection operator on a single-time Hilbert space.
/// Hermitian and idempotent within tolerance; rank is the rounded trace.
class Projector {
 public:
  const CMatrix& matrix() const { return matrix_; }
  int rank() const { return rank_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  bool is_zero() const { return rank_ == 0; }

  static Projector identity(int dim);
  static Projector zero(int dim);

 private:
  friend Projector make_projector(const CMatrix&, double);
  Projector(CMatrix m, int rank) : matrix_(std::move(m)), rank_(rank) {}
  CMatrix matrix_;
  int rank_;
};

/// Validates hermiticity, idempotence and integer trace, then caches the rank.
/// Throws NotHermitian / NotIdempotent / NonIntegerTrace naming the violated
/// bound and its magnitude.
Projector make_projector(const CMatrix& m, double tol = kDefaultTol);

/// Projector onto the span of the given kets (modified Gram-Schmidt with
/// re-orthogonalization; dependent vectors are dropped).
Projector projector_from_kets(const std::vector<Ket>& kets, double tol = kDefaultTol);

Projector complement(const Projector& p);

/// true iff ||PQ - QP||_inf <= tol.
bool commutes(const Projector& p, const Projector& q, double tol = kDefaultTol);

/// meet = PQ, join = P + Q - PQ; defined only for commuting pairs.
/// Throws NonCommuting otherwise: the pair lies in no common Boolean algebra.
Projector meet(const Projector& p, const Projector& q, double tol = kDefaultTol);
Projector join(const Projector& p, const Projector& q, double tol = kDefaultTol);

/// Inner products on the linear space of operators. `PlainComplex` is
/// Tr[A^dag B]; `PlainReal` its real part (operators as a real vector space);
/// the rho kinds weigh the trace with one or two density matrices.
struct OperatorMetric {
  enum class Kind { PlainComplex, PlainReal, InitialRho, InitialFinalRho };
  Kind kind = Kind::PlainComplex;
  std::optional<CMatrix> rho;
  std::optional<CMatrix> rho_prime;

  static OperatorMetric plain_complex() { return {}; }
  static OperatorMetric plain_real() { return {Kind::PlainReal, {}, {}}; }
  static OperatorMetric initial_rho(CMatrix rho, double tol = kDefaultTol);
  static OperatorMetric initial_final_rho(CMatrix rho, CMatrix rho_prime,
                                          double tol = kDefaultTol);
};

Complex op_inner(const CMatrix& a, const CMatrix& b, const OperatorMetric& metric);

/// Time evolution maps T(t', t) over an ordered grid of times, stored as one
/// unitary per adjacent pair and composed on demand.
class PropagatorFamily {
 public:
  /// Identity dynamics on the given times.
  static PropagatorFamily identity(std::vector<double> times, int dim);
  /// One unitary step map per adjacent pair, steps[j] = T(t_{j+1}, t_j).
  static PropagatorFamily from_steps(std::vector<double> times, std::vector<CMatrix> steps,
                                     double tol = kDefaultTol);
  /// Steps generated by a time-independent Hamiltonian (hbar = 1).
  static PropagatorFamily from_hamiltonian(std::vector<double> times, const CMatrix& h,
                                           double tol = kDefaultTol);

  /// T(t_to, t_from). Composes adjacent maps; T(t,t) = I and
  /// T(t,t') = T(t',t)^dag. Throws UnknownTime for off-grid times.
  CMatrix propagator(double t_to, double t_from) const;

  const std::vector<double>& times() const { return times_; }
  int dim() const { return dim_; }
  bool has_time(double t) const;
  int time_index(double t) const;  // throws UnknownTime

 private:
  PropagatorFamily(std::vector<double> times, std::vector<CMatrix> steps, int dim)
      : times_(std::move(times)), steps_(std::move(steps)), dim_(dim) {}
  std::vector<double> times_;
  std::vector<CMatrix> steps_;  // steps_[j] = T(t_{j+1}, t_j)
  int dim_;
};

/// exp[-i (t_to - t_from) H], hbar = 1. Throws NotHermitian.
CMatrix unitary_from_hamiltonian(const CMatrix& h, double t_to, double t_from,
                                 double tol = kDefaultTol);

}  // namespace chronos
