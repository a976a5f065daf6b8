#include <complex>
#include <sstream>

#include "chronos/scenario.hpp"

namespace chronos {

namespace {

using namespace ast;

Complex eval_scalar(const Scalar& s) {
  switch (s.op) {
    case Scalar::Op::Number: return Complex(s.number, 0.0);
    case Scalar::Op::ImagUnit: return Complex(0.0, 1.0);
    case Scalar::Op::Sqrt: return std::sqrt(eval_scalar(s.kids[0]));
    case Scalar::Op::Neg: return -eval_scalar(s.kids[0]);
    case Scalar::Op::Add: return eval_scalar(s.kids[0]) + eval_scalar(s.kids[1]);
    case Scalar::Op::Sub: return eval_scalar(s.kids[0]) - eval_scalar(s.kids[1]);
    case Scalar::Op::Mul: return eval_scalar(s.kids[0]) * eval_scalar(s.kids[1]);
    case Scalar::Op::Div: return eval_scalar(s.kids[0]) / eval_scalar(s.kids[1]);
  }
  return {};
}

std::string atom_label(const EventAtom& a) {
  std::string s;
  if (a.star) s = "*";
  else s = (a.negated ? "~" : "") + a.name;
  if (!a.time.empty()) s += "@" + a.time;
  return s;
}

class Elaborator {
 public:
  Elaborator(const ScenarioAst& ast, const ElaborationOptions& opt) : ast_(ast), opt_(opt) {
    scen_.options = opt;
  }

  Scenario run() {
    for (const Decl& decl : ast_.decls) {
      span_ = decl.span;
      std::visit([&](const auto& node) { handle(node); }, decl.node);
    }
    finalize_dynamics();
    // assume/query resolution needs the dynamics, so it runs last
    for (const auto& [span, node] : pending_assumes_) {
      span_ = span;
      resolve_assume(node);
    }
    for (const auto& [span, node] : pending_queries_) {
      span_ = span;
      resolve_query(node);
    }
    return std::move(scen_);
  }

 private:
  [[noreturn]] void fail(Errc code, const std::string& message) {
    throw Error(code, message, span_);
  }

  template <typename F>
  auto spanned(F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const Error& e) {
      if (e.span()) throw;
      throw Error(e.code(), e.message(), span_);
    }
  }

  void require_space() {
    if (scen_.dim == 0) fail(Errc::UnknownIdentifier, "no 'space dim N' declared yet");
  }

  // ---- declarations ------------------------------------------------------

  void handle(const SpaceDecl& d) {
    if (scen_.dim != 0) fail(Errc::DuplicateIdentifier, "the space dimension is already declared");
    if (d.dim < 1) fail(Errc::DimensionMismatch, "space dimension must be at least 1");
    if (d.dim > opt_.max_dim)
      fail(Errc::DimensionCap, "space dimension " + std::to_string(d.dim) +
                                   " exceeds the configured cap of " + std::to_string(opt_.max_dim));
    scen_.dim = d.dim;
  }

  void handle(const KetDecl& d) {
    require_space();
    scen_.kets.emplace(d.name, eval_ket(d.expr));
  }

  void handle(const ProjDecl& d) {
    require_space();
    scen_.projectors.emplace(d.name, eval_proj(d.expr));
  }

  void handle(const UnitaryDecl& d) {
    require_space();
    CMatrix u = eval_matrix(d.matrix);
    const double dev = inf_norm(CMatrix(u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())));
    if (dev > opt_.tol)
      fail(Errc::NonUnitaryDynamics,
           "matrix '" + d.name + "' deviates from unitarity by " + std::to_string(dev));
    unitaries_.emplace(d.name, std::move(u));
  }

  void handle(const TimesDecl& d) {
    if (!scen_.times.empty()) fail(Errc::DuplicateIdentifier, "the time grid is already declared");
    for (size_t j = 0; j < d.points.size(); ++j) {
      double value = static_cast<double>(j);
      if (d.points[j].value) {
        const Complex v = eval_scalar(*d.points[j].value);
        if (std::abs(v.imag()) > 1e-12) fail(Errc::UnknownTime, "time values must be real");
        value = v.real();
      }
      scen_.times.emplace_back(d.points[j].name, value);
    }
    for (size_t j = 0; j + 1 < scen_.times.size(); ++j)
      if (!(scen_.times[j].second < scen_.times[j + 1].second))
        fail(Errc::UnknownTime, "time values must be strictly increasing");
  }

  void handle(const EvolveDecl& d) {
    require_space();
    if (scen_.times.empty()) fail(Errc::UnknownIdentifier, "declare 'times' before 'evolve'");
    if (dynamics_finalized_)
      fail(Errc::DuplicateIdentifier, "dynamics cannot change once frameworks use it");
    switch (d.kind) {
      case EvolveDecl::Kind::Identity:
        if (hamiltonian_ || !steps_.empty() || identity_dynamics_)
          fail(Errc::DuplicateIdentifier, "dynamics is already declared");
        identity_dynamics_ = true;
        break;
      case EvolveDecl::Kind::Hamiltonian: {
        if (hamiltonian_ || !steps_.empty() || identity_dynamics_)
          fail(Errc::DuplicateIdentifier, "dynamics is already declared");
        CMatrix h = eval_matrix(d.hamiltonian);
        if (inf_norm(CMatrix(h - h.adjoint())) > opt_.tol)
          fail(Errc::NonUnitaryDynamics, "the Hamiltonian must be Hermitian");
        hamiltonian_ = std::move(h);
        break;
      }
      case EvolveDecl::Kind::Step: {
        if (hamiltonian_ || identity_dynamics_)
          fail(Errc::DuplicateIdentifier, "dynamics is already declared");
        auto it = unitaries_.find(d.unitary);
        if (it == unitaries_.end())
          fail(Errc::UnknownIdentifier, "unitary '" + d.unitary + "' is not declared");
        const int from = time_index(d.from);
        const int to = time_index(d.to);
        if (to != from + 1)
          fail(Errc::UnknownTime, "step maps must connect adjacent times in order");
        if (steps_.count(from)) fail(Errc::DuplicateIdentifier, "this step is already declared");
        steps_.emplace(from, it->second);
        break;
      }
    }
  }

  void handle(const HistoryDecl& d) {
    require_space();
    scen_.histories.emplace(d.name, history_from_conj(d.conj));
  }

  void handle(const FrameworkDecl& d) {
    require_space();
    finalize_dynamics();
    std::vector<ProductHistory> minimal = eval_fw_sum(d.expr);
    int dropped = 0;
    std::erase_if(minimal, [&](const ProductHistory& m) {
      if (m.is_zero()) {
        ++dropped;
        return true;
      }
      return false;
    });
    if (minimal.empty()) fail(Errc::IncompleteSum, "every minimal element of the framework is zero");
    ScenarioFramework sf;
    sf.name = d.name;
    sf.expect_inconsistent = d.expect_inconsistent;
    sf.dropped_zero_elements = dropped;
    sf.decomposition = spanned([&] {
      return build_decomposition(std::move(minimal),
                                 ProductHistory::identity(grid(), scen_.dim), opt_.tol);
    });
    const Context ctx = scen_.context();
    sf.report = spanned([&] {
      return check_consistency(*sf.decomposition, ctx.fam, ctx.metric, ctx.mode, ctx.tol);
    });
    if (!sf.report.verdict && !d.expect_inconsistent)
      fail(Errc::InconsistentFramework,
           "framework '" + d.name + "' fails " + consistency_mode_name(ctx.mode) +
               " consistency (worst pair " + std::to_string(sf.report.worst_j) + "," +
               std::to_string(sf.report.worst_k) + " magnitude " +
               std::to_string(sf.report.worst_magnitude) + "); mark it 'expect inconsistent' if " +
               "that is intended");
    if (sf.report.verdict) sf.framework = Framework::make(sf.decomposition, ctx);
    framework_index_.emplace(d.name, scen_.frameworks.size());
    scen_.frameworks.push_back(std::move(sf));
  }

  void handle(const AssumeDecl& d) { pending_assumes_.emplace_back(span_, d); }
  void handle(const QueryDecl& d) { pending_queries_.emplace_back(span_, d); }

  void resolve_assume(const AssumeDecl& d) {
    auto it = framework_index_.find(d.framework);
    if (it == framework_index_.end())
      fail(Errc::UnknownIdentifier, "framework '" + d.framework + "' is not declared");
    const ScenarioFramework& sf = scen_.frameworks[it->second];
    if (!sf.framework)
      fail(Errc::InconsistentFramework,
           "cannot assume data inside the inconsistent framework '" + d.framework + "'");
    ProductHistory h = history_from_conj(d.element);
    AlgebraElement elem = spanned([&] { return sf.framework->element_of(h, opt_.tol); });
    scen_.data.items.push_back({*sf.framework, std::move(elem)});
  }

  void resolve_query(const QueryDecl& d) {
    ScenarioQuery q;
    q.name = d.name;
    for (const EventAtom& a : d.targets) q.targets.push_back(constraint(a));
    for (const EventAtom& a : d.givens) q.conditions.push_back(constraint(a));
    scen_.queries.push_back(std::move(q));
  }

  // ---- expression evaluation ---------------------------------------------

  Ket eval_ket(const KetExpr& k) {
    switch (k.kind) {
      case KetExpr::Kind::Ref: {
        auto it = scen_.kets.find(k.name);
        if (it == scen_.kets.end())
          fail(Errc::UnknownIdentifier, "ket '" + k.name + "' is not declared");
        return it->second;
      }
      case KetExpr::Kind::Vector: {
        if (static_cast<int>(k.entries.size()) != scen_.dim)
          fail(Errc::DimensionMismatch, "ket literal has " + std::to_string(k.entries.size()) +
                                            " entries in a dimension-" + std::to_string(scen_.dim) +
                                            " space");
        Ket v(scen_.dim);
        for (size_t i = 0; i < k.entries.size(); ++i) v[static_cast<Eigen::Index>(i)] = eval_scalar(k.entries[i]);
        return v;
      }
      case KetExpr::Kind::Normalize: {
        Ket v = eval_ket(k.kids[0]);
        const double n = v.norm();
        if (n <= opt_.tol) fail(Errc::ZeroVector, "normalize() of a (near-)zero ket");
        return v / n;
      }
      case KetExpr::Kind::Scale:
        return eval_scalar(k.factor) * eval_ket(k.kids[0]);
      case KetExpr::Kind::Add:
        return eval_ket(k.kids[0]) + eval_ket(k.kids[1]);
      case KetExpr::Kind::Sub:
        return eval_ket(k.kids[0]) - eval_ket(k.kids[1]);
    }
    fail(Errc::SyntaxError, "unreachable ket expression");
  }

  CMatrix eval_matrix(const MatrixLit& m) {
    if (static_cast<int>(m.size()) != scen_.dim)
      fail(Errc::DimensionMismatch, "matrix literal has " + std::to_string(m.size()) +
                                        " rows in a dimension-" + std::to_string(scen_.dim) +
                                        " space");
    CMatrix out(scen_.dim, scen_.dim);
    for (size_t r = 0; r < m.size(); ++r) {
      if (static_cast<int>(m[r].size()) != scen_.dim)
        fail(Errc::DimensionMismatch, "matrix row " + std::to_string(r) + " has " +
                                          std::to_string(m[r].size()) + " entries");
      for (size_t c = 0; c < m[r].size(); ++c)
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = eval_scalar(m[r][c]);
    }
    return out;
  }

  Projector eval_proj(const ProjExpr& p) {
    switch (p.kind) {
      case ProjExpr::Kind::Ref: return lookup_proj(p.name);
      case ProjExpr::Kind::Dyad:
        return spanned([&] { return projector_from_kets({eval_ket(p.kets[0])}, opt_.tol); });
      case ProjExpr::Kind::Span: {
        std::vector<Ket> kets;
        for (const KetExpr& k : p.kets) kets.push_back(eval_ket(k));
        return spanned([&] { return projector_from_kets(kets, opt_.tol); });
      }
      case ProjExpr::Kind::Complement:
        return spanned([&] { return complement(eval_proj(p.kids[0])); });
      case ProjExpr::Kind::Matrix: {
        CMatrix m = eval_matrix(p.matrix);
        return spanned([&] { return make_projector(m, opt_.tol); });
      }
      case ProjExpr::Kind::Sum: {
        CMatrix sum = CMatrix::Zero(scen_.dim, scen_.dim);
        for (const ProjExpr& kid : p.kids) sum += eval_proj(kid).matrix();
        // a sum of projectors is again a projector only when they are
        // orthogonal; make_projector rejects anything else
        return spanned([&] { return make_projector(sum, opt_.tol); });
      }
    }
    fail(Errc::SyntaxError, "unreachable projector expression");
  }

  Projector lookup_proj(const std::string& name) {
    auto it = scen_.projectors.find(name);
    if (it == scen_.projectors.end())
      fail(Errc::UnknownIdentifier, "projector '" + name + "' is not declared");
    return it->second;
  }

  int time_index(const std::string& name) {
    for (size_t j = 0; j < scen_.times.size(); ++j)
      if (scen_.times[j].first == name) return static_cast<int>(j);
    fail(Errc::UnknownIdentifier, "time '" + name + "' is not declared");
  }

  TimeGrid grid() {
    if (scen_.times.empty()) fail(Errc::UnknownIdentifier, "no 'times' declared");
    std::vector<double> labels;
    for (const auto& [name, value] : scen_.times) labels.push_back(value);
    return TimeGrid(std::move(labels));
  }

  Projector atom_projector(const EventAtom& a) {
    if (a.star) return Projector::identity(scen_.dim);
    Projector p = lookup_proj(a.name);
    return a.negated ? complement(p) : p;
  }

  ProductHistory history_from_conj(const EventConj& conj) {
    const TimeGrid g = grid();
    std::vector<Projector> slots(g.size(), Projector::identity(scen_.dim));
    for (const EventAtom& a : conj) {
      span_ = a.span.line ? a.span : span_;
      if (a.time.empty()) {
        auto it = scen_.histories.find(a.name);
        if (it == scen_.histories.end())
          fail(Errc::UnknownIdentifier, "history '" + a.name + "' is not declared");
        if (a.negated) fail(Errc::SyntaxError, "'~' cannot negate a whole history");
        for (int j = 0; j < g.size(); ++j)
          slots[j] = spanned([&] { return meet(slots[j], it->second.events()[j], opt_.tol); });
        continue;
      }
      const int j = time_index(a.time);
      const Projector p = atom_projector(a);
      slots[j] = spanned([&] { return meet(slots[j], p, opt_.tol); });
    }
    return ProductHistory(g, std::move(slots));
  }

  EventConstraint constraint(const EventAtom& a) {
    span_ = a.span.line ? a.span : span_;
    if (a.time.empty())
      fail(Errc::SyntaxError, "query events must carry '@time'");
    return EventConstraint{scen_.times[time_index(a.time)].second, atom_projector(a),
                           atom_label(a)};
  }

  std::vector<ProductHistory> eval_fw_sum(const FwSum& sum) {
    std::vector<ProductHistory> out;
    for (const FwProduct& term : sum.terms) {
      std::vector<ProductHistory> part = eval_fw_product(term);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }

  std::vector<ProductHistory> eval_fw_product(const FwProduct& prod) {
    std::vector<ProductHistory> current;
    for (size_t f = 0; f < prod.factors.size(); ++f) {
      std::vector<ProductHistory> part = eval_fw_factor(prod.factors[f]);
      if (f == 0) {
        current = std::move(part);
        continue;
      }
      std::vector<ProductHistory> next;
      for (const ProductHistory& a : current) {
        for (const ProductHistory& b : part) {
          std::vector<Projector> slots;
          slots.reserve(a.events().size());
          for (size_t j = 0; j < a.events().size(); ++j)
            slots.push_back(spanned([&] { return meet(a.events()[j], b.events()[j], opt_.tol); }));
          next.emplace_back(a.grid(), std::move(slots));
        }
      }
      current = std::move(next);
    }
    return current;
  }

  std::vector<ProductHistory> eval_fw_factor(const FwFactor& factor) {
    if (factor.braces) return eval_fw_sum(factor.inner[0]);
    return {history_from_conj(factor.leaf)};
  }

  void finalize_dynamics() {
    if (dynamics_finalized_ || scen_.times.empty()) return;
    std::vector<double> labels;
    for (const auto& [name, value] : scen_.times) labels.push_back(value);
    if (hamiltonian_) {
      scen_.dynamics = PropagatorFamily::from_hamiltonian(labels, *hamiltonian_, opt_.tol);
    } else if (!steps_.empty()) {
      std::vector<CMatrix> steps;
      for (size_t j = 0; j + 1 < labels.size(); ++j) {
        auto it = steps_.find(static_cast<int>(j));
        steps.push_back(it != steps_.end() ? it->second
                                           : CMatrix::Identity(scen_.dim, scen_.dim));
      }
      scen_.dynamics = PropagatorFamily::from_steps(labels, std::move(steps), opt_.tol);
    } else {
      scen_.dynamics = PropagatorFamily::identity(labels, scen_.dim);
    }
    dynamics_finalized_ = true;
  }

  const ScenarioAst& ast_;
  ElaborationOptions opt_;
  Scenario scen_;
  SourceSpan span_;
  std::map<std::string, CMatrix> unitaries_;
  std::map<std::string, size_t> framework_index_;
  std::optional<CMatrix> hamiltonian_;
  std::map<int, CMatrix> steps_;
  bool identity_dynamics_ = false;
  bool dynamics_finalized_ = false;
  std::vector<std::pair<SourceSpan, AssumeDecl>> pending_assumes_;
  std::vector<std::pair<SourceSpan, QueryDecl>> pending_queries_;
};

}  // namespace

const PropagatorFamily& Scenario::family() const {
  if (!dynamics) throw Error(Errc::UnknownIdentifier, "the scenario declares no time grid");
  return *dynamics;
}

namespace {
CMatrix resolve_density(const Scenario& scen, const std::optional<CMatrix>& direct,
                        const std::string& proj_name, const char* which) {
  if (direct) return *direct;
  if (proj_name.empty())
    throw Error(Errc::NotDensityMatrix,
                std::string("the rho consistency modes need ") + which +
                    "; pass a density matrix or name a declared projector");
  auto it = scen.projectors.find(proj_name);
  if (it == scen.projectors.end())
    throw Error(Errc::UnknownIdentifier, "projector '" + proj_name + "' is not declared");
  if (it->second.rank() == 0)
    throw Error(Errc::NotDensityMatrix, "the zero projector cannot back a density matrix");
  return it->second.matrix() / static_cast<double>(it->second.rank());
}
}  // namespace

Context Scenario::context() const {
  Context ctx{family(), OperatorMetric::plain_complex(), options.mode, options.tol,
              options.tol_prob};
  if (options.mode == ConsistencyMode::Weak) {
    ctx.metric = OperatorMetric::plain_real();
  } else if (options.mode == ConsistencyMode::Rho) {
    ctx.metric = OperatorMetric::initial_rho(
        resolve_density(*this, options.rho, options.rho_name, "an initial density matrix"),
        options.tol);
  } else if (options.mode == ConsistencyMode::RhoRho) {
    ctx.metric = OperatorMetric::initial_final_rho(
        resolve_density(*this, options.rho, options.rho_name, "an initial density matrix"),
        resolve_density(*this, options.rho_prime, options.rho_prime_name,
                        "a final density matrix"),
        options.tol);
  }
  return ctx;
}

double Scenario::time_value(const std::string& name) const {
  for (const auto& [n, v] : times)
    if (n == name) return v;
  throw Error(Errc::UnknownIdentifier, "time '" + name + "' is not declared");
}

Scenario elaborate(const ScenarioAst& ast, const ElaborationOptions& options) {
  return Elaborator(ast, options).run();
}

}  // namespace chronos
