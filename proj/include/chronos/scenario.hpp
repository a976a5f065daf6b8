#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "chronos/reasoning.hpp"

namespace chronos {

/// A scenario document: UTF-8 text plus an origin label for error messages.
struct ScenarioSource {
  std::string text;
  std::string name = "<input>";
};

namespace ast {

/// Scalar expression tree. Number nodes keep their source lexeme so printing
/// reproduces the document exactly.
struct Scalar {
  enum class Op { Number, ImagUnit, Sqrt, Neg, Add, Sub, Mul, Div };
  Op op = Op::Number;
  std::string lexeme;  // Number only
  double number = 0.0;
  std::vector<Scalar> kids;
  bool operator==(const Scalar&) const = default;
};

struct KetExpr {
  enum class Kind { Ref, Vector, Normalize, Scale, Add, Sub };
  Kind kind = Kind::Ref;
  std::string name;             // Ref
  std::vector<Scalar> entries;  // Vector
  Scalar factor;                // Scale
  std::vector<KetExpr> kids;    // Normalize(1), Scale(1), Add/Sub(2)
  bool operator==(const KetExpr&) const = default;
};

using MatrixLit = std::vector<std::vector<Scalar>>;

struct ProjExpr {
  enum class Kind { Ref, Dyad, Span, Complement, Matrix, Sum };
  Kind kind = Kind::Ref;
  std::string name;            // Ref
  std::vector<KetExpr> kets;   // Dyad(1), Span(n)
  MatrixLit matrix;            // Matrix
  std::vector<ProjExpr> kids;  // Complement(1), Sum(n)
  bool operator==(const ProjExpr&) const = default;
};

/// One event in a conjunction: projector (or named history when `time` is
/// empty, framework context only) with optional negation; `star` is the
/// explicit identity event.
struct EventAtom {
  bool negated = false;
  bool star = false;
  std::string name;
  std::string time;
  SourceSpan span;
  bool operator==(const EventAtom& o) const {
    return negated == o.negated && star == o.star && name == o.name && time == o.time;
  }
};

using EventConj = std::vector<EventAtom>;

struct FwSum;
struct FwFactor {
  bool braces = false;
  std::vector<FwSum> inner;  // one entry when braces
  EventConj leaf;            // otherwise: timed atoms, or one untimed history ref
  bool operator==(const FwFactor&) const = default;
};
struct FwProduct {
  std::vector<FwFactor> factors;
  bool operator==(const FwProduct&) const = default;
};
struct FwSum {
  std::vector<FwProduct> terms;
  bool operator==(const FwSum&) const = default;
};

struct SpaceDecl {
  int dim = 0;
  bool operator==(const SpaceDecl&) const = default;
};
struct KetDecl {
  std::string name;
  KetExpr expr;
  bool operator==(const KetDecl&) const = default;
};
struct ProjDecl {
  std::string name;
  ProjExpr expr;
  bool operator==(const ProjDecl&) const = default;
};
struct UnitaryDecl {
  std::string name;
  MatrixLit matrix;
  bool operator==(const UnitaryDecl&) const = default;
};
struct TimePoint {
  std::string name;
  std::optional<Scalar> value;
  bool operator==(const TimePoint&) const = default;
};
struct TimesDecl {
  std::vector<TimePoint> points;
  bool operator==(const TimesDecl&) const = default;
};
struct EvolveDecl {
  enum class Kind { Identity, Hamiltonian, Step };
  Kind kind = Kind::Identity;
  MatrixLit hamiltonian;
  std::string unitary, from, to;  // Step
  bool operator==(const EvolveDecl&) const = default;
};
struct HistoryDecl {
  std::string name;
  EventConj conj;
  bool operator==(const HistoryDecl&) const = default;
};
struct FrameworkDecl {
  std::string name;
  bool expect_inconsistent = false;
  FwSum expr;
  bool operator==(const FrameworkDecl&) const = default;
};
struct AssumeDecl {
  std::string framework;
  EventConj element;
  bool operator==(const AssumeDecl&) const = default;
};
struct QueryDecl {
  std::string name;
  EventConj targets;
  EventConj givens;
  bool operator==(const QueryDecl&) const = default;
};

using DeclNode = std::variant<SpaceDecl, KetDecl, ProjDecl, UnitaryDecl, TimesDecl, EvolveDecl,
                              HistoryDecl, FrameworkDecl, AssumeDecl, QueryDecl>;

struct Decl {
  SourceSpan span;
  DeclNode node;
  bool operator==(const Decl& o) const { return node == o.node; }
};

}  // namespace ast

struct ScenarioAst {
  std::string origin;
  std::vector<ast::Decl> decls;
  bool operator==(const ScenarioAst& o) const { return decls == o.decls; }
};

/// Full-document parse. Throws SyntaxError (with line/column and the
/// offending token) or DuplicateIdentifier.
ScenarioAst parse(const ScenarioSource& src);

/// Canonical text form; parsing it again yields a structurally identical AST.
std::string print(const ScenarioAst& ast);

struct ElaborationOptions {
  double tol = kDefaultTol;
  double tol_prob = 1e-9;
  ConsistencyMode mode = ConsistencyMode::Strong;
  std::optional<CMatrix> rho;
  std::optional<CMatrix> rho_prime;
  // alternative to raw matrices: a declared projector's name, scaled to unit
  // trace (how the CLI passes density matrices into rho modes)
  std::string rho_name;
  std::string rho_prime_name;
  int max_dim = 64;
};

struct ScenarioFramework {
  std::string name;
  DecompositionPtr decomposition;
  ConsistencyReport report;
  bool expect_inconsistent = false;
  int dropped_zero_elements = 0;
  std::optional<Framework> framework;  // present when the verdict passed
};

struct ScenarioQuery {
  std::string name;
  std::vector<EventConstraint> targets;
  std::vector<EventConstraint> conditions;
};

/// A fully resolved scenario, ready to execute.
struct Scenario {
  int dim = 0;
  std::map<std::string, Ket> kets;
  std::map<std::string, Projector> projectors;
  std::vector<std::pair<std::string, double>> times;
  std::optional<PropagatorFamily> dynamics;  // identity when never declared
  std::map<std::string, ProductHistory> histories;
  std::vector<ScenarioFramework> frameworks;
  InitialData data;
  std::vector<ScenarioQuery> queries;
  ElaborationOptions options;

  const PropagatorFamily& family() const;
  Context context() const;
  double time_value(const std::string& name) const;
};

/// Resolves ket arithmetic, builds projectors and frameworks (dropping zero
/// minimal elements), validates dynamics, and runs all consistency checks.
/// Every error carries the span of the declaration it arose from.
Scenario elaborate(const ScenarioAst& ast, const ElaborationOptions& options = {});

}  // namespace chronos
