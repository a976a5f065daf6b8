#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "chronos/framework.hpp"
#include "support/test_support.hpp"

using namespace chronos;
using testsup::Rng;

namespace {

// the spin-half Z/X/Z family with trivial dynamics, inconsistent on purpose
struct SpinChain {
  TimeGrid grid{std::vector<double>{0.0, 1.0, 2.0}};
  PropagatorFamily fam = PropagatorFamily::identity({0.0, 1.0, 2.0}, 2);
  std::vector<Projector> z;
  std::vector<Projector> x;

  static SpinChain make() {
    const Ket zp = (Ket(2) << 1, 0).finished();
    const Ket zm = (Ket(2) << 0, 1).finished();
    const Ket xp = (Ket(2) << 1, 1).finished();
    const Ket xm = (Ket(2) << 1, -1).finished();
    SpinChain s;
    s.z = {projector_from_kets({zp}), projector_from_kets({zm})};
    s.x = {projector_from_kets({xp}), projector_from_kets({xm})};
    return s;
  }

  std::vector<ProductHistory> zxz_family() const {
    std::vector<ProductHistory> out;
    for (const auto& a : z)
      for (const auto& b : x)
        for (const auto& c : z) out.emplace_back(grid, std::vector<Projector>{a, b, c});
    return out;
  }
};

}  // namespace

TEST_CASE("build_decomposition accepts the spin sample space") {
  const auto s = SpinChain::make();
  const TimeGrid one({0.0});
  auto d = build_decomposition({ProductHistory(one, {s.z[0]}), ProductHistory(one, {s.z[1]})},
                               ProductHistory::identity(one, 2));
  CHECK(d->size() == 2);
  CHECK(d->cap_is_identity());
}

TEST_CASE("build_decomposition accepts the seven-element pointer family") {
  auto m = testsup::MeasurementModel::make();
  std::vector<ProductHistory> minimal{
      m.history(m.Atil, m.I, m.I),  m.history(m.ZpA, m.I, m.Pp), m.history(m.ZpA, m.I, m.Pm),
      m.history(m.ZpA, m.I, m.Pstar), m.history(m.ZmA, m.I, m.Pp), m.history(m.ZmA, m.I, m.Pm),
      m.history(m.ZmA, m.I, m.Pstar)};
  auto d = build_decomposition(minimal, ProductHistory::identity(m.grid, 4));
  CHECK(d->size() == 7);
}

TEST_CASE("build_decomposition rejects bad families") {
  const auto s = SpinChain::make();
  const TimeGrid one({0.0});
  // Z+ and X+ overlap: |Z+ X+| = 1/sqrt(2)
  try {
    build_decomposition({ProductHistory(one, {s.z[0]}), ProductHistory(one, {s.x[0]})},
                        ProductHistory::identity(one, 2));
    FAIL("expected NotOrthogonal");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotOrthogonal);
    CHECK(std::string(e.what()).find("0 and 1") != std::string::npos);
  }
  // missing element: trace deficit is reported
  try {
    build_decomposition({ProductHistory(one, {s.z[0]})}, ProductHistory::identity(one, 2));
    FAIL("expected IncompleteSum");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IncompleteSum);
    CHECK(std::string(e.what()).find("deficit") != std::string::npos);
  }
  // zero minimal elements are the elaborator's job to drop
  CHECK_THROWS_AS(
      build_decomposition({ProductHistory(one, {s.z[0]}), ProductHistory(one, {s.z[1]}),
                           ProductHistory(one, {Projector::zero(2)})},
                          ProductHistory::identity(one, 2)),
      Error);
}

TEST_CASE("check_consistency: paper families pass strong mode") {
  auto m = testsup::MeasurementModel::make();
  const auto plain = OperatorMetric::plain_complex();

  // {X+-A0}{Z+-1}{P+,P-,P*} plus the tail, thirteen elements in all
  const Projector Zp1 = join(m.ZpA, m.Pp);
  const Projector Zm1 = join(m.ZmA, m.Pm);
  std::vector<ProductHistory> mid{m.history(m.Atil, m.I, m.I)};
  for (const auto& x0 : {m.XpA, m.XmA})
    for (const auto& z1 : {Zp1, Zm1})
      for (const auto& p2 : {m.Pp, m.Pm, m.Pstar}) mid.push_back(m.history(x0, z1, p2));
  auto d = build_decomposition(mid, ProductHistory::identity(m.grid, 4));
  const auto report = check_consistency(*d, m.fam, plain, ConsistencyMode::Strong);
  CHECK(report.verdict);
  CHECK(report.worst_magnitude <= report.tolerance);

  auto t = testsup::ThreeStateModel::make();
  std::vector<ProductHistory> mid_a;
  for (const auto& p : {t.Phi, complement(t.Phi)})
    for (const auto& a : {t.A, complement(t.A)})
      for (const auto& q : {t.Psi, complement(t.Psi)}) mid_a.push_back(t.history(p, a, q));
  auto da = build_decomposition(mid_a, ProductHistory::identity(t.grid, 3));
  CHECK(check_consistency(*da, t.fam, plain, ConsistencyMode::Strong).verdict);
}

TEST_CASE("check_consistency: the Z/X/Z chain fails with witness 1/4") {
  const auto s = SpinChain::make();
  auto d = build_decomposition(s.zxz_family(), ProductHistory::identity(s.grid, 2));
  const auto report =
      check_consistency(*d, s.fam, OperatorMetric::plain_complex(), ConsistencyMode::Strong);
  CHECK_FALSE(report.verdict);
  CHECK(report.worst_magnitude == doctest::Approx(0.25).epsilon(1e-9));

  // brute-force oracle over all pairwise chain inner products
  std::vector<std::vector<CMatrix>> chains;
  for (const auto& f : d->minimal()) {
    std::vector<CMatrix> events;
    for (const auto& e : f.events()) events.push_back(e.matrix());
    chains.push_back(std::move(events));
  }
  const std::vector<CMatrix> steps{CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)};
  CHECK(testsup::naive_worst_pair(chains, steps) == doctest::Approx(report.worst_magnitude));
}

TEST_CASE("strong consistency implies weak consistency") {
  Rng rng(61);
  const auto plain = OperatorMetric::plain_complex();
  for (int trial = 0; trial < 40; ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 3);
    const auto fam = PropagatorFamily::identity({0.0, 1.0, 2.0}, dim);
    const TimeGrid grid({0.0, 1.0, 2.0});
    // random family: sometimes consistent (chain), sometimes not (free picks)
    std::vector<ProductHistory> minimal;
    if (rng() % 2) {
      minimal = testsup::chain_family(testsup::random_partition(dim, 2, rng), grid, fam);
    } else {
      const auto p0 = testsup::random_partition(dim, 2, rng);
      const auto p1 = testsup::random_partition(dim, 2, rng);
      for (const auto& a : p0)
        for (const auto& b : p1)
          minimal.push_back(ProductHistory(grid, {a, b, Projector::identity(dim)}));
    }
    auto d = build_decomposition(minimal, ProductHistory::identity(grid, dim));
    const bool strong = check_consistency(*d, fam, plain, ConsistencyMode::Strong).verdict;
    const bool weak = check_consistency(*d, fam, plain, ConsistencyMode::Weak).verdict;
    if (strong) CHECK(weak);
  }
}

TEST_CASE("single-time decompositions pass every mode") {
  Rng rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 3 + static_cast<int>(rng() % 4);
    const auto fam = PropagatorFamily::identity({0.0}, dim);
    const auto parts = testsup::random_partition(dim, 3, rng);
    std::vector<ProductHistory> minimal;
    for (const auto& p : parts) minimal.emplace_back(TimeGrid({0.0}), std::vector<Projector>{p});
    auto d = build_decomposition(minimal, ProductHistory::identity(TimeGrid({0.0}), dim));
    CHECK(check_consistency(*d, fam, OperatorMetric::plain_complex(), ConsistencyMode::Strong)
              .verdict);
    CHECK(check_consistency(*d, fam, OperatorMetric::plain_real(), ConsistencyMode::Weak).verdict);
    // a maximally mixed rho keeps single-time families consistent too
    const auto rho = OperatorMetric::initial_rho(
        CMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim)));
    CHECK(check_consistency(*d, fam, rho, ConsistencyMode::Rho).verdict);
  }
}

TEST_CASE("consistency verdict is stable under permutation and Heisenberg recomputation") {
  Rng rng(71);
  const auto s = SpinChain::make();
  auto family = s.zxz_family();
  auto d1 = build_decomposition(family, ProductHistory::identity(s.grid, 2));
  const auto r1 =
      check_consistency(*d1, s.fam, OperatorMetric::plain_complex(), ConsistencyMode::Strong);
  std::shuffle(family.begin(), family.end(), rng);
  auto d2 = build_decomposition(family, ProductHistory::identity(s.grid, 2));
  const auto r2 =
      check_consistency(*d2, s.fam, OperatorMetric::plain_complex(), ConsistencyMode::Strong);
  CHECK(r1.verdict == r2.verdict);
  CHECK(r1.worst_magnitude == doctest::Approx(r2.worst_magnitude));

  // Heisenberg recomputation: conjugating every K by the same unitaries
  // cannot change any verdict; spot-check via the weight operators directly.
  for (const auto& f : d1->minimal()) {
    const CMatrix k = weight_operator(f, s.fam);
    const CMatrix kh = weight_operator_heisenberg(f, s.fam, 2.0);
    CHECK(op_inner(k, k, OperatorMetric::plain_complex()).real() ==
          doctest::Approx(op_inner(kh, kh, OperatorMetric::plain_complex()).real()));
  }
}

TEST_CASE("additivity holds on consistent decompositions") {
  Rng rng(73);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 4);
    CMatrix g = testsup::random_matrix(dim, rng);
    const CMatrix h = (g + g.adjoint()) / 2.0;
    const auto fam = PropagatorFamily::from_hamiltonian({0.0, 1.0, 2.0}, h);
    const TimeGrid grid({0.0, 1.0, 2.0});
    const int parts = std::min(dim, 2 + static_cast<int>(rng() % 2));
    const auto family = testsup::chain_family(testsup::random_partition(dim, parts, rng), grid, fam);
    auto d = build_decomposition(family, ProductHistory::identity(grid, dim));
    REQUIRE(check_consistency(*d, fam, OperatorMetric::plain_complex(), ConsistencyMode::Strong)
                .verdict);
    // W(sum of a random subset) = sum of the W's
    std::vector<ProductHistory> subset;
    double w_sum = 0.0;
    for (const auto& f : d->minimal())
      if (rng() % 2) {
        subset.push_back(f);
        w_sum += weight(f, fam);
      }
    if (subset.empty()) continue;
    CHECK(weight(HistorySum(subset), fam) == doctest::Approx(w_sum).epsilon(1e-9));
  }
}

TEST_CASE("algebra elements: indicators, negation, meet, join") {
  const auto s = SpinChain::make();
  const TimeGrid one({0.0});
  auto d = build_decomposition({ProductHistory(one, {s.z[0]}), ProductHistory(one, {s.z[1]})},
                               ProductHistory::identity(one, 2));
  const AlgebraElement zp(d, {true, false});
  const AlgebraElement zm(d, {false, true});
  CHECK(join(zp, zm).indicator() == std::vector<bool>{true, true});
  CHECK(meet(zp, negate(zp)).empty());
  CHECK(negate(zp).indicator() == std::vector<bool>{false, true});

  auto d2 = build_decomposition({ProductHistory(one, {s.z[0]}), ProductHistory(one, {s.z[1]})},
                                ProductHistory::identity(one, 2));
  CHECK_THROWS_WITH_AS(meet(zp, AlgebraElement(d2, {true, false})),
                       doctest::Contains("OwnerMismatch"), Error);
  CHECK_THROWS_AS(AlgebraElement(d, {true}), Error);
}

TEST_CASE("contains: oscillator P against two framework choices") {
  // dim 5, B_n = |n><n|, P = B1 + B2
  const int dim = 5;
  auto basis = [&](int n) {
    Ket v = Ket::Zero(dim);
    v[n] = 1;
    return projector_from_kets({v});
  };
  const Projector b0 = basis(0), b1 = basis(1), b2 = basis(2);
  const Projector p = join(b1, b2);
  const Projector pt = complement(p);
  const TimeGrid one({0.0});
  auto hist = [&](const Projector& e) { return ProductHistory(one, {e}); };

  // framework {B0, B1, Pt}: P is not expressible
  auto d67 = build_decomposition({hist(b0), hist(b1), hist(pt)}, ProductHistory::identity(one, dim));
  CHECK_FALSE(contains(*d67, hist(p)).has_value());
  // framework {P, Pt}: P is a minimal element
  auto d610 = build_decomposition({hist(p), hist(pt)}, ProductHistory::identity(one, dim));
  const auto ind = contains(*d610, hist(p));
  REQUIRE(ind.has_value());
  CHECK(*ind == std::vector<bool>{true, false});
}

TEST_CASE("contains: measurement family resolves Z+0 A0 into three elements") {
  auto m = testsup::MeasurementModel::make();
  std::vector<ProductHistory> minimal{
      m.history(m.Atil, m.I, m.I),  m.history(m.ZpA, m.I, m.Pp), m.history(m.ZpA, m.I, m.Pm),
      m.history(m.ZpA, m.I, m.Pstar), m.history(m.ZmA, m.I, m.Pp), m.history(m.ZmA, m.I, m.Pm),
      m.history(m.ZmA, m.I, m.Pstar)};
  auto d = build_decomposition(minimal, ProductHistory::identity(m.grid, 4));

  const auto ind = contains(*d, m.history(m.ZpA, m.I, m.I));
  REQUIRE(ind.has_value());
  CHECK(*ind == std::vector<bool>{false, true, true, true, false, false, false});

  // X+0 is not in the Z sample space
  const auto absent = contains(*d, m.history(m.XpA, m.I, m.I));
  CHECK_FALSE(absent.has_value());

  // the cap is the full indicator
  const auto full = contains(*d, ProductHistory::identity(m.grid, 4));
  REQUIRE(full.has_value());
  CHECK(std::count(full->begin(), full->end(), true) == 7);
}

TEST_CASE("complete_fixed_initial appends the missing tail") {
  auto m = testsup::MeasurementModel::make();
  const auto plain = OperatorMetric::plain_complex();
  // fixed initial event A0: minimal elements {Z+-A0}{P+,P-,P*}
  std::vector<ProductHistory> minimal;
  for (const auto& z0 : {m.ZpA, m.ZmA})
    for (const auto& p2 : {m.Pp, m.Pm, m.Pstar}) minimal.push_back(m.history(z0, m.I, p2));
  const ProductHistory cap = m.history(m.A, m.I, m.I);
  auto fixed = build_decomposition(minimal, cap);
  CHECK_FALSE(fixed->cap_is_identity());

  auto completed = complete_fixed_initial(fixed, m.fam, plain, ConsistencyMode::Strong);
  CHECK(completed->size() == 7);
  CHECK(completed->cap_is_identity());
  CHECK(check_consistency(*completed, m.fam, plain, ConsistencyMode::Strong).verdict);

  // an identity cap comes back unchanged
  CHECK(complete_fixed_initial(completed, m.fam, plain, ConsistencyMode::Strong) == completed);
}

TEST_CASE("complete_fixed_initial rejects inconsistent input") {
  const auto s = SpinChain::make();
  // fixed initial Z+0 with a Z/X/Z-style tail is inconsistent
  std::vector<ProductHistory> minimal;
  for (const auto& b : s.x)
    for (const auto& c : s.z)
      minimal.emplace_back(s.grid, std::vector<Projector>{s.z[0], b, c});
  const ProductHistory cap(s.grid, {s.z[0], Projector::identity(2), Projector::identity(2)});
  auto fixed = build_decomposition(minimal, cap);
  CHECK_THROWS_WITH_AS(
      complete_fixed_initial(fixed, s.fam, OperatorMetric::plain_complex(),
                             ConsistencyMode::Strong),
      doctest::Contains("InconsistentInput"), Error);
}
