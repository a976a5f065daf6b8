#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chronos/corpus.hpp"
#include "chronos/scenario.hpp"

using namespace chronos;

namespace {

ScenarioAst parse_text(const std::string& text) { return parse({text, "<test>"}); }

Error capture(const std::string& text) {
  try {
    elaborate(parse_text(text));
  } catch (const Error& e) {
    return e;
  }
  throw std::logic_error("expected an elaboration error");
}

}  // namespace

TEST_CASE("parse: a minimal document") {
  const auto ast = parse_text("space dim 2; ket zp = [1,0];");
  CHECK(ast.decls.size() == 2);
  CHECK(std::holds_alternative<ast::SpaceDecl>(ast.decls[0].node));
  CHECK(std::holds_alternative<ast::KetDecl>(ast.decls[1].node));
}

TEST_CASE("parse: the bundled spin-half scenario") {
  const CorpusEntry* entry = find_corpus("spin-half");
  REQUIRE(entry != nullptr);
  const auto ast = parse({entry->text, entry->id});
  int frameworks = 0;
  std::vector<std::string> names;
  for (const auto& d : ast.decls)
    if (const auto* f = std::get_if<ast::FrameworkDecl>(&d.node)) {
      ++frameworks;
      names.push_back(f->name);
    }
  CHECK(frameworks == 2);
  CHECK(names == std::vector<std::string>{"Z", "X"});
}

TEST_CASE("parse: errors carry line and column") {
  try {
    parse_text("space dim 2;\nket zp = [1, 0;\n");
    FAIL("expected SyntaxError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SyntaxError);
    REQUIRE(e.span().has_value());
    CHECK(e.span()->line == 2);
  }

  try {
    parse_text("space dim 2; ket a = [1,0]; ket a = [0,1];");
    FAIL("expected DuplicateIdentifier");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DuplicateIdentifier);
  }

  // same name in different namespaces is fine
  CHECK_NOTHROW(parse_text("space dim 2; ket a = [1,0]; proj a = dyad(a);"));
}

TEST_CASE("parse/print round-trip: every bundled scenario") {
  for (const CorpusEntry& entry : corpus()) {
    CAPTURE(entry.id);
    const ScenarioAst first = parse({entry.text, entry.id});
    const std::string printed = print(first);
    const ScenarioAst second = parse({printed, entry.id + "#printed"});
    CHECK(first == second);
    // printing is idempotent
    CHECK(print(second) == printed);
  }
}

TEST_CASE("parse/print round-trip: expression corners") {
  const std::string text =
      "space dim 2;\n"
      "ket a = 1/sqrt(2)*([1, 0] + [0, 1]);\n"
      "ket b = normalize(a - 0.5i*a);\n"
      "ket c = -1*a + (2+3i)/sqrt(8)*b;\n"
      "proj p = span(a, b);\n"
      "proj q = complement(p + dyad(c));\n"
      "unitary u = [[1, 0], [0, 0 - 1i]];\n"
      "times t0 = 0.5 t1 = 2;\n"
      "evolve step u from t0 to t1;\n"
      "history h = p@t0 & ~q@t1;\n"
      "framework f expect inconsistent = { p@t0 + ~p@t0 } { q@t1 + ~q@t1 };\n"
      "assume f : h;\n"
      "query w : p@t1 given q@t0 & *@t1;\n";
  const ScenarioAst first = parse_text(text);
  const ScenarioAst second = parse_text(print(first));
  CHECK(first == second);
  CHECK(print(first) == print(second));
}

TEST_CASE("elaborate: three-state kets are resolved and normalized") {
  const CorpusEntry* entry = find_corpus("three-state");
  REQUIRE(entry != nullptr);
  const Scenario scen = elaborate(parse({entry->text, entry->id}));
  CHECK(scen.dim == 3);
  const Ket& phi = scen.kets.at("phi");
  CHECK(std::abs(phi.norm() - 1.0) < 1e-12);
  CHECK(std::abs(phi[0] - Complex(1.0 / std::sqrt(3.0), 0)) < 1e-12);
  CHECK(scen.projectors.at("Phi").rank() == 1);
  CHECK(scen.frameworks.size() == 3);
  CHECK(scen.queries.size() == 3);
}

TEST_CASE("elaborate: partition products expand and zero elements drop") {
  // mirrors the X-then-pointer family: one tail term plus a 2x3 brace product
  const std::string text =
      "space dim 4;\n"
      "ket zpa = [1,0,0,0]; ket zma = [0,1,0,0]; ket pp = [0,0,1,0]; ket pm = [0,0,0,1];\n"
      "ket xpa = 1/sqrt(2)*(zpa + zma); ket xma = 1/sqrt(2)*(zpa - zma);\n"
      "proj XpA = dyad(xpa); proj XmA = dyad(xma);\n"
      "proj A = dyad(zpa) + dyad(zma);\n"
      "proj Pp = dyad(pp); proj Pm = dyad(pm); proj Pstar = complement(Pp + Pm);\n"
      "unitary flip = [[0,0,1,0],[0,0,0,1],[1,0,0,0],[0,1,0,0]];\n"
      "times t0 t1 t2;\n"
      "evolve step flip from t1 to t2;\n"
      "framework F = ~A@t0 + { XpA@t0 + XmA@t0 } { Pp@t2 + Pm@t2 + Pstar@t2 };\n";
  const Scenario scen = elaborate(parse_text(text));
  REQUIRE(scen.frameworks.size() == 1);
  CHECK(scen.frameworks[0].decomposition->size() == 7);
  CHECK(scen.frameworks[0].report.verdict);
  CHECK(scen.frameworks[0].dropped_zero_elements == 0);

  // a brace product against an overlapping partition drops the zero overlaps
  const std::string zero_text =
      "space dim 2;\n"
      "ket zp = [1,0]; ket zm = [0,1];\n"
      "proj Zp = dyad(zp); proj Zm = dyad(zm);\n"
      "times t0;\n"
      "framework F = { Zp@t0 + Zm@t0 } { Zp@t0 + Zm@t0 };\n";
  const Scenario zs = elaborate(parse_text(zero_text));
  CHECK(zs.frameworks[0].decomposition->size() == 2);
  CHECK(zs.frameworks[0].dropped_zero_elements == 2);  // Zp*Zm and Zm*Zp
}

TEST_CASE("elaborate: expect inconsistent is honored, and required") {
  const std::string zxz =
      "space dim 2;\n"
      "ket zp = [1,0]; ket zm = [0,1];\n"
      "ket xp = 1/sqrt(2)*(zp + zm); ket xm = 1/sqrt(2)*(zp - zm);\n"
      "proj Zp = dyad(zp); proj Zm = dyad(zm); proj Xp = dyad(xp); proj Xm = dyad(xm);\n"
      "times t0 t1 t2;\n"
      "evolve identity;\n"
      "framework bad MARKER= { Zp@t0 + Zm@t0 } { Xp@t1 + Xm@t1 } { Zp@t2 + Zm@t2 };\n";
  auto with_marker = [&](const std::string& marker) {
    std::string text = zxz;
    return text.replace(text.find("MARKER"), 6, marker);
  };
  const Scenario ok = elaborate(parse_text(with_marker("expect inconsistent ")));
  REQUIRE(ok.frameworks.size() == 1);
  CHECK_FALSE(ok.frameworks[0].report.verdict);
  CHECK(ok.frameworks[0].report.worst_magnitude == doctest::Approx(0.25));
  CHECK_FALSE(ok.frameworks[0].framework.has_value());

  const Error e = capture(with_marker(""));
  CHECK(e.code() == Errc::InconsistentFramework);
}

TEST_CASE("elaborate: error codes and spans") {
  // reference to an undeclared time
  const Error t = capture("space dim 2; ket a = [1,0]; proj P = dyad(a); times t0;\nhistory h = P@t9;\n");
  CHECK(t.code() == Errc::UnknownIdentifier);
  REQUIRE(t.span().has_value());
  CHECK(t.span()->line == 2);

  CHECK(capture("space dim 2; ket a = [1,0,0];").code() == Errc::DimensionMismatch);
  CHECK(capture("space dim 2; ket a = b;").code() == Errc::UnknownIdentifier);
  CHECK(capture("space dim 2; unitary u = [[1,0],[0,2]];").code() == Errc::NonUnitaryDynamics);
  CHECK(capture("space dim 2; ket a = [1,0]; proj P = dyad(a) + dyad(a);").code() ==
        Errc::NotIdempotent);
  CHECK(capture("space dim 200;").code() == Errc::DimensionCap);
  CHECK(capture("space dim 2; space dim 3;").code() == Errc::DuplicateIdentifier);
  CHECK(capture("ket a = [1];").code() == Errc::UnknownIdentifier);  // no space yet
  CHECK(capture("space dim 2; ket z = [0,0]; ket n = normalize(z);").code() == Errc::ZeroVector);
  CHECK(capture("space dim 2; ket a = [1,0]; proj Z = dyad(a); proj X = dyad(a + [0,1]);"
                " times t0; history h = Z@t0 & X@t0;")
            .code() == Errc::NonCommuting);

  // every elaboration error carries a span
  for (const char* text :
       {"space dim 2; ket a = [1,0,0];", "space dim 2; ket a = b;", "space dim 99;",
        "space dim 2; unitary u = [[1,0],[0,2]];", "space dim 2; times t0 = 3 t1 = 0.5;"}) {
    const Error e = capture(text);
    CHECK(e.span().has_value());
  }
}

TEST_CASE("elaborate: assume must name a consistent framework and member element") {
  const std::string base =
      "space dim 2;\n"
      "ket zp = [1,0]; ket zm = [0,1];\n"
      "ket xp = 1/sqrt(2)*(zp + zm);\n"
      "proj Zp = dyad(zp); proj Zm = dyad(zm); proj Xp = dyad(xp);\n"
      "times t0;\n"
      "framework Z = Zp@t0 + Zm@t0;\n";
  CHECK_NOTHROW(elaborate(parse_text(base + "assume Z : Zp@t0;")));
  CHECK(capture(base + "assume W : Zp@t0;").code() == Errc::UnknownIdentifier);
  CHECK(capture(base + "assume Z : Xp@t0;").code() == Errc::ElementNotInFramework);
}

TEST_CASE("elaborate: dynamics declarations") {
  const std::string head = "space dim 2; ket a = [1,0]; proj P = dyad(a); times t0 t1;\n";
  CHECK_NOTHROW(elaborate(parse_text(head + "evolve identity;")));
  CHECK_NOTHROW(elaborate(parse_text(head + "evolve hamiltonian [[1,0],[0,2]];")));
  CHECK(capture(head + "evolve hamiltonian [[0,1],[0,0]];").code() == Errc::NonUnitaryDynamics);
  CHECK(capture(head + "evolve identity; evolve identity;").code() == Errc::DuplicateIdentifier);
  CHECK(capture(head + "evolve step u from t0 to t1;").code() == Errc::UnknownIdentifier);
  // steps must join adjacent times
  const std::string three = "space dim 2; unitary u = [[0,1],[1,0]]; times t0 t1 t2;\n";
  CHECK(capture(three + "evolve step u from t0 to t2;").code() == Errc::UnknownTime);
  CHECK_NOTHROW(elaborate(parse_text(three + "evolve step u from t1 to t2;")));

  // a Hamiltonian family honors declared time values
  const Scenario scen = elaborate(parse_text(
      "space dim 2; times t0 = 0 t1 = 0.5; evolve hamiltonian [[1,0],[0,3]];"));
  const CMatrix u = scen.family().propagator(0.5, 0.0);
  CHECK(std::abs(u(0, 0) - std::exp(Complex(0, -0.5))) < 1e-12);
  CHECK(std::abs(u(1, 1) - std::exp(Complex(0, -1.5))) < 1e-12);
}

TEST_CASE("elaborate: deterministic output") {
  const CorpusEntry* entry = find_corpus("spin-measurement");
  REQUIRE(entry != nullptr);
  const Scenario a = elaborate(parse({entry->text, entry->id}));
  const Scenario b = elaborate(parse({entry->text, entry->id}));
  REQUIRE(a.frameworks.size() == b.frameworks.size());
  for (size_t i = 0; i < a.frameworks.size(); ++i) {
    const auto& da = *a.frameworks[i].decomposition;
    const auto& db = *b.frameworks[i].decomposition;
    REQUIRE(da.size() == db.size());
    for (int k = 0; k < da.size(); ++k)
      for (size_t s = 0; s < da.minimal()[k].events().size(); ++s)
        CHECK(da.minimal()[k].events()[s].matrix() == db.minimal()[k].events()[s].matrix());
  }
  CHECK(a.queries.size() == b.queries.size());
}

TEST_CASE("every bundled scenario elaborates cleanly") {
  for (const CorpusEntry& entry : corpus()) {
    CAPTURE(entry.id);
    const Scenario scen = elaborate(parse({entry.text, entry.id}));
    for (const auto& f : scen.frameworks) {
      CAPTURE(f.name);
      CHECK(f.report.verdict);
    }
  }
}
