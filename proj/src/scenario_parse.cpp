#include <cctype>
#include <cstdlib>
#include <set>
#include <sstream>

#include "chronos/scenario.hpp"

namespace chronos {

namespace {

using namespace ast;

enum class Tok { Ident, Number, Imag, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  char punct = 0;
  SourceSpan span;
};

class Lexer {
 public:
  explicit Lexer(const ScenarioSource& src) : text_(src.text) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_blank();
    tok_ = Token{};
    tok_.span = {line_, col_};
    if (pos_ >= text_.size()) {
      tok_.kind = Tok::End;
      tok_.text = "<end of input>";
      return;
    }
    const char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                     text_[pos_] == '_'))
        bump();
      tok_.kind = Tok::Ident;
      tok_.text = text_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) bump();
      if (pos_ < text_.size() && text_[pos_] == '.') {
        bump();
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) bump();
      }
      if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
        size_t mark = pos_;
        bump();
        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) bump();
        if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            bump();
        } else {
          pos_ = mark;  // not an exponent after all
        }
      }
      tok_.text = text_.substr(start, pos_ - start);
      tok_.number = std::strtod(tok_.text.c_str(), nullptr);
      tok_.kind = Tok::Number;
      // an immediate 'i' not followed by an identifier char marks an
      // imaginary literal, e.g. 2i or 0.5i
      if (pos_ < text_.size() && text_[pos_] == 'i' &&
          (pos_ + 1 >= text_.size() ||
           (!std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])) && text_[pos_ + 1] != '_'))) {
        bump();
        tok_.kind = Tok::Imag;
      }
      return;
    }
    static const std::string punct = ";=:,@&~*+-/()[]{}";
    if (punct.find(c) != std::string::npos) {
      tok_.kind = Tok::Punct;
      tok_.punct = c;
      tok_.text = std::string(1, c);
      bump();
      return;
    }
    throw Error(Errc::SyntaxError, std::string("unexpected character '") + c + "'", tok_.span);
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') bump();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const ScenarioSource& src) : lex_(src) { ast_.origin = src.name; }

  ScenarioAst run() {
    while (lex_.peek().kind != Tok::End) declaration();
    return std::move(ast_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    const Token& t = lex_.peek();
    throw Error(Errc::SyntaxError, what + ", got '" + t.text + "'", t.span);
  }

  bool at_punct(char c) const { return lex_.peek().kind == Tok::Punct && lex_.peek().punct == c; }
  bool at_ident(const char* kw) const {
    return lex_.peek().kind == Tok::Ident && lex_.peek().text == kw;
  }

  Token expect_punct(char c, const char* what) {
    if (!at_punct(c)) fail(std::string("expected '") + c + "' " + what);
    return lex_.take();
  }

  std::string expect_name(const char* what) {
    if (lex_.peek().kind != Tok::Ident) fail(std::string("expected ") + what);
    return lex_.take().text;
  }

  void declare(const char* space, const std::string& name, SourceSpan span) {
    if (!names_[space].insert(name).second)
      throw Error(Errc::DuplicateIdentifier,
                  std::string(space) + " '" + name + "' is already declared", span);
  }

  void declaration() {
    const Token head = lex_.take();
    if (head.kind != Tok::Ident) {
      throw Error(Errc::SyntaxError, "expected a declaration keyword, got '" + head.text + "'",
                  head.span);
    }
    Decl decl;
    decl.span = head.span;
    if (head.text == "space") {
      if (!at_ident("dim")) fail("expected 'dim' after 'space'");
      lex_.take();
      if (lex_.peek().kind != Tok::Number) fail("expected the space dimension");
      SpaceDecl d;
      d.dim = static_cast<int>(lex_.take().number);
      decl.node = d;
    } else if (head.text == "ket") {
      KetDecl d;
      d.name = expect_name("a ket name");
      declare("ket", d.name, decl.span);
      expect_punct('=', "after the ket name");
      d.expr = ket_expr();
      decl.node = d;
    } else if (head.text == "proj") {
      ProjDecl d;
      d.name = expect_name("a projector name");
      declare("proj", d.name, decl.span);
      expect_punct('=', "after the projector name");
      d.expr = proj_expr();
      decl.node = d;
    } else if (head.text == "unitary") {
      UnitaryDecl d;
      d.name = expect_name("a unitary name");
      declare("unitary", d.name, decl.span);
      expect_punct('=', "after the unitary name");
      d.matrix = matrix_lit();
      decl.node = d;
    } else if (head.text == "times") {
      TimesDecl d;
      while (lex_.peek().kind == Tok::Ident) {
        TimePoint p;
        p.name = lex_.take().text;
        declare("time", p.name, decl.span);
        if (at_punct('=')) {
          lex_.take();
          p.value = scalar_expr();
        }
        d.points.push_back(std::move(p));
      }
      if (d.points.empty()) fail("expected at least one time label");
      decl.node = d;
    } else if (head.text == "evolve") {
      EvolveDecl d;
      if (at_ident("identity")) {
        lex_.take();
        d.kind = EvolveDecl::Kind::Identity;
      } else if (at_ident("hamiltonian")) {
        lex_.take();
        d.kind = EvolveDecl::Kind::Hamiltonian;
        d.hamiltonian = matrix_lit();
      } else if (at_ident("step")) {
        lex_.take();
        d.kind = EvolveDecl::Kind::Step;
        d.unitary = expect_name("a unitary name");
        if (!at_ident("from")) fail("expected 'from'");
        lex_.take();
        d.from = expect_name("a time label");
        if (!at_ident("to")) fail("expected 'to'");
        lex_.take();
        d.to = expect_name("a time label");
      } else {
        fail("expected 'identity', 'hamiltonian' or 'step'");
      }
      decl.node = d;
    } else if (head.text == "history") {
      HistoryDecl d;
      d.name = expect_name("a history name");
      declare("history", d.name, decl.span);
      expect_punct('=', "after the history name");
      d.conj = event_conj(true);
      decl.node = d;
    } else if (head.text == "framework") {
      FrameworkDecl d;
      d.name = expect_name("a framework name");
      declare("framework", d.name, decl.span);
      if (at_ident("expect")) {
        lex_.take();
        if (!at_ident("inconsistent")) fail("expected 'inconsistent' after 'expect'");
        lex_.take();
        d.expect_inconsistent = true;
      }
      expect_punct('=', "after the framework name");
      d.expr = fw_sum();
      decl.node = d;
    } else if (head.text == "assume") {
      AssumeDecl d;
      d.framework = expect_name("a framework name");
      expect_punct(':', "after the framework name");
      d.element = event_conj(false);
      decl.node = d;
    } else if (head.text == "query") {
      QueryDecl d;
      d.name = expect_name("a query name");
      declare("query", d.name, decl.span);
      expect_punct(':', "after the query name");
      d.targets = event_conj(true);
      if (at_ident("given")) {
        lex_.take();
        d.givens = event_conj(true);
      }
      decl.node = d;
    } else {
      throw Error(Errc::SyntaxError, "unknown declaration keyword '" + head.text + "'", head.span);
    }
    expect_punct(';', "to end the declaration");
    ast_.decls.push_back(std::move(decl));
  }

  // ---- scalars ----------------------------------------------------------

  Scalar scalar_expr() {
    Scalar left = scalar_term();
    while (at_punct('+') || at_punct('-')) {
      const char op = lex_.take().punct;
      Scalar node;
      node.op = op == '+' ? Scalar::Op::Add : Scalar::Op::Sub;
      node.kids = {std::move(left), scalar_term()};
      left = std::move(node);
    }
    return left;
  }

  Scalar scalar_term() {
    Scalar left = scalar_factor();
    while (at_punct('*') || at_punct('/')) {
      const char op = lex_.take().punct;
      Scalar node;
      node.op = op == '*' ? Scalar::Op::Mul : Scalar::Op::Div;
      node.kids = {std::move(left), scalar_factor()};
      left = std::move(node);
    }
    return left;
  }

  Scalar scalar_factor() {
    if (at_punct('-')) {
      lex_.take();
      Scalar node;
      node.op = Scalar::Op::Neg;
      node.kids = {scalar_factor()};
      return node;
    }
    if (at_punct('(')) {
      lex_.take();
      Scalar inner = scalar_expr();
      expect_punct(')', "to close the scalar");
      return inner;
    }
    if (at_ident("sqrt")) {
      lex_.take();
      expect_punct('(', "after sqrt");
      Scalar node;
      node.op = Scalar::Op::Sqrt;
      node.kids = {scalar_expr()};
      expect_punct(')', "to close sqrt");
      return node;
    }
    if (at_ident("i")) {
      lex_.take();
      Scalar node;
      node.op = Scalar::Op::ImagUnit;
      return node;
    }
    if (lex_.peek().kind == Tok::Number || lex_.peek().kind == Tok::Imag) {
      const Token t = lex_.take();
      Scalar num;
      num.op = Scalar::Op::Number;
      num.lexeme = t.text;
      num.number = t.number;
      if (t.kind == Tok::Number) return num;
      Scalar unit;
      unit.op = Scalar::Op::ImagUnit;
      Scalar node;
      node.op = Scalar::Op::Mul;
      node.kids = {std::move(num), std::move(unit)};
      return node;
    }
    fail("expected a scalar");
  }

  // ---- kets and projectors ----------------------------------------------

  std::vector<Scalar> scalar_list(char open, char close, const char* what) {
    expect_punct(open, what);
    std::vector<Scalar> out;
    out.push_back(scalar_expr());
    while (at_punct(',')) {
      lex_.take();
      out.push_back(scalar_expr());
    }
    expect_punct(close, what);
    return out;
  }

  MatrixLit matrix_lit() {
    expect_punct('[', "to open the matrix");
    MatrixLit rows;
    rows.push_back(scalar_list('[', ']', "for a matrix row"));
    while (at_punct(',')) {
      lex_.take();
      rows.push_back(scalar_list('[', ']', "for a matrix row"));
    }
    expect_punct(']', "to close the matrix");
    return rows;
  }

  // tokens that can only open a scalar, never a ket
  bool starts_scalar() const {
    return lex_.peek().kind == Tok::Number || lex_.peek().kind == Tok::Imag || at_ident("sqrt") ||
           at_ident("i");
  }

  KetExpr ket_expr() {
    KetExpr left = ket_term();
    while (at_punct('+') || at_punct('-')) {
      const char op = lex_.take().punct;
      KetExpr node;
      node.kind = op == '+' ? KetExpr::Kind::Add : KetExpr::Kind::Sub;
      node.kids = {std::move(left), ket_term()};
      left = std::move(node);
    }
    return left;
  }

  KetExpr ket_term() {
    // optional leading scalar coefficient: 0.5*k, 1/sqrt(2)*(a+b), -1*k
    if (starts_scalar() || at_punct('-')) {
      Scalar coeff = scalar_factor();
      for (;;) {
        if (at_punct('/')) {
          lex_.take();
          Scalar node;
          node.op = Scalar::Op::Div;
          node.kids = {std::move(coeff), scalar_factor()};
          coeff = std::move(node);
          continue;
        }
        expect_punct('*', "between a scalar coefficient and a ket");
        if (starts_scalar()) {
          Scalar node;
          node.op = Scalar::Op::Mul;
          node.kids = {std::move(coeff), scalar_factor()};
          coeff = std::move(node);
          continue;
        }
        KetExpr node;
        node.kind = KetExpr::Kind::Scale;
        node.factor = std::move(coeff);
        node.kids = {ket_atom()};
        return node;
      }
    }
    return ket_atom();
  }

  KetExpr ket_atom() {
    if (at_punct('[')) {
      KetExpr node;
      node.kind = KetExpr::Kind::Vector;
      node.entries = scalar_list('[', ']', "for a ket literal");
      return node;
    }
    if (at_ident("normalize")) {
      lex_.take();
      expect_punct('(', "after normalize");
      KetExpr node;
      node.kind = KetExpr::Kind::Normalize;
      node.kids = {ket_expr()};
      expect_punct(')', "to close normalize");
      return node;
    }
    if (at_punct('(')) {
      lex_.take();
      KetExpr inner = ket_expr();
      expect_punct(')', "to close the ket expression");
      return inner;
    }
    if (lex_.peek().kind == Tok::Ident) {
      KetExpr node;
      node.kind = KetExpr::Kind::Ref;
      node.name = lex_.take().text;
      return node;
    }
    fail("expected a ket expression");
  }

  ProjExpr proj_expr() {
    ProjExpr left = proj_atom();
    if (!at_punct('+')) return left;
    ProjExpr sum;
    sum.kind = ProjExpr::Kind::Sum;
    sum.kids.push_back(std::move(left));
    while (at_punct('+')) {
      lex_.take();
      sum.kids.push_back(proj_atom());
    }
    return sum;
  }

  ProjExpr proj_atom() {
    ProjExpr node;
    if (at_ident("dyad")) {
      lex_.take();
      expect_punct('(', "after dyad");
      node.kind = ProjExpr::Kind::Dyad;
      node.kets = {ket_expr()};
      expect_punct(')', "to close dyad");
      return node;
    }
    if (at_ident("span")) {
      lex_.take();
      expect_punct('(', "after span");
      node.kind = ProjExpr::Kind::Span;
      node.kets.push_back(ket_expr());
      while (at_punct(',')) {
        lex_.take();
        node.kets.push_back(ket_expr());
      }
      expect_punct(')', "to close span");
      return node;
    }
    if (at_ident("complement")) {
      lex_.take();
      expect_punct('(', "after complement");
      node.kind = ProjExpr::Kind::Complement;
      node.kids = {proj_expr()};
      expect_punct(')', "to close complement");
      return node;
    }
    if (at_punct('[')) {
      node.kind = ProjExpr::Kind::Matrix;
      node.matrix = matrix_lit();
      return node;
    }
    if (lex_.peek().kind == Tok::Ident) {
      node.kind = ProjExpr::Kind::Ref;
      node.name = lex_.take().text;
      return node;
    }
    fail("expected a projector expression");
  }

  // ---- events, histories, frameworks -------------------------------------

  EventAtom event_atom(bool require_time) {
    EventAtom atom;
    atom.span = lex_.peek().span;
    if (at_punct('*')) {
      lex_.take();
      atom.star = true;
      expect_punct('@', "after '*' (the identity event needs a time)");
      atom.time = expect_name("a time label");
      return atom;
    }
    if (at_punct('~')) {
      lex_.take();
      atom.negated = true;
    }
    atom.name = expect_name("an event name");
    if (at_punct('@')) {
      lex_.take();
      atom.time = expect_name("a time label");
    } else if (require_time || atom.negated) {
      fail("expected '@time' after the event name");
    }
    return atom;
  }

  EventConj event_conj(bool require_time) {
    EventConj conj;
    conj.push_back(event_atom(require_time));
    while (at_punct('&')) {
      lex_.take();
      conj.push_back(event_atom(require_time));
    }
    return conj;
  }

  FwSum fw_sum() {
    FwSum sum;
    sum.terms.push_back(fw_product());
    while (at_punct('+')) {
      lex_.take();
      sum.terms.push_back(fw_product());
    }
    return sum;
  }

  FwProduct fw_product() {
    FwProduct prod;
    prod.factors.push_back(fw_factor());
    while (at_punct('{') || at_punct('~') || lex_.peek().kind == Tok::Ident || at_punct('*'))
      prod.factors.push_back(fw_factor());
    return prod;
  }

  FwFactor fw_factor() {
    FwFactor factor;
    if (at_punct('{')) {
      lex_.take();
      factor.braces = true;
      factor.inner.push_back(fw_sum());
      expect_punct('}', "to close the partition braces");
      return factor;
    }
    factor.leaf = event_conj(false);
    return factor;
  }

  Lexer lex_;
  ScenarioAst ast_;
  std::map<std::string, std::set<std::string>> names_;
};

// ---- printing ------------------------------------------------------------

int scalar_prec(Scalar::Op op) {
  switch (op) {
    case Scalar::Op::Add:
    case Scalar::Op::Sub: return 1;
    case Scalar::Op::Mul:
    case Scalar::Op::Div: return 2;
    case Scalar::Op::Neg: return 3;
    default: return 4;
  }
}

void print_scalar(std::ostream& os, const Scalar& s, int parent_prec = 0) {
  const int prec = scalar_prec(s.op);
  const bool parens = prec < parent_prec;
  if (parens) os << '(';
  switch (s.op) {
    case Scalar::Op::Number: os << s.lexeme; break;
    case Scalar::Op::ImagUnit: os << 'i'; break;
    case Scalar::Op::Sqrt:
      os << "sqrt(";
      print_scalar(os, s.kids[0]);
      os << ')';
      break;
    case Scalar::Op::Neg:
      os << '-';
      print_scalar(os, s.kids[0], prec);
      break;
    case Scalar::Op::Add:
    case Scalar::Op::Sub:
      print_scalar(os, s.kids[0], prec);
      os << (s.op == Scalar::Op::Add ? " + " : " - ");
      print_scalar(os, s.kids[1], prec + 1);
      break;
    case Scalar::Op::Mul:
    case Scalar::Op::Div:
      print_scalar(os, s.kids[0], prec);
      os << (s.op == Scalar::Op::Mul ? "*" : "/");
      print_scalar(os, s.kids[1], prec + 1);
      break;
  }
  if (parens) os << ')';
}

void print_ket(std::ostream& os, const KetExpr& k, bool parenthesize_sums = false) {
  switch (k.kind) {
    case KetExpr::Kind::Ref: os << k.name; break;
    case KetExpr::Kind::Vector: {
      os << '[';
      for (size_t i = 0; i < k.entries.size(); ++i) {
        if (i) os << ", ";
        print_scalar(os, k.entries[i]);
      }
      os << ']';
      break;
    }
    case KetExpr::Kind::Normalize:
      os << "normalize(";
      print_ket(os, k.kids[0]);
      os << ')';
      break;
    case KetExpr::Kind::Scale:
      print_scalar(os, k.factor, 2);
      os << '*';
      print_ket(os, k.kids[0], true);
      break;
    case KetExpr::Kind::Add:
    case KetExpr::Kind::Sub: {
      const bool parens = parenthesize_sums;
      if (parens) os << '(';
      print_ket(os, k.kids[0]);
      os << (k.kind == KetExpr::Kind::Add ? " + " : " - ");
      print_ket(os, k.kids[1], true);
      if (parens) os << ')';
      break;
    }
  }
}

void print_matrix(std::ostream& os, const MatrixLit& m) {
  os << '[';
  for (size_t r = 0; r < m.size(); ++r) {
    if (r) os << ", ";
    os << '[';
    for (size_t c = 0; c < m[r].size(); ++c) {
      if (c) os << ", ";
      print_scalar(os, m[r][c]);
    }
    os << ']';
  }
  os << ']';
}

void print_proj(std::ostream& os, const ProjExpr& p) {
  switch (p.kind) {
    case ProjExpr::Kind::Ref: os << p.name; break;
    case ProjExpr::Kind::Dyad:
      os << "dyad(";
      print_ket(os, p.kets[0]);
      os << ')';
      break;
    case ProjExpr::Kind::Span:
      os << "span(";
      for (size_t i = 0; i < p.kets.size(); ++i) {
        if (i) os << ", ";
        print_ket(os, p.kets[i]);
      }
      os << ')';
      break;
    case ProjExpr::Kind::Complement:
      os << "complement(";
      print_proj(os, p.kids[0]);
      os << ')';
      break;
    case ProjExpr::Kind::Matrix: print_matrix(os, p.matrix); break;
    case ProjExpr::Kind::Sum:
      for (size_t i = 0; i < p.kids.size(); ++i) {
        if (i) os << " + ";
        print_proj(os, p.kids[i]);
      }
      break;
  }
}

void print_conj(std::ostream& os, const EventConj& conj) {
  for (size_t i = 0; i < conj.size(); ++i) {
    if (i) os << " & ";
    const EventAtom& a = conj[i];
    if (a.star) {
      os << '*';
    } else {
      if (a.negated) os << '~';
      os << a.name;
    }
    if (!a.time.empty()) os << '@' << a.time;
  }
}

void print_fw_sum(std::ostream& os, const FwSum& sum);

void print_fw_product(std::ostream& os, const FwProduct& prod) {
  for (size_t i = 0; i < prod.factors.size(); ++i) {
    const FwFactor& f = prod.factors[i];
    if (f.braces) {
      if (i) os << ' ';
      os << "{ ";
      print_fw_sum(os, f.inner[0]);
      os << " }";
    } else {
      if (i) os << ' ';
      print_conj(os, f.leaf);
    }
  }
}

void print_fw_sum(std::ostream& os, const FwSum& sum) {
  for (size_t i = 0; i < sum.terms.size(); ++i) {
    if (i) os << " + ";
    print_fw_product(os, sum.terms[i]);
  }
}

struct DeclPrinter {
  std::ostream& os;
  void operator()(const SpaceDecl& d) { os << "space dim " << d.dim; }
  void operator()(const KetDecl& d) {
    os << "ket " << d.name << " = ";
    print_ket(os, d.expr);
  }
  void operator()(const ProjDecl& d) {
    os << "proj " << d.name << " = ";
    print_proj(os, d.expr);
  }
  void operator()(const UnitaryDecl& d) {
    os << "unitary " << d.name << " = ";
    print_matrix(os, d.matrix);
  }
  void operator()(const TimesDecl& d) {
    os << "times";
    for (const TimePoint& p : d.points) {
      os << ' ' << p.name;
      if (p.value) {
        os << " = ";
        print_scalar(os, *p.value);
      }
    }
  }
  void operator()(const EvolveDecl& d) {
    os << "evolve ";
    switch (d.kind) {
      case EvolveDecl::Kind::Identity: os << "identity"; break;
      case EvolveDecl::Kind::Hamiltonian:
        os << "hamiltonian ";
        print_matrix(os, d.hamiltonian);
        break;
      case EvolveDecl::Kind::Step:
        os << "step " << d.unitary << " from " << d.from << " to " << d.to;
        break;
    }
  }
  void operator()(const HistoryDecl& d) {
    os << "history " << d.name << " = ";
    print_conj(os, d.conj);
  }
  void operator()(const FrameworkDecl& d) {
    os << "framework " << d.name;
    if (d.expect_inconsistent) os << " expect inconsistent";
    os << " = ";
    print_fw_sum(os, d.expr);
  }
  void operator()(const AssumeDecl& d) {
    os << "assume " << d.framework << " : ";
    print_conj(os, d.element);
  }
  void operator()(const QueryDecl& d) {
    os << "query " << d.name << " : ";
    print_conj(os, d.targets);
    if (!d.givens.empty()) {
      os << " given ";
      print_conj(os, d.givens);
    }
  }
};

}  // namespace

ScenarioAst parse(const ScenarioSource& src) { return Parser(src).run(); }

std::string print(const ScenarioAst& ast) {
  std::ostringstream os;
  for (const auto& decl : ast.decls) {
    std::visit(DeclPrinter{os}, decl.node);
    os << ";\n";
  }
  return os.str();
}

}  // namespace chronos
