#include <cctype>
#include <vector>

#include "graded/manifest/parser.hpp"

namespace graded::manifest {

std::string to_string(const Location& loc) { return std::to_string(loc.line) + ":" + std::to_string(loc.column); }

const char* to_string(Decl::Kind k) {
  switch (k) {
    case Decl::Kind::chart: return "chart";
    case Decl::Kind::function: return "function";
    case Decl::Kind::transition: return "transition";
    case Decl::Kind::algebroid: return "algebroid";
    case Decl::Kind::poisson: return "poisson";
    case Decl::Kind::connection: return "connection";
    case Decl::Kind::splitting: return "splitting";
    case Decl::Kind::gauge: return "gauge";
    case Decl::Kind::section: return "section";
    case Decl::Kind::construction: return "construction";
  }
  return "?";
}

namespace {

std::string format_error(const Location& loc, const std::string& message, const std::set<std::string>& expected) {
  std::string s = to_string(loc) + ": " + message;
  if (!expected.empty()) {
    s += " (expected ";
    bool first = true;
    for (const auto& e : expected) {
      s += (first ? "" : ", ") + e;
      first = false;
    }
    s += ")";
  }
  return s;
}

}  // namespace

InputError::InputError(Location l, const std::string& m, std::set<std::string> exp)
    : std::runtime_error(format_error(l, m, exp)), loc(l), message(m), expected(std::move(exp)) {}

namespace {

struct Token {
  enum class Kind { ident, number, punct, end };
  Kind kind = Kind::end;
  std::string text;
  Location loc;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Token::Kind::ident: return "identifier '" + t.text + "'";
    case Token::Kind::number: return "number " + t.text;
    case Token::Kind::punct: return "'" + t.text + "'";
    case Token::Kind::end: return "end of input";
  }
  return "?";
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
      continue;
    }
    Token t;
    t.loc = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Token::Kind::ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && (std::isalpha(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        throw InputError({line, col + static_cast<int>(j - i)}, "malformed number");
      }
      t.kind = Token::Kind::number;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      t.kind = Token::Kind::punct;
      t.text = "->";
      advance(2);
    } else if (std::string_view("{}()[];:,=+-*/^").find(c) != std::string_view::npos) {
      t.kind = Token::Kind::punct;
      t.text = std::string(1, c);
      advance();
    } else {
      std::string shown = static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f
                              ? "byte " + std::to_string(static_cast<unsigned char>(c))
                              : std::string("'") + c + "'";
      throw InputError({line, col}, "unexpected character " + shown);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.loc = {line, col};
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Manifest manifest() {
    Manifest m;
    while (!at_end()) {
      if (keyword("chart")) m.decls.push_back(chart());
      else if (keyword("function")) m.decls.push_back(function());
      else if (keyword("transition")) m.decls.push_back(transition());
      else if (keyword("algebroid")) m.decls.push_back(algebroid());
      else if (keyword("poisson")) m.decls.push_back(poisson());
      else if (keyword("connection")) m.decls.push_back(connection());
      else if (keyword("splitting")) m.decls.push_back(splitting());
      else if (keyword("section")) m.decls.push_back(section());
      else if (keyword("construction")) m.decls.push_back(construction());
      else if (keyword("gauge")) gauge(m);
      else if (keyword("validate") || keyword("curvature") || keyword("report")) m.commands.push_back(unary_command());
      else if (keyword("act")) m.commands.push_back(pair_command("with"));
      else if (keyword("lift")) m.commands.push_back(pair_command("along"));
      else if (keyword("project")) m.commands.push_back(project());
      else if (keyword("transform")) m.commands.push_back(by_command());
      else fail("expected a declaration or command");
    }
    return m;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  bool at_end() {
    if (peek().kind == Token::Kind::end) return true;
    return false;
  }
  Token take() {
    tried_.clear();
    return toks_[pos_++];
  }

  [[noreturn]] void fail(const std::string& what) {
    throw InputError(peek().loc, what + ", found " + describe(peek()), tried_);
  }

  bool keyword(const char* kw) {
    tried_.insert(std::string("'") + kw + "'");
    return peek().kind == Token::Kind::ident && peek().text == kw;
  }
  bool punct(const char* p) {
    tried_.insert(std::string("'") + p + "'");
    return peek().kind == Token::Kind::punct && peek().text == p;
  }
  Token expect_keyword(const char* kw) {
    if (!keyword(kw)) fail(std::string("expected '") + kw + "'");
    return take();
  }
  Token expect_punct(const char* p) {
    if (!punct(p)) fail(std::string("expected '") + p + "'");
    return take();
  }
  Token expect_ident(const char* what = "identifier") {
    tried_.insert(what);
    if (peek().kind != Token::Kind::ident) fail(std::string("expected ") + what);
    return take();
  }
  Token expect_number() {
    tried_.insert("number");
    if (peek().kind != Token::Kind::number) fail("expected a number");
    return take();
  }
  int int_value(const Token& t) {
    if (t.text.size() > 9) throw InputError(t.loc, "integer " + t.text + " is too large");
    return std::stoi(t.text);
  }

  Decl start(Decl::Kind k) {
    Decl d;
    d.kind = k;
    d.loc = take().loc;
    Token name = expect_ident("name");
    d.name = name.text;
    return d;
  }

  void ref(Decl& d, const char* what = "name") {
    Token t = expect_ident(what);
    d.refs.push_back(t.text);
    d.ref_locs.push_back(t.loc);
  }

  Decl chart() {
    Decl d = start(Decl::Kind::chart);
    expect_punct("{");
    while (!punct("}")) {
      CoordDecl c;
      if (keyword("param")) {
        c.loc = take().loc;
        c.name = expect_ident("coordinate name").text;
        c.param = true;
      } else if (keyword("coord")) {
        c.loc = take().loc;
        c.name = expect_ident("coordinate name").text;
        expect_keyword("weight");
        c.weight.push_back(int_value(expect_number()));
        while (punct(",")) {
          take();
          c.weight.push_back(int_value(expect_number()));
        }
        if (keyword("odd")) {
          take();
          c.odd = true;
        }
      } else {
        fail("expected a coordinate");
      }
      expect_punct(";");
      d.coords.push_back(std::move(c));
    }
    take();
    return d;
  }

  Decl function() {
    Decl d = start(Decl::Kind::function);
    expect_punct("(");
    if (!punct(")")) {
      d.params.push_back(expect_ident("parameter").text);
      while (punct(",")) {
        take();
        d.params.push_back(expect_ident("parameter").text);
      }
    }
    expect_punct(")");
    if (punct(";")) take();
    return d;
  }

  ChartRef chart_ref() {
    ChartRef r;
    Token t = expect_ident("chart");
    r.first = t.text;
    r.loc = t.loc;
    if (punct("*")) {
      take();
      r.second = expect_ident("chart").text;
    }
    return r;
  }

  Decl transition() {
    Decl d = start(Decl::Kind::transition);
    expect_punct(":");
    d.source = chart_ref();
    expect_punct("->");
    d.target = chart_ref();
    d.body = block(false);
    if (keyword("inverse")) {
      take();
      d.has_inverse = true;
      d.inverse = block(false);
    }
    return d;
  }

  Decl algebroid() {
    Decl d = start(Decl::Kind::algebroid);
    if (punct("=")) {
      take();
      Token t = expect_keyword("tangent");
      d.form = t.text;
      expect_punct("(");
      ref(d, "chart");
      expect_punct(")");
      expect_punct(";");
      return d;
    }
    expect_keyword("on");
    ref(d, "chart");
    d.body = block(false);
    return d;
  }

  Decl poisson() {
    Decl d = start(Decl::Kind::poisson);
    expect_keyword("over");
    ref(d, "chart");
    d.body = block(false);
    return d;
  }

  Decl connection() {
    Decl d = start(Decl::Kind::connection);
    expect_punct(":");
    ref(d, "algebroid");
    expect_punct("*");
    ref(d, "chart");
    d.body = block(false);
    return d;
  }

  Decl splitting() {
    Decl d = start(Decl::Kind::splitting);
    expect_punct(":");
    ref(d, "transition");
    expect_keyword("with");
    ref(d, "connection");
    expect_punct(";");
    return d;
  }

  Decl section() {
    Decl d = start(Decl::Kind::section);
    expect_keyword("of");
    ref(d, "algebroid");
    d.body = block(false);
    return d;
  }

  Decl construction() {
    Decl d = start(Decl::Kind::construction);
    expect_punct("=");
    d.form = expect_ident("construction kind").text;
    expect_punct("(");
    auto arg = [&] {
      tried_.insert("identifier");
      tried_.insert("number");
      if (peek().kind != Token::Kind::ident && peek().kind != Token::Kind::number) fail("expected an argument");
      Token t = take();
      d.refs.push_back(t.text);
      d.ref_locs.push_back(t.loc);
    };
    arg();
    while (punct(",")) {
      take();
      arg();
    }
    expect_punct(")");
    d.body = block(true, &d);
    return d;
  }

  // `gauge NAME on C { ... }` declares, `gauge C by G;` runs.
  void gauge(Manifest& m) {
    Location at = take().loc;
    Token name = expect_ident("name");
    if (keyword("by")) {
      take();
      Command c;
      c.verb = "gauge";
      c.loc = at;
      c.args = {name.text};
      c.arg_locs = {name.loc};
      Token g = expect_ident("gauge");
      c.args.push_back(g.text);
      c.arg_locs.push_back(g.loc);
      expect_punct(";");
      m.commands.push_back(std::move(c));
      return;
    }
    Decl d;
    d.kind = Decl::Kind::gauge;
    d.loc = at;
    d.name = name.text;
    expect_keyword("on");
    ref(d, "connection");
    d.body = block(false);
    if (keyword("inverse")) {
      take();
      d.has_inverse = true;
      d.inverse = block(false);
    }
    m.decls.push_back(std::move(d));
  }

  std::vector<Assignment> block(bool allow_change, Decl* owner = nullptr) {
    expect_punct("{");
    std::vector<Assignment> out;
    while (!punct("}")) {
      if (allow_change && keyword("change")) {
        take();
        Token t = expect_ident("transition");
        owner->changes.push_back(t.text);
        owner->change_locs.push_back(t.loc);
        expect_punct(";");
        continue;
      }
      Assignment a;
      Token head = expect_ident("assignment target");
      a.head = head.text;
      a.loc = head.loc;
      while (punct("[")) {
        take();
        std::vector<std::string> idx{expect_ident("index").text};
        while (punct(",")) {
          take();
          idx.push_back(expect_ident("index").text);
        }
        expect_punct("]");
        a.indices.push_back(std::move(idx));
      }
      expect_punct("=");
      a.value = expr();
      expect_punct(";");
      out.push_back(std::move(a));
    }
    take();
    return out;
  }

  Command command_head() {
    Command c;
    Token v = take();
    c.verb = v.text;
    c.loc = v.loc;
    arg(c);
    return c;
  }
  void arg(Command& c) {
    Token t = expect_ident("name");
    c.args.push_back(t.text);
    c.arg_locs.push_back(t.loc);
  }

  Command unary_command() {
    Command c = command_head();
    expect_punct(";");
    return c;
  }
  Command pair_command(const char* joiner) {
    Command c = command_head();
    expect_keyword(joiner);
    arg(c);
    if (keyword("and")) {
      take();
      arg(c);
    }
    expect_punct(";");
    return c;
  }
  Command by_command() {
    Command c = command_head();
    expect_keyword("by");
    arg(c);
    expect_punct(";");
    return c;
  }
  Command project() {
    Command c = command_head();
    expect_keyword("to");
    Token n = expect_number();
    c.args.push_back(n.text);
    c.arg_locs.push_back(n.loc);
    expect_punct(";");
    return c;
  }

  // ---- expressions ----

  Expr binary(Expr::Kind k, Expr l, Expr r, Location loc) {
    Expr e;
    e.kind = k;
    e.loc = loc;
    e.args.push_back(std::move(l));
    e.args.push_back(std::move(r));
    return e;
  }

  Expr expr() {
    Expr l = term();
    while (punct("+") || punct("-")) {
      Token op = take();
      Expr r = term();
      l = binary(op.text == "+" ? Expr::Kind::add : Expr::Kind::sub, std::move(l), std::move(r), op.loc);
    }
    return l;
  }

  Expr term() {
    Expr l = unary();
    while (punct("*") || punct("/")) {
      Token op = take();
      Expr r = unary();
      l = binary(op.text == "*" ? Expr::Kind::mul : Expr::Kind::div, std::move(l), std::move(r), op.loc);
    }
    return l;
  }

  Expr unary() {
    if (punct("-")) {
      Token op = take();
      Expr e;
      e.kind = Expr::Kind::negate;
      e.loc = op.loc;
      e.args.push_back(unary());
      return e;
    }
    return power();
  }

  Expr power() {
    Expr b = primary();
    if (punct("^")) {
      Token op = take();
      Expr e;
      e.kind = Expr::Kind::pow;
      e.loc = op.loc;
      e.text = expect_number().text;
      e.args.push_back(std::move(b));
      return e;
    }
    return b;
  }

  Expr primary() {
    tried_.insert("expression");
    if (peek().kind == Token::Kind::number) {
      Token t = take();
      Expr e;
      e.kind = Expr::Kind::number;
      e.text = t.text;
      e.loc = t.loc;
      return e;
    }
    if (peek().kind == Token::Kind::ident) {
      Token t = take();
      Expr e;
      e.kind = Expr::Kind::name;
      e.text = t.text;
      e.loc = t.loc;
      bool call = false;
      if (punct("{")) {
        take();
        e.deriv.push_back(int_value(expect_number()));
        while (punct(",")) {
          take();
          e.deriv.push_back(int_value(expect_number()));
        }
        expect_punct("}");
        call = true;
      }
      if (call || punct("(")) {
        e.kind = Expr::Kind::call;
        expect_punct("(");
        if (!punct(")")) {
          e.args.push_back(expr());
          while (punct(",")) {
            take();
            e.args.push_back(expr());
          }
        }
        expect_punct(")");
      }
      return e;
    }
    if (punct("(")) {
      take();
      Expr e = expr();
      expect_punct(")");
      return e;
    }
    fail("expected an expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::set<std::string> tried_;
};

}  // namespace

Manifest parse_manifest(std::string_view text) { return Parser(lex(text)).manifest(); }

}  // namespace graded::manifest
