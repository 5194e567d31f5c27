#include "graded/manifest/parser.hpp"

namespace graded::manifest {

namespace {

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::add:
    case Expr::Kind::sub: return 1;
    case Expr::Kind::mul:
    case Expr::Kind::div: return 2;
    case Expr::Kind::negate: return 3;
    case Expr::Kind::pow: return 4;
    default: return 5;
  }
}

void print(const Expr& e, std::string& out);

void operand(const Expr& e, bool parens, std::string& out) {
  if (parens) out += '(';
  print(e, out);
  if (parens) out += ')';
}

void print(const Expr& e, std::string& out) {
  const int p = precedence(e);
  switch (e.kind) {
    case Expr::Kind::number:
    case Expr::Kind::name: out += e.text; return;
    case Expr::Kind::call:
      out += e.text;
      if (!e.deriv.empty()) {
        out += '{';
        for (std::size_t i = 0; i < e.deriv.size(); ++i) out += (i ? "," : "") + std::to_string(e.deriv[i]);
        out += '}';
      }
      out += '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        print(e.args[i], out);
      }
      out += ')';
      return;
    case Expr::Kind::negate:
      out += '-';
      operand(e.args[0], precedence(e.args[0]) < p, out);
      return;
    case Expr::Kind::pow:
      operand(e.args[0], precedence(e.args[0]) <= p, out);
      out += '^' + e.text;
      return;
    case Expr::Kind::add:
    case Expr::Kind::sub:
    case Expr::Kind::mul:
    case Expr::Kind::div: {
      static const char* ops[] = {"", "", "", "", " + ", " - ", "*", "/", ""};
      operand(e.args[0], precedence(e.args[0]) < p, out);
      out += ops[static_cast<int>(e.kind)];
      operand(e.args[1], precedence(e.args[1]) <= p, out);
      return;
    }
  }
}

void block(const std::vector<Assignment>& body, const std::vector<std::string>& changes, std::string& out) {
  out += "{\n";
  for (const auto& c : changes) out += "  change " + c + ";\n";
  for (const auto& a : body) {
    out += "  " + a.head;
    for (const auto& idx : a.indices) {
      out += '[';
      for (std::size_t i = 0; i < idx.size(); ++i) out += (i ? ", " : "") + idx[i];
      out += ']';
    }
    out += " = " + print_expr(a.value) + ";\n";
  }
  out += "}";
}

std::string ref(const ChartRef& r) { return r.second.empty() ? r.first : r.first + " * " + r.second; }

std::string join(const std::vector<std::string>& v, std::size_t from = 0) {
  std::string s;
  for (std::size_t i = from; i < v.size(); ++i) s += (i > from ? ", " : "") + v[i];
  return s;
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::string print_manifest(const Manifest& m) {
  std::string out;
  for (const auto& d : m.decls) {
    if (!out.empty()) out += '\n';
    out += std::string(to_string(d.kind)) + " " + d.name;
    switch (d.kind) {
      case Decl::Kind::chart:
        out += " {\n";
        for (const auto& c : d.coords) {
          if (c.param) {
            out += "  param " + c.name + ";\n";
            continue;
          }
          out += "  coord " + c.name + " weight ";
          for (std::size_t i = 0; i < c.weight.size(); ++i) out += (i ? ", " : "") + std::to_string(c.weight[i]);
          out += c.odd ? " odd;\n" : ";\n";
        }
        out += "}";
        break;
      case Decl::Kind::function:
        out += "(" + join(d.params) + ");";
        break;
      case Decl::Kind::transition:
        out += " : " + ref(d.source) + " -> " + ref(d.target) + " ";
        block(d.body, {}, out);
        if (d.has_inverse) {
          out += " inverse ";
          block(d.inverse, {}, out);
        }
        break;
      case Decl::Kind::algebroid:
        if (d.form == "tangent") {
          out += " = tangent(" + d.refs.at(0) + ");";
        } else {
          out += " on " + d.refs.at(0) + " ";
          block(d.body, {}, out);
        }
        break;
      case Decl::Kind::poisson:
        out += " over " + d.refs.at(0) + " ";
        block(d.body, {}, out);
        break;
      case Decl::Kind::connection:
        out += " : " + d.refs.at(0) + " * " + d.refs.at(1) + " ";
        block(d.body, {}, out);
        break;
      case Decl::Kind::splitting:
        out += " : " + d.refs.at(0) + " with " + d.refs.at(1) + ";";
        break;
      case Decl::Kind::gauge:
        out += " on " + d.refs.at(0) + " ";
        block(d.body, {}, out);
        if (d.has_inverse) {
          out += " inverse ";
          block(d.inverse, {}, out);
        }
        break;
      case Decl::Kind::section:
        out += " of " + d.refs.at(0) + " ";
        block(d.body, {}, out);
        break;
      case Decl::Kind::construction:
        out += " = " + d.form + "(" + join(d.refs) + ") ";
        block(d.body, d.changes, out);
        break;
    }
    out += '\n';
  }
  if (!m.commands.empty()) {
    if (!out.empty()) out += '\n';
    for (const auto& c : m.commands) {
      out += c.verb + " " + c.args.at(0);
      if (c.verb == "gauge" || c.verb == "transform") out += " by " + c.args.at(1);
      if (c.verb == "project") out += " to " + c.args.at(1);
      if (c.verb == "act" || c.verb == "lift") {
        out += (c.verb == "act" ? " with " : " along ") + c.args.at(1);
        if (c.args.size() > 2) out += " and " + c.args.at(2);
      }
      out += ";\n";
    }
  }
  return out;
}

}  // namespace graded::manifest
