#pragma once

#include <string>
#include <utility>
#include <vector>

namespace graded::manifest {

struct Location {
  int line = 0;
  int column = 0;
};

std::string to_string(const Location& loc);

/// Infix expression as written. Locations are ignored by ==.
struct Expr {
  enum class Kind { number, name, call, negate, add, sub, mul, div, pow };

  Kind kind = Kind::number;
  std::string text;          // digits, identifier, function name or exponent
  std::vector<int> deriv;    // call: derivative orders, empty when none written
  std::vector<Expr> args;    // operands or call arguments
  Location loc;

  bool operator==(const Expr& o) const {
    return kind == o.kind && text == o.text && deriv == o.deriv && args == o.args;
  }
};

/// HEAD[i][j, k] = value;  or  COORD = value;
struct Assignment {
  std::string head;
  std::vector<std::vector<std::string>> indices;
  Expr value;
  Location loc;

  bool operator==(const Assignment& o) const {
    return head == o.head && indices == o.indices && value == o.value;
  }
};

struct CoordDecl {
  std::string name;
  std::vector<int> weight;
  bool odd = false;
  bool param = false;
  Location loc;

  bool operator==(const CoordDecl& o) const {
    return name == o.name && weight == o.weight && odd == o.odd && param == o.param;
  }
};

/// CHART or ALGEBROID * CHART.
struct ChartRef {
  std::string first;
  std::string second;
  Location loc;

  bool operator==(const ChartRef& o) const { return first == o.first && second == o.second; }
};

struct Decl {
  enum class Kind { chart, function, transition, algebroid, poisson, connection, splitting, gauge, section, construction };

  Kind kind = Kind::chart;
  std::string name;
  Location loc;

  std::vector<CoordDecl> coords;     // chart
  std::vector<std::string> params;   // function
  ChartRef source, target;           // transition
  std::string form;                  // algebroid: "tangent" or empty; construction: its kind
  std::vector<std::string> refs;     // referenced names (and integer arguments) in written order
  std::vector<Location> ref_locs;
  std::vector<std::string> changes;  // construction: "change NAME;"
  std::vector<Location> change_locs;
  std::vector<Assignment> body;
  bool has_inverse = false;
  std::vector<Assignment> inverse;

  bool operator==(const Decl& o) const {
    return kind == o.kind && name == o.name && coords == o.coords && params == o.params && source == o.source &&
           target == o.target && form == o.form && refs == o.refs && changes == o.changes && body == o.body &&
           has_inverse == o.has_inverse && inverse == o.inverse;
  }
};

/// validate X; curvature X; report X; gauge C by G; act C with U [and V];
/// lift C along U [and V]; project C to L; transform C by T;
struct Command {
  std::string verb;
  std::vector<std::string> args;
  std::vector<Location> arg_locs;
  Location loc;

  bool operator==(const Command& o) const { return verb == o.verb && args == o.args; }
};

struct Manifest {
  std::vector<Decl> decls;
  std::vector<Command> commands;

  bool operator==(const Manifest&) const = default;
};

const char* to_string(Decl::Kind k);

}  // namespace graded::manifest
