#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "graded/manifest/ast.hpp"

namespace graded::manifest {

/// Lexical, syntactic or semantic problem in a manifest. Always located.
class InputError : public std::runtime_error {
 public:
  InputError(Location loc, const std::string& message, std::set<std::string> expected = {});

  Location loc;
  std::string message;
  std::set<std::string> expected;  // token set, parse errors only
};

Manifest parse_manifest(std::string_view text);

/// Canonical text: declarations in order, then commands. parse(print(m)) == m.
std::string print_manifest(const Manifest& m);
std::string print_expr(const Expr& e);

}  // namespace graded::manifest
