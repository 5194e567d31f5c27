#pragma once

#include <string>
#include <vector>

namespace graded {

/// One named identity or property and whether it held.
struct Check {
  std::string name;
  bool passed = true;
  std::string detail;  // residual or explanation, empty when trivially passing
  bool informational = false;  // reported but never affects the verdict
};

/// Ordered list of checks. Failures are content, not exceptions.
struct Report {
  std::string title;
  std::vector<Check> checks;

  bool passed() const;
  void add(std::string name, bool ok, std::string detail = {});
  void note(std::string name, bool ok, std::string detail = {});
  /// Appends another report's checks, prefixing their names.
  void merge(const Report& other, const std::string& prefix = {});
  std::vector<Check> failures() const;
  std::string str() const;
};

}  // namespace graded
