#include "graded/report.hpp"

namespace graded {

bool Report::passed() const {
  for (const auto& c : checks) {
    if (!c.passed && !c.informational) return false;
  }
  return true;
}

void Report::add(std::string name, bool ok, std::string detail) {
  checks.push_back(Check{std::move(name), ok, std::move(detail)});
}

void Report::note(std::string name, bool ok, std::string detail) {
  checks.push_back(Check{std::move(name), ok, std::move(detail), true});
}

void Report::merge(const Report& other, const std::string& prefix) {
  for (const auto& c : other.checks) checks.push_back(Check{prefix + c.name, c.passed, c.detail, c.informational});
}

std::vector<Check> Report::failures() const {
  std::vector<Check> out;
  for (const auto& c : checks) {
    if (!c.passed && !c.informational) out.push_back(c);
  }
  return out;
}

std::string Report::str() const {
  std::string s = title.empty() ? std::string() : title + "\n";
  for (const auto& c : checks) {
    const char* tag = c.informational ? (c.passed ? "  [note] " : "  [diff] ") : (c.passed ? "  [ok]   " : "  [FAIL] ");
    s += tag + c.name;
    if (!c.detail.empty()) s += ": " + c.detail;
    s += "\n";
  }
  s += passed() ? "  result: pass\n" : "  result: fail\n";
  return s;
}

}  // namespace graded
