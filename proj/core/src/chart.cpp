#include "graded/chart.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "graded/errors.hpp"

namespace graded {

Multiweight operator+(const Multiweight& a, const Multiweight& b) {
  if (a.size() != b.size()) throw GradingError("multiweight length mismatch");
  Multiweight r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

std::string to_string(const Multiweight& w) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
  os << ')';
  return os.str();
}

std::string to_string(Parity p) { return is_odd(p) ? "odd" : "even"; }

std::string to_string(CoordKind k) {
  switch (k) {
    case CoordKind::base: return "base";
    case CoordKind::fiber: return "fiber";
    case CoordKind::algebroid_odd: return "algebroid-odd";
    case CoordKind::formal_parameter: return "formal-parameter";
  }
  return "?";
}

CoordinateDescriptor CoordinateDescriptor::inferred(std::string name, Multiweight weight, Parity parity) {
  CoordinateDescriptor c{std::move(name), parity, std::move(weight), CoordKind::fiber};
  const bool zero = std::all_of(c.weight.begin(), c.weight.end(), [](int w) { return w == 0; });
  if (zero && !is_odd(parity)) {
    c.kind = CoordKind::base;
  } else if (is_odd(parity) && !c.weight.empty() && c.weight.back() == 1 &&
             std::all_of(c.weight.begin(), c.weight.end() - 1, [](int w) { return w == 0; })) {
    c.kind = CoordKind::algebroid_odd;
  }
  return c;
}

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s[0]);
  if (!(std::isalpha(head) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    auto c = static_cast<unsigned char>(ch);
    return std::isalnum(c) || ch == '_';
  });
}

void check_descriptor(const CoordinateDescriptor& c, std::size_t gradings) {
  if (!is_identifier(c.name)) throw DomainError("invalid coordinate name '" + c.name + "'");
  if (c.name == kEpsilonName) throw DomainError("'eps' is reserved for the infinitesimal parameter");
  if (c.weight.size() != gradings) {
    throw GradingError("coordinate " + c.name + " has multiweight " + to_string(c.weight) + " but the chart has " +
                       std::to_string(gradings) + " gradings");
  }
  if (std::any_of(c.weight.begin(), c.weight.end(), [](int w) { return w < 0; })) {
    throw GradingError("coordinate " + c.name + " has a negative weight");
  }
  const bool zero = std::all_of(c.weight.begin(), c.weight.end(), [](int w) { return w == 0; });
  switch (c.kind) {
    case CoordKind::base:
    case CoordKind::formal_parameter:
      if (!zero || is_odd(c.parity)) {
        throw GradingError(to_string(c.kind) + " coordinate " + c.name + " must be even of weight zero");
      }
      break;
    case CoordKind::algebroid_odd: {
      bool unit_last = !c.weight.empty() && c.weight.back() == 1 &&
                       std::all_of(c.weight.begin(), c.weight.end() - 1, [](int w) { return w == 0; });
      if (!is_odd(c.parity) || !unit_last) {
        throw GradingError("algebroid-odd coordinate " + c.name + " must be odd with weight 1 in the last slot only");
      }
      break;
    }
    case CoordKind::fiber:
      if (zero) throw GradingError("fiber coordinate " + c.name + " must have non-zero weight");
      break;
  }
}

}  // namespace

ChartPtr Chart::make(std::string name, std::size_t gradings, std::vector<CoordinateDescriptor> coords) {
  if (gradings == 0) throw GradingError("a chart needs at least one grading");
  std::set<std::string> seen;
  for (const auto& c : coords) {
    check_descriptor(c, gradings);
    if (!seen.insert(c.name).second) throw DomainError("duplicate coordinate '" + c.name + "' in chart " + name);
  }
  std::sort(coords.begin(), coords.end(), [](const CoordinateDescriptor& a, const CoordinateDescriptor& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    return a.name < b.name;
  });
  auto chart = std::shared_ptr<Chart>(new Chart());
  chart->name_ = std::move(name);
  chart->gradings_ = gradings;
  chart->coords_ = std::move(coords);
  return chart;
}

std::optional<std::size_t> Chart::find(std::string_view name) const {
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (coords_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Chart::index(std::string_view name) const {
  auto i = find(name);
  if (!i) throw DomainError("chart " + name_ + " has no coordinate '" + std::string(name) + "'");
  return *i;
}

std::vector<std::size_t> Chart::indices_of(CoordKind kind) const {
  std::vector<std::size_t> r;
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (coords_[i].kind == kind) r.push_back(i);
  }
  return r;
}

std::vector<std::string> Chart::names_of(CoordKind kind) const {
  std::vector<std::string> r;
  for (auto i : indices_of(kind)) r.push_back(coords_[i].name);
  return r;
}

int Chart::degree(std::size_t slot) const {
  if (slot >= gradings_) throw RangeError("grading slot out of range");
  int d = 0;
  for (const auto& c : coords_) {
    if (c.kind == CoordKind::fiber) d = std::max(d, c.weight[slot]);
  }
  return d;
}

bool compatible(const ChartPtr& a, const ChartPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->same_layout(*b);
}

void require_same_chart(const ChartPtr& a, const ChartPtr& b, std::string_view what) {
  if (!compatible(a, b)) {
    throw ChartMismatch(std::string(what) + ": operands on charts '" + (a ? a->name() : "<none>") + "' and '" +
                        (b ? b->name() : "<none>") + "'");
  }
}

ChartBuilder& ChartBuilder::base(std::string name) {
  coords_.push_back({std::move(name), Parity::even, Multiweight(gradings_, 0), CoordKind::base});
  return *this;
}

ChartBuilder& ChartBuilder::fiber(std::string name, Multiweight weight, Parity parity) {
  coords_.push_back({std::move(name), parity, std::move(weight), CoordKind::fiber});
  return *this;
}

ChartBuilder& ChartBuilder::odd(std::string name) {
  Multiweight w(gradings_, 0);
  w.back() = 1;
  coords_.push_back({std::move(name), Parity::odd, std::move(w), CoordKind::algebroid_odd});
  return *this;
}

ChartBuilder& ChartBuilder::parameter(std::string name) {
  coords_.push_back({std::move(name), Parity::even, Multiweight(gradings_, 0), CoordKind::formal_parameter});
  return *this;
}

ChartBuilder& ChartBuilder::add(CoordinateDescriptor c) {
  coords_.push_back(std::move(c));
  return *this;
}

}  // namespace graded
