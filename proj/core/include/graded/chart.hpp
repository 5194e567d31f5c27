#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace graded {

enum class Parity : std::uint8_t { even = 0, odd = 1 };

constexpr Parity operator+(Parity a, Parity b) {
  return static_cast<Parity>(static_cast<std::uint8_t>(a) ^ static_cast<std::uint8_t>(b));
}
constexpr bool is_odd(Parity p) { return p == Parity::odd; }

/// One non-negative weight per grading slot.
using Multiweight = std::vector<int>;

Multiweight operator+(const Multiweight& a, const Multiweight& b);
std::string to_string(const Multiweight& w);
std::string to_string(Parity p);

enum class CoordKind : std::uint8_t { base, fiber, algebroid_odd, formal_parameter };

std::string to_string(CoordKind k);

struct CoordinateDescriptor {
  std::string name;
  Parity parity = Parity::even;
  Multiweight weight;
  CoordKind kind = CoordKind::base;

  /// Kind from grade: even weight zero is base, odd with unit weight in the last
  /// slot is algebroid-odd, everything else is fiber.
  static CoordinateDescriptor inferred(std::string name, Multiweight weight, Parity parity);

  bool operator==(const CoordinateDescriptor&) const = default;
};

class Chart;
using ChartPtr = std::shared_ptr<const Chart>;

/// Reserved spelling of the square-zero infinitesimal parameter.
inline constexpr std::string_view kEpsilonName = "eps";

/// A set of graded coordinates. Coordinates are kept in canonical order,
/// (multiweight lexicographic, name), and addressed by their rank in it.
class Chart {
 public:
  static ChartPtr make(std::string name, std::size_t gradings,
                       std::vector<CoordinateDescriptor> coords);

  const std::string& name() const { return name_; }
  std::size_t gradings() const { return gradings_; }
  std::size_t size() const { return coords_.size(); }
  std::span<const CoordinateDescriptor> coords() const { return coords_; }
  const CoordinateDescriptor& at(std::size_t i) const { return coords_.at(i); }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws DomainError when absent.
  std::size_t index(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }

  std::vector<std::size_t> indices_of(CoordKind kind) const;
  std::vector<std::string> names_of(CoordKind kind) const;

  /// Maximum weight in a grading slot over all coordinates.
  int degree(std::size_t slot = 0) const;
  Multiweight zero_weight() const { return Multiweight(gradings_, 0); }

  /// Same coordinate table (names, grades, kinds) regardless of chart name.
  bool same_layout(const Chart& other) const { return coords_ == other.coords_ && gradings_ == other.gradings_; }

 private:
  Chart() = default;

  std::string name_;
  std::size_t gradings_ = 1;
  std::vector<CoordinateDescriptor> coords_;
};

/// True when the two charts are the same object or share a layout.
bool compatible(const ChartPtr& a, const ChartPtr& b);

/// Throws ChartMismatch unless compatible().
void require_same_chart(const ChartPtr& a, const ChartPtr& b, std::string_view what);

/// Builds a chart from a list of (name, weight, parity) with kinds inferred.
class ChartBuilder {
 public:
  ChartBuilder(std::string name, std::size_t gradings) : name_(std::move(name)), gradings_(gradings) {}

  ChartBuilder& base(std::string name);
  ChartBuilder& fiber(std::string name, Multiweight weight, Parity parity = Parity::even);
  ChartBuilder& odd(std::string name);  // algebroid-odd, unit weight in the last slot
  ChartBuilder& parameter(std::string name);
  ChartBuilder& add(CoordinateDescriptor c);

  ChartPtr build() const { return Chart::make(name_, gradings_, coords_); }

 private:
  std::string name_;
  std::size_t gradings_;
  std::vector<CoordinateDescriptor> coords_;
};

}  // namespace graded
