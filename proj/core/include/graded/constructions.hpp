#pragma once

#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "graded/connections.hpp"

namespace graded {

/// Symmetric affine connection Gamma^c_{ab} on a base chart.
class AffineConnectionData {
 public:
  /// Entries keyed (c, a, b). Missing (c, b, a) partners are filled in; a
  /// partner with a different value raises DomainError.
  static AffineConnectionData make(ChartPtr base, const std::map<std::tuple<std::string, std::string, std::string>, Expression>& entries);
  /// Opaque symbols G_c_a_b(x) with one symbol per unordered (a, b).
  static AffineConnectionData formal(ChartPtr base, const std::string& symbol = "G");

  const ChartPtr& base() const { return base_; }
  std::size_t dim() const { return base_->size(); }
  const Expression& at(std::size_t c, std::size_t a, std::size_t b) const { return g_[c][a][b]; }
  bool is_zero() const;

 private:
  ChartPtr base_;
  std::vector<std::vector<std::vector<Expression>>> g_;
};

/// R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}
struct RiemannTensorData {
  ChartPtr base;
  std::vector<std::vector<std::vector<std::vector<Expression>>>> r;  // [a][b][c][d]
  const Expression& at(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const { return r[a][b][c][d]; }
};
RiemannTensorData riemann(const AffineConnectionData& g);

// ---- T^2 M ----------------------------------------------------------------------

/// Coordinates x, x_1, x_2 of weights 0, 1, 2.
ChartPtr t2m_chart(const ChartPtr& base);
/// T M x_M T M with the same coordinate names, weights 1 and 2 on the two copies.
ChartPtr t2m_split_chart(const ChartPtr& base);

/// y = x_1, z^c = x_2^c - 1/2 x_1^a x_1^b G^c_{ba}, with its inverse.
TransitionMap t2m_splitting(const AffineConnectionData& g);

/// G' from the classical transformation law under a base change with inverse.
AffineConnectionData transform_affine(const AffineConnectionData& g, const TransitionMap& base_change);
/// The splitting commutes with the induced T^2 M and T M x T M changes when G'
/// is given by the classical law.
Report t2m_splitting_well_defined(const AffineConnectionData& g, const TransitionMap& base_change);

/// Gamma_{bi}^c keyed (b, i, c): base names b, c and an odd name i.
using AlgebroidLinearBlocks = std::map<std::tuple<std::string, std::string, std::string>, Expression>;

struct T2MConstruction {
  Connection split;       // the same block on both copies
  TransitionMap phi;      // T^2 M -> T M x T M
  Connection nabla;       // unsplit via phi
  Connection closed_form; // Gamma[1], Gamma[2] entered directly
  Report report;
};
/// Builds nabla both ways and checks that they agree term by term.
T2MConstruction canonical_t2m_connection(const AffineConnectionData& g, const AlgebroidLinearBlocks& block, const Algebroid& A);

/// Gamma_{bi}^c = G^c_{bi} on the tangent algebroid of the base.
AlgebroidLinearBlocks levi_civita_block(const AffineConnectionData& g, const Algebroid& tangent);

/// Levi-Civita specialisation against its closed forms for Gamma^a_b[2] and
/// for the quadratic coefficient of the quasi-action.
Report t2m_levi_civita_report(const AffineConnectionData& g);

/// Curvature comparison for the canonical connection with A = Pi T M:
/// closed form in the Riemann tensor (every documented convention tried),
/// the derived form, and the R = 0 substitution.
Report t2m_curvature_check(const AffineConnectionData& g);

/// psi^{-1} o phi relates the canonical connections built from two affine connections.
Report t2m_gauge_equivalence(const AffineConnectionData& g1, const AffineConnectionData& g2,
                             const AlgebroidLinearBlocks& block, const Algebroid& A);

// ---- Poisson contravariant connections -------------------------------------------

struct PoissonConnection {
  CotangentAlgebroid cotangent;
  Connection nabla;
  Report report;
};
/// nabla = P^{ab} x*_b d_a - 1/2 d_a P^{bc} x*_c x*_b d/dx*_a + Gamma^{Ia} x*_a d_I,
/// Gamma^{Ia} keyed (a, I).
PoissonConnection poisson_contravariant(const PoissonStructure& P, const ChartPtr& bundle,
                                        const std::map<std::pair<std::string, std::string>, Expression>& gamma);

struct PoissonAction {
  Substitution action;
  Report report;
};
/// The quasi-action of the one-form omega = dx^a omega_a, compared with
/// x -> x + eps P^{ab} omega_b, y -> y + eps Gamma^{Ia} omega_a.
PoissonAction poisson_action(const PoissonConnection& C, const std::map<std::string, Expression>& omega);

// ---- T^k M ----------------------------------------------------------------------

/// Block Gamma^{(l)a}_{b_n ... b_1 i}: order l, upper index a, odd index i and
/// the lower (b_k, m_k) pairs with sum m_k = l.
struct TkmKey {
  int order = 1;
  std::string upper;
  std::string odd;
  std::vector<std::pair<std::string, int>> lower;
  auto operator<=>(const TkmKey&) const = default;
};
using TkmBlocks = std::map<TkmKey, Expression>;

/// Gamma_i^{a,(l)} = sum over ordered lower lists of 1/n! x^{b_1,(m_1)} ... x^{b_n,(m_n)} Gamma.
/// DomainError on blocks that differ under reordering of the lower pairs.
ChristoffelData tkm_christoffels(const ChartPtr& product, int k, const TkmBlocks& blocks);
Connection tkm_connection(const Algebroid& A, int k, const TkmBlocks& blocks);
/// Every ordered composition of l (the lower weight patterns of order l).
std::vector<std::vector<int>> compositions(int l);

}  // namespace graded
