#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "graded/connections.hpp"

namespace graded {

/// Bi-graded chart of a double vector bundle: x (0,0), y (0,1), z (1,0), w (1,1).
ChartPtr dvb_chart(const std::string& name, const std::vector<std::string>& base, const std::vector<std::string>& y,
                   const std::vector<std::string>& z, const std::vector<std::string>& w);

/// Two gradings, weights in {0,1}, even coordinates only.
Report check_dvb_shape(const ChartPtr& chart);

/// Admissible change of DVB coordinates: x' = x'(x), y' and z' linear with base
/// coefficients, w' = w T(x) + z y T(x), inverse identities and commuting
/// homogeneity actions. IncompleteMap without an inverse.
Report validate_dvb_chart(const TransitionMap& T);

/// Local data of a bi-weighted A-connection.
struct DVBBlocks {
  LinearBlocks e1;    // (beta, i, alpha) -> Gamma_{beta i}^alpha on y
  LinearBlocks e2;    // (nu, i, mu) -> Gamma_{nu i}^mu on z
  LinearBlocks core;  // (l, i, m) -> Gamma_{l i}^m on w
  std::map<std::tuple<std::string, std::string, std::string, std::string>, Expression> cross;  // (alpha, mu, i, m)
};

/// The five-term field d_A + xi y Gamma d_y + xi z Gamma d_z + xi (w Gamma + z y Gamma) d_w.
Connection assemble_biweighted(const Algebroid& A, const ChartPtr& dvb, const DVBBlocks& blocks);
/// Blocks read back off a connection on a DVB (ConsistencyError when not of DVB form).
DVBBlocks extract_blocks(const Connection& C);

struct DVBProjections {
  Connection e1;
  Connection e2;
  Connection core;
  Report report;
};
/// Linear A-connections on the side bundles and on the core.
DVBProjections project_sides_core(const Connection& C);

/// w_split = w + z y S(x) keyed (alpha, mu, m), the identity elsewhere.
TransitionMap dvb_splitting(const ChartPtr& dvb, const ChartPtr& split,
                            const std::map<std::tuple<std::string, std::string, std::string>, Expression>& S);

/// phi^* o nabla_split o (phi^{-1})^* for the block-diagonal split connection.
Connection split_existence_dvb(const Algebroid& A, const DVBBlocks& split_blocks, const TransitionMap& phi);

/// Each shifted coordinate of the quasi-action is homogeneous of the
/// coordinate's bi-weight.
Report check_biweighted_action(const Connection& C, const Section& u);

}  // namespace graded
