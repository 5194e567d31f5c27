#include "graded/random.hpp"

#include <algorithm>
#include <functional>

#include "graded/errors.hpp"

namespace graded {

namespace {

std::vector<std::string> numbered(const std::string& stem, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

/// Monomials of degree <= d in the given coordinates.
std::vector<Expression> base_monomials(const ChartPtr& chart, const std::vector<std::size_t>& vars, int d) {
  std::vector<Expression> out;
  std::function<void(std::size_t, int, Expression)> rec = [&](std::size_t from, int left, Expression m) {
    out.push_back(m);
    if (left == 0) return;
    for (std::size_t k = from; k < vars.size(); ++k) rec(k, left - 1, m * Expression::coordinate(chart, vars[k]));
  };
  rec(0, d, Expression::constant(chart, 1));
  return out;
}

bool is_even_fiber(const CoordinateDescriptor& c) { return c.kind == CoordKind::fiber && c.parity == Parity::even; }

}  // namespace

std::vector<Expression> fiber_monomials(const ChartPtr& chart, int weight, int min_factors, const std::string& avoid) {
  std::vector<std::size_t> fibers;
  for (std::size_t r = 0; r < chart->size(); ++r) {
    const auto& c = chart->at(r);
    if (is_even_fiber(c) && c.weight[0] >= 1 && c.weight[0] <= weight && c.name != avoid) fibers.push_back(r);
  }
  std::vector<Expression> out;
  std::function<void(std::size_t, int, int, Expression)> rec = [&](std::size_t from, int left, int factors, Expression m) {
    if (left == 0) {
      if (factors >= min_factors) out.push_back(m);
      return;
    }
    for (std::size_t k = from; k < fibers.size(); ++k) {
      int w = chart->at(fibers[k]).weight[0];
      if (w <= left) rec(k, left - w, factors + 1, m * Expression::coordinate(chart, fibers[k]));
    }
  };
  rec(0, weight, 0, Expression::constant(chart, 1));
  return out;
}

int InstanceGenerator::uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

bool InstanceGenerator::coin(double p) { return std::bernoulli_distribution(p)(rng_); }

Rational InstanceGenerator::coefficient() {
  int n = 0;
  while (n == 0) n = uniform(-3, 3);
  Rational q(n, uniform(1, 2));
  q.canonicalize();
  return q;
}

ChartPtr InstanceGenerator::base_chart(int dim, const std::string& name) {
  ChartBuilder b(name, 1);
  for (const auto& x : numbered("x", dim)) b.base(x);
  return b.build();
}

ChartPtr InstanceGenerator::bundle_chart(int dim, int degree, const std::string& name) {
  ChartBuilder b(name, 1);
  for (const auto& x : numbered("x", dim)) b.base(x);
  int next = 1;
  for (int w = 1; w <= degree; ++w) {
    int count = uniform(1, 2);
    for (int k = 0; k < count; ++k) b.fiber("y" + std::to_string(next++), {w});
  }
  return b.build();
}

Expression InstanceGenerator::base_polynomial(const ChartPtr& chart, int degree) {
  Expression e(chart);
  for (const auto& m : base_monomials(chart, chart->indices_of(CoordKind::base), degree)) {
    if (coin(0.4)) e += coefficient() * m;
  }
  return e;
}

Expression InstanceGenerator::fiber_polynomial(const ChartPtr& chart, int weight, int base_degree, int min_factors,
                                               const std::string& avoid) {
  Expression e(chart);
  for (const auto& m : fiber_monomials(chart, weight, min_factors, avoid)) {
    if (coin(0.6)) e += base_polynomial(chart, base_degree) * m;
  }
  return e;
}

AlgebroidSpec InstanceGenerator::algebroid_spec(int base_dim, int rank, int degree) {
  AlgebroidSpec s;
  s.chart = algebroid_chart("A", numbered("x", base_dim), numbered("xi", rank));
  auto X = numbered("x", base_dim);
  auto O = numbered("xi", rank);
  for (const auto& i : O) {
    for (const auto& a : X) {
      if (coin(0.6)) s.anchor[{i, a}] = base_polynomial(s.chart, degree);
    }
  }
  for (int i = 0; i < rank; ++i) {
    for (int j = i + 1; j < rank; ++j) {
      for (int k = 0; k < rank; ++k) {
        if (coin(0.5)) s.structure[{O[i], O[j], O[k]}] = base_polynomial(s.chart, degree);
      }
    }
  }
  return s;
}

AlgebroidSpec InstanceGenerator::valid_algebroid_spec(int base_dim, int rank) {
  AlgebroidSpec s;
  auto X = numbered("x", base_dim);
  auto O = numbered("xi", rank);
  s.chart = algebroid_chart("A", X, O);
  auto c = [&](const std::string& n) { return Expression::coordinate(s.chart, n); };
  auto one = Expression::constant(s.chart, 1);

  // odd directions 0..m-1 form a tangent or action part; the rest a Lie
  // algebra bundle with zero anchor whose coefficient only depends on base
  // coordinates the anchor does not move
  int kind = uniform(0, 3);
  int m = 0;
  std::vector<bool> moved(static_cast<std::size_t>(base_dim), false);
  if (kind == 0) {
    m = std::min(base_dim, rank);
    for (int i = 0; i < m; ++i) {
      s.anchor[{O[i], X[i]}] = one;
      moved[i] = true;
    }
  } else if (kind == 1 && rank >= 2) {
    // e1 -> -Euler field, e2 -> d/dx1
    m = 2;
    for (const auto& a : X) s.anchor[{O[0], a}] = -c(a);
    s.anchor[{O[1], X[0]}] = one;
    s.structure[{O[0], O[1], O[1]}] = one;
    moved.assign(moved.size(), true);
  } else if (kind == 2) {
    // commuting constant vector fields
    m = uniform(1, rank);
    for (int i = 0; i < m; ++i) {
      for (int a = 0; a < base_dim; ++a) {
        if (coin(0.5)) {
          s.anchor[{O[i], X[a]}] = Expression::constant(s.chart, coefficient());
          moved[a] = true;
        }
      }
    }
  }
  const int rest = rank - m;
  if (rest >= 2) {
    ChartBuilder free("free", 1);
    bool any = false;
    for (int a = 0; a < base_dim; ++a) {
      if (!moved[a]) {
        free.base(X[a]);
        any = true;
      }
    }
    Expression f = Expression::constant(s.chart, coefficient());
    if (any) f += base_polynomial(free.build(), 1).embed(s.chart);
    std::vector<std::string> L(O.begin() + m, O.end());
    if (rest == 2) {
      s.structure[{L[0], L[1], L[uniform(0, 1)]}] = f;
    } else if (coin()) {
      s.structure[{L[0], L[1], L[2]}] = f;
      s.structure[{L[1], L[2], L[0]}] = f;
      s.structure[{L[2], L[0], L[1]}] = f;
    } else {
      s.structure[{L[0], L[1], L[2]}] = f;
    }
  }

  // rescale xi_i -> c_i xi_i
  std::vector<Rational> scale;
  for (int i = 0; i < rank; ++i) scale.push_back(coefficient());
  auto idx = [&](const std::string& n) { return std::stoi(n.substr(2)) - 1; };
  for (auto& [k, e] : s.anchor) e *= scale[idx(k.first)];
  for (auto& [k, e] : s.structure) {
    const auto& [i, j, l] = k;
    e *= scale[idx(i)] * scale[idx(j)] / scale[idx(l)];
  }
  return s;
}

Section InstanceGenerator::section(const Algebroid& A, int degree) {
  Section u;
  for (std::size_t i = 0; i < A.rank(); ++i) u.u.push_back(base_polynomial(A.chart(), degree));
  return u;
}

ChristoffelData InstanceGenerator::christoffels(const Algebroid& A, const ChartPtr& bundle, int base_degree) {
  ChartPtr P = product_chart(A.chart(), bundle);
  ChristoffelData g;
  for (std::size_t i = 0; i < A.rank(); ++i) {
    const std::string on = A.chart()->at(A.odd(i)).name;
    for (const auto& c : bundle->coords()) {
      if (c.kind != CoordKind::fiber || !coin(0.7)) continue;
      Expression e = fiber_polynomial(P, c.weight[0], base_degree);
      if (!e.is_zero()) g.emplace(std::pair{on, c.name}, e);
    }
  }
  return g;
}

Connection InstanceGenerator::connection(const Algebroid& A, const ChartPtr& bundle, int base_degree) {
  return assemble(A, bundle, christoffels(A, bundle, base_degree));
}

Connection InstanceGenerator::split_connection(const Algebroid& A, const ChartPtr& split_bundle, int base_degree) {
  ChartPtr P = product_chart(A.chart(), split_bundle);
  LinearBlocks blocks;
  for (std::size_t i = 0; i < A.rank(); ++i) {
    const std::string on = A.chart()->at(A.odd(i)).name;
    for (const auto& J : split_bundle->coords()) {
      if (J.kind != CoordKind::fiber) continue;
      for (const auto& I : split_bundle->coords()) {
        if (I.kind != CoordKind::fiber || I.weight != J.weight || !coin(0.6)) continue;
        Expression e = base_polynomial(P, base_degree);
        if (!e.is_zero()) blocks.emplace(std::tuple{J.name, on, I.name}, e);
      }
    }
  }
  return graded::split_connection(A, split_bundle, christoffels_from_blocks(P, blocks));
}

TransitionMap InstanceGenerator::triangular_transition(const ChartPtr& source, const ChartPtr& target, int steps,
                                                       int base_degree, bool touch_base, bool touch_odd,
                                                       bool touch_fibers) {
  require_same_chart(source, target, "triangular transition");
  std::vector<std::size_t> pool;
  for (std::size_t r = 0; r < source->size(); ++r) {
    const auto& c = source->at(r);
    if ((c.kind == CoordKind::base && touch_base) || (c.kind == CoordKind::algebroid_odd && touch_odd) ||
        (c.kind == CoordKind::fiber && c.parity == Parity::even && touch_fibers)) {
      pool.push_back(r);
    }
  }
  TransitionMap T = TransitionMap::make("T", source, target, {}, {});
  if (pool.empty()) return T;
  for (int step = 0; step < steps; ++step) {
    const auto& c = source->at(pool[static_cast<std::size_t>(uniform(0, static_cast<int>(pool.size()) - 1))]);
    Expression z = Expression::coordinate(target, c.name);
    std::map<std::string, Expression> fwd, inv;
    if (coin(0.25)) {
      Rational k = coefficient();
      fwd.emplace(c.name, k * z);
      inv.emplace(c.name, Rational(1) / k * z);
    } else {
      Expression E(target);
      if (c.kind == CoordKind::base) {
        std::vector<std::size_t> others;
        for (auto r : target->indices_of(CoordKind::base)) {
          if (target->at(r).name != c.name) others.push_back(r);
        }
        for (const auto& m : base_monomials(target, others, base_degree)) {
          if (coin(0.5)) E += coefficient() * m;
        }
      } else if (c.kind == CoordKind::algebroid_odd) {
        for (auto r : target->indices_of(CoordKind::algebroid_odd)) {
          if (target->at(r).name != c.name && coin(0.6)) E += base_polynomial(target, base_degree) * Expression::coordinate(target, r);
        }
      } else {
        E = fiber_polynomial(target, c.weight[0], base_degree, 1, c.name);
      }
      fwd.emplace(c.name, z + E);
      inv.emplace(c.name, z - E);
    }
    T = compose(T, TransitionMap::make("step", target, target, fwd, inv));
  }
  T.name = "T";
  return T;
}

TransitionMap InstanceGenerator::splitting(const ChartPtr& unsplit, const ChartPtr& split, int steps, int base_degree) {
  require_same_chart(unsplit, split, "splitting");
  std::vector<std::string> pool;
  for (const auto& c : split->coords()) {
    if (is_even_fiber(c) && c.weight[0] >= 2) pool.push_back(c.name);
  }
  std::map<std::string, Expression> identity;
  TransitionMap T = TransitionMap::make("phi", unsplit, split, identity, identity);
  if (pool.empty()) return T;
  for (int s = 0; s < steps; ++s) {
    const std::string& name = pool[static_cast<std::size_t>(uniform(0, static_cast<int>(pool.size()) - 1))];
    int w = split->at(split->index(name)).weight[0];
    Expression E = fiber_polynomial(split, w, base_degree, 2);
    std::map<std::string, Expression> fwd{{name, Expression::coordinate(split, name) + E}};
    std::map<std::string, Expression> inv{{name, Expression::coordinate(split, name) - E}};
    T = compose(T, TransitionMap::make("step", split, split, fwd, inv));
  }
  T.name = "phi";
  return T;
}

TransitionMap InstanceGenerator::gauge(const ChartPtr& product, int steps, int base_degree) {
  return triangular_transition(product, product, steps, base_degree, false, false, true);
}

}  // namespace graded
