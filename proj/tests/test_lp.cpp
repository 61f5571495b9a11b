#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "reliroute/lp.hpp"

using namespace reliroute;

namespace {

struct Dense {
  std::vector<double> c, lo, hi;
  std::vector<std::vector<double>> a;
  std::vector<double> rlo, rhi;
};

// Vertex enumeration: every choice of n tight constraints among column and
// row bounds, solved densely; the cheapest feasible point.
std::optional<double> vertex_oracle(const Dense& p) {
  const std::size_t n = p.c.size();
  const std::size_t m = p.a.size();
  struct Cons {
    std::vector<double> coef;
    double rhs;
  };
  std::vector<Cons> all;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1;
    all.push_back({e, p.lo[j]});
    all.push_back({e, p.hi[j]});
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (std::isfinite(p.rlo[i])) all.push_back({p.a[i], p.rlo[i]});
    if (std::isfinite(p.rhi[i])) all.push_back({p.a[i], p.rhi[i]});
  }
  std::optional<double> best;
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k, std::size_t from) {
    if (k == n) {
      Eigen::MatrixXd mat(n, n);
      Eigen::VectorXd rhs(n);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < n; ++j) mat(r, j) = all[pick[r]].coef[j];
        rhs(r) = all[pick[r]].rhs;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(mat);
      if (!lu.isInvertible()) return;
      Eigen::VectorXd x = lu.solve(rhs);
      for (std::size_t j = 0; j < n; ++j) {
        if (x(j) < p.lo[j] - 1e-9 || x(j) > p.hi[j] + 1e-9) return;
      }
      for (std::size_t i = 0; i < m; ++i) {
        double act = 0;
        for (std::size_t j = 0; j < n; ++j) act += p.a[i][j] * x(j);
        if (act < p.rlo[i] - 1e-9 || act > p.rhi[i] + 1e-9) return;
      }
      double obj = 0;
      for (std::size_t j = 0; j < n; ++j) obj += p.c[j] * x(j);
      if (!best || obj < *best) best = obj;
      return;
    }
    for (std::size_t i = from; i < all.size(); ++i) {
      pick[k] = i;
      rec(k + 1, i + 1);
    }
  };
  rec(0, 0);
  return best;
}

lp::DualSimplex make(const Dense& p) {
  lp::DualSimplex s(p.c, p.lo, p.hi);
  std::vector<lp::RowSpec> rows;
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    lp::RowSpec r;
    for (std::size_t j = 0; j < p.c.size(); ++j) {
      if (p.a[i][j] != 0) {
        r.index.push_back(j);
        r.value.push_back(p.a[i][j]);
      }
    }
    r.lower = p.rlo[i];
    r.upper = p.rhi[i];
    rows.push_back(r);
  }
  s.add_rows(rows);
  return s;
}

Dense random_problem(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> u(-5, 5);
  std::uniform_int_distribution<int> coin(0, 3);
  Dense p;
  for (std::size_t j = 0; j < n; ++j) {
    p.c.push_back(std::round(u(rng)));
    double a = std::round(u(rng)), b = std::round(u(rng));
    p.lo.push_back(std::min(a, b));
    p.hi.push_back(std::max(a, b) + 1);
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> row;
    for (std::size_t j = 0; j < n; ++j) row.push_back(coin(rng) == 0 ? 0.0 : std::round(u(rng)));
    p.a.push_back(row);
    double a = std::round(u(rng) * 3), b = std::round(u(rng) * 3);
    int kind = coin(rng);
    double inf = std::numeric_limits<double>::infinity();
    if (kind == 0) {
      p.rlo.push_back(-inf);
      p.rhi.push_back(a);
    } else if (kind == 1) {
      p.rlo.push_back(a);
      p.rhi.push_back(inf);
    } else if (kind == 2) {
      p.rlo.push_back(a);
      p.rhi.push_back(a);
    } else {
      p.rlo.push_back(std::min(a, b));
      p.rhi.push_back(std::max(a, b));
    }
  }
  return p;
}

}  // namespace

TEST(DualSimplex, SmallKnownProblem) {
  // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6, 0 <= x, y <= 10  -> x = 1.6, y = 1.2
  Dense p{{-1, -1}, {0, 0}, {10, 10}, {{1, 2}, {3, 1}}, {-INFINITY, -INFINITY}, {4, 6}};
  auto s = make(p);
  ASSERT_EQ(s.solve(), lp::Status::optimal);
  EXPECT_NEAR(s.objective(), -2.8, 1e-9);
  EXPECT_NEAR(s.value(0), 1.6, 1e-9);
  EXPECT_NEAR(s.value(1), 1.2, 1e-9);
}

TEST(DualSimplex, DetectsInfeasibility) {
  Dense p{{1, 1}, {0, 0}, {1, 1}, {{1, 1}}, {3}, {INFINITY}};
  auto s = make(p);
  EXPECT_EQ(s.solve(), lp::Status::infeasible);
}

TEST(DualSimplex, MatchesVertexEnumeration) {
  std::mt19937_64 rng(7);
  int feasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = 2 + trial % 3;
    std::size_t m = 1 + trial % 4;
    Dense p = random_problem(rng, n, m);
    auto want = vertex_oracle(p);
    auto s = make(p);
    auto st = s.solve();
    if (!want) {
      EXPECT_EQ(st, lp::Status::infeasible) << "trial " << trial;
      continue;
    }
    ++feasible;
    ASSERT_EQ(st, lp::Status::optimal) << "trial " << trial;
    EXPECT_NEAR(s.objective(), *want, 1e-7 * std::max(1.0, std::fabs(*want))) << "trial " << trial;
  }
  EXPECT_GT(feasible, 50);
}

TEST(DualSimplex, WarmStartAfterBoundChangeAndRowAddition) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Dense p = random_problem(rng, 4, 3);
    auto s = make(p);
    if (s.solve() != lp::Status::optimal) continue;
    // tighten a bound and append one more row, compare with a cold solve
    Dense q = p;
    q.hi[0] = q.lo[0] + 0.5 * (q.hi[0] - q.lo[0]);
    s.set_bounds(0, q.lo[0], q.hi[0]);
    Dense extra = random_problem(rng, 4, 1);
    q.a.push_back(extra.a[0]);
    q.rlo.push_back(extra.rlo[0]);
    q.rhi.push_back(extra.rhi[0]);
    lp::RowSpec r;
    for (std::size_t j = 0; j < 4; ++j) {
      if (extra.a[0][j] != 0) {
        r.index.push_back(j);
        r.value.push_back(extra.a[0][j]);
      }
    }
    r.lower = extra.rlo[0];
    r.upper = extra.rhi[0];
    s.add_rows({r});
    auto want = vertex_oracle(q);
    auto st = s.solve();
    if (!want) {
      EXPECT_EQ(st, lp::Status::infeasible);
    } else {
      ASSERT_EQ(st, lp::Status::optimal);
      EXPECT_NEAR(s.objective(), *want, 1e-7 * std::max(1.0, std::fabs(*want)));
    }
  }
}

TEST(DualSimplex, RejectsInfiniteColumnBounds) {
  EXPECT_THROW(lp::DualSimplex({1.0}, {0.0}, {INFINITY}), ConfigurationError);
}
