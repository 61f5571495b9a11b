#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "reliroute/error.hpp"

namespace reliroute::lp {

enum class Status { optimal, infeasible, iteration_limit, time_limit };

struct Options {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t refactor_interval = 100;
  std::size_t max_iterations = 10'000'000;
  bool perturb = true;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct RowSpec {
  std::vector<std::size_t> index;
  std::vector<double> value;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

// Bounded dual simplex over min c'x, lower <= x <= upper (all finite),
// row_lower <= A x <= row_upper. Each row i owns a logical variable r_i with
// A x - r = 0, so every variable is boxed and any basis is made dual
// feasible by placing nonbasic variables at the bound matching the sign of
// their reduced cost. The basis inverse is kept dense and refactorized with
// a sparse LU. Rows may be appended between solves; bounds may change
// between solves and the last basis is reused.
class DualSimplex {
 public:
  DualSimplex(std::vector<double> cost, std::vector<double> lower, std::vector<double> upper, Options opt = {})
      : n_(cost.size()), opt_(opt), rng_(opt.seed) {
    if (lower.size() != n_ || upper.size() != n_) throw ConfigurationError("bound vectors do not match cost vector");
    for (std::size_t j = 0; j < n_; ++j) {
      if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || lower[j] > upper[j] || !std::isfinite(cost[j])) {
        throw ConfigurationError("column " + std::to_string(j) + " needs finite bounds and cost");
      }
    }
    cost_ = cost;
    work_cost_ = std::move(cost);
    orig_lb_ = lower;
    orig_ub_ = upper;
    lb_ = std::move(lower);
    ub_ = std::move(upper);
    cols_.assign(n_, {});
    state_.assign(n_, State::at_lower);
    pos_.assign(n_, kNone);
    x_.assign(n_, 0.0);
    d_ = work_cost_;
    for (std::size_t j = 0; j < n_; ++j) {
      state_[j] = d_[j] >= 0 ? State::at_lower : State::at_upper;
      x_[j] = state_[j] == State::at_lower ? lb_[j] : ub_[j];
    }
  }

  std::size_t num_cols() const { return n_; }
  std::size_t num_rows() const { return m_; }
  std::size_t iterations() const { return iterations_; }
  double lower(std::size_t j) const { return lb_[j]; }
  double upper(std::size_t j) const { return ub_[j]; }
  double original_lower(std::size_t j) const { return orig_lb_[j]; }
  double original_upper(std::size_t j) const { return orig_ub_[j]; }

  void set_deadline(std::optional<std::chrono::steady_clock::time_point> t) { opt_.deadline = t; }

  void add_rows(const std::vector<RowSpec>& rows) {
    if (rows.empty()) return;
    ensure_primal();
    const std::size_t k = rows.size();
    const std::size_t m_new = m_ + k;
    std::vector<double> binv(m_new * m_new, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      std::copy(binv_.begin() + static_cast<std::ptrdiff_t>(r * m_),
                binv_.begin() + static_cast<std::ptrdiff_t>((r + 1) * m_),
                binv.begin() + static_cast<std::ptrdiff_t>(r * m_new));
    }
    for (std::size_t t = 0; t < k; ++t) {
      const auto& spec = rows[t];
      if (spec.index.size() != spec.value.size()) throw ConfigurationError("row index/value size mismatch");
      const std::size_t i = m_ + t;
      double* nrow = &binv[i * m_new];
      double amin = 0, amax = 0, act = 0;
      for (std::size_t e = 0; e < spec.index.size(); ++e) {
        std::size_t j = spec.index[e];
        double a = spec.value[e];
        if (j >= n_) throw ConfigurationError("row references column " + std::to_string(j));
        amin += a > 0 ? a * orig_lb_[j] : a * orig_ub_[j];
        amax += a > 0 ? a * orig_ub_[j] : a * orig_lb_[j];
        act += a * x_[j];
        cols_[j].push_back({i, a});
        if (state_[j] == State::basic) {
          const double* orow = &binv_[pos_[j] * m_];
          for (std::size_t c = 0; c < m_; ++c) nrow[c] += a * orow[c];
        }
      }
      nrow[i] = -1.0;
      row_index_.push_back(spec.index);
      row_value_.push_back(spec.value);
      double lo = std::isfinite(spec.lower) ? spec.lower : amin - 1.0;
      double hi = std::isfinite(spec.upper) ? spec.upper : amax + 1.0;
      lb_.push_back(lo);
      ub_.push_back(hi);
      orig_lb_.push_back(lo);
      orig_ub_.push_back(hi);
      cost_.push_back(0.0);
      work_cost_.push_back(0.0);
      state_.push_back(State::basic);
      pos_.push_back(i);
      head_.push_back(n_ + i);
      x_.push_back(act);
      d_.push_back(0.0);
    }
    binv_ = std::move(binv);
    m_ = m_new;
  }

  void set_bounds(std::size_t j, double lo, double hi) {
    if (j >= n_) throw ConfigurationError("column index out of range");
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigurationError("bounds must be finite");
    lb_[j] = lo;
    ub_[j] = hi;
    if (state_[j] != State::basic) {
      if (d_[j] > opt_.dual_tol) {
        state_[j] = State::at_lower;
      } else if (d_[j] < -opt_.dual_tol) {
        state_[j] = State::at_upper;
      }
      double v = state_[j] == State::at_lower ? lo : hi;
      if (v != x_[j]) {
        x_[j] = v;
        primal_dirty_ = true;
      }
    } else if (x_[j] < lo || x_[j] > hi) {
      primal_dirty_ = true;
    }
  }

  Status solve() {
    ensure_primal();
    if (opt_.perturb) {
      perturb_costs();
      Status s = run();
      restore_costs();
      if (s != Status::optimal) return s;
    }
    for (int round = 0; round < 4; ++round) {
      Status s = run();
      if (s != Status::optimal) return s;
      if (polish_check()) return Status::optimal;
    }
    return Status::optimal;
  }

  // Structural values.
  std::vector<double> primal() const { return std::vector<double>(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_)); }
  double value(std::size_t j) const { return x_[j]; }

  double objective() const {
    double s = 0;
    for (std::size_t j = 0; j < n_; ++j) s += cost_[j] * x_[j];
    return s;
  }

 private:
  enum class State : std::uint8_t { basic, at_lower, at_upper };
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  struct Entry {
    std::size_t row;
    double value;
  };

  template <class F>
  void for_column(std::size_t j, F&& f) const {
    if (j < n_) {
      for (const auto& e : cols_[j]) f(e.row, e.value);
    } else {
      f(j - n_, -1.0);
    }
  }

  double ptol(double bound) const { return opt_.primal_tol * std::max(1.0, std::fabs(bound)); }

  void ensure_primal() {
    if (primal_dirty_) compute_primal();
  }

  // x_B = -B^{-1} (sum over nonbasic j of a_j x_j)
  void compute_primal() {
    std::vector<double> w(m_, 0.0);
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (state_[j] == State::basic || x_[j] == 0) continue;
      const double xj = x_[j];
      for_column(j, [&](std::size_t i, double a) { w[i] += a * xj; });
    }
    for (std::size_t k = 0; k < m_; ++k) {
      const double* row = &binv_[k * m_];
      double s = 0;
      for (std::size_t i = 0; i < m_; ++i) s += row[i] * w[i];
      x_[head_[k]] = -s;
    }
    primal_dirty_ = false;
  }

  void compute_duals() {
    std::vector<double> y(m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
      double c = work_cost_[head_[k]];
      if (c == 0) continue;
      const double* row = &binv_[k * m_];
      for (std::size_t i = 0; i < m_; ++i) y[i] += c * row[i];
    }
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (state_[j] == State::basic) {
        d_[j] = 0;
        continue;
      }
      double s = work_cost_[j];
      for_column(j, [&](std::size_t i, double a) { s -= y[i] * a; });
      d_[j] = s;
    }
  }

  // Moves nonbasic variables whose reduced cost has the wrong sign to the
  // other bound. Returns true if any moved.
  bool fix_dual_infeasibility() {
    bool moved = false;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (state_[j] == State::basic || lb_[j] == ub_[j]) continue;
      if (state_[j] == State::at_lower && d_[j] < -opt_.dual_tol) {
        state_[j] = State::at_upper;
        x_[j] = ub_[j];
        moved = true;
      } else if (state_[j] == State::at_upper && d_[j] > opt_.dual_tol) {
        state_[j] = State::at_lower;
        x_[j] = lb_[j];
        moved = true;
      }
    }
    if (moved) primal_dirty_ = true;
    return moved;
  }

  void perturb_costs() {
    std::uniform_real_distribution<double> u(0.5, 1.0);
    for (std::size_t j = 0; j < n_; ++j) {
      double mag = (1e-7 + 1e-7 * std::fabs(cost_[j])) * u(rng_);
      if (state_[j] == State::at_upper) mag = -mag;
      work_cost_[j] = cost_[j] + mag;
    }
    compute_duals();
    fix_dual_infeasibility();
    ensure_primal();
  }

  void restore_costs() {
    for (std::size_t j = 0; j < n_; ++j) work_cost_[j] = cost_[j];
    compute_duals();
    fix_dual_infeasibility();
    ensure_primal();
  }

  // Fresh primal and dual values; true if still optimal.
  bool polish_check() {
    compute_primal();
    compute_duals();
    bool moved = fix_dual_infeasibility();
    ensure_primal();
    return !moved && choose_leaving(false) == kNone;
  }

  void reset_to_slack_basis() {
    for (std::size_t j = 0; j < n_; ++j) {
      if (state_[j] == State::basic) {
        state_[j] = State::at_lower;
        x_[j] = lb_[j];
      }
      pos_[j] = kNone;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      state_[n_ + i] = State::basic;
      pos_[n_ + i] = i;
      head_[i] = n_ + i;
    }
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) binv_[i * m_ + i] = -1.0;
    compute_duals();
    fix_dual_infeasibility();
    compute_primal();
  }

  void refactor() {
    updates_ = 0;
    if (m_ == 0) return;
    using Sparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
    std::vector<Eigen::Triplet<double, int>> trip;
    for (std::size_t k = 0; k < m_; ++k) {
      for_column(head_[k], [&](std::size_t i, double a) {
        trip.emplace_back(static_cast<int>(i), static_cast<int>(k), a);
      });
    }
    const int m = static_cast<int>(m_);
    Sparse b(m, m);
    b.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Sparse, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(b);
    if (lu.info() != Eigen::Success) {
      reset_to_slack_basis();
      return;
    }
    Eigen::MatrixXd inv = lu.solve(Eigen::MatrixXd::Identity(m, m));
    if (lu.info() != Eigen::Success || !inv.allFinite()) {
      reset_to_slack_basis();
      return;
    }
    for (std::size_t k = 0; k < m_; ++k) {
      for (std::size_t i = 0; i < m_; ++i) binv_[k * m_ + i] = inv(static_cast<int>(k), static_cast<int>(i));
    }
  }

  std::size_t choose_leaving(bool bland) const {
    std::size_t best = kNone;
    double best_inf = 0;
    std::size_t best_var = kNone;
    for (std::size_t k = 0; k < m_; ++k) {
      std::size_t v = head_[k];
      double inf = 0;
      if (x_[v] < lb_[v] - ptol(lb_[v])) {
        inf = lb_[v] - x_[v];
      } else if (x_[v] > ub_[v] + ptol(ub_[v])) {
        inf = x_[v] - ub_[v];
      }
      if (inf <= 0) continue;
      if (bland) {
        if (v < best_var) {
          best_var = v;
          best = k;
        }
      } else if (inf > best_inf) {
        best_inf = inf;
        best = k;
      }
    }
    return best;
  }

  Status run() {
    std::size_t stall = 0;
    bool bland = false;
    std::vector<double> alpha(n_ + m_, 0.0);
    std::vector<std::size_t> touched;
    std::vector<double> col(m_, 0.0);
    struct Cand {
      double ratio;
      double abs_alpha;
      std::size_t j;
    };
    std::vector<Cand> cands;
    while (true) {
      if (iterations_ >= opt_.max_iterations) return Status::iteration_limit;
      if (opt_.deadline && (iterations_ & 31) == 0 && std::chrono::steady_clock::now() > *opt_.deadline) {
        return Status::time_limit;
      }
      if (updates_ >= opt_.refactor_interval) {
        refactor();
        compute_primal();
        compute_duals();
        fix_dual_infeasibility();
        ensure_primal();
      }
      std::size_t p = choose_leaving(bland);
      if (p == kNone) {
        compute_primal();
        compute_duals();
        fix_dual_infeasibility();
        ensure_primal();
        p = choose_leaving(bland);
        if (p == kNone) return Status::optimal;
      }
      ++iterations_;
      const std::size_t leaving = head_[p];
      const bool below = x_[leaving] < lb_[leaving];
      const double s = below ? 1.0 : -1.0;
      const double delta = below ? lb_[leaving] - x_[leaving] : x_[leaving] - ub_[leaving];

      // pivot row over nonbasic columns
      const double* rho = &binv_[p * m_];
      for (std::size_t j : touched) alpha[j] = 0;
      touched.clear();
      for (std::size_t i = 0; i < m_; ++i) {
        const double r = rho[i];
        if (r == 0) continue;
        for (std::size_t e = 0; e < row_index_[i].size(); ++e) {
          std::size_t j = row_index_[i][e];
          if (state_[j] == State::basic) continue;
          if (alpha[j] == 0) touched.push_back(j);
          alpha[j] += r * row_value_[i][e];
          if (alpha[j] == 0) alpha[j] = std::numeric_limits<double>::min();
        }
        std::size_t lj = n_ + i;
        if (state_[lj] != State::basic) {
          if (alpha[lj] == 0) touched.push_back(lj);
          alpha[lj] += -r;
          if (alpha[lj] == 0) alpha[lj] = std::numeric_limits<double>::min();
        }
      }

      cands.clear();
      for (std::size_t j : touched) {
        if (lb_[j] == ub_[j]) continue;
        const double a = s * alpha[j];
        if (std::fabs(a) < opt_.pivot_tol) continue;
        if (state_[j] == State::at_lower && a < 0) {
          cands.push_back({std::max(d_[j], 0.0) / -a, -a, j});
        } else if (state_[j] == State::at_upper && a > 0) {
          cands.push_back({std::max(-d_[j], 0.0) / a, a, j});
        }
      }
      if (cands.empty()) return Status::infeasible;

      std::size_t pick = 0;
      if (bland) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cands.size(); ++c) {
          if (cands[c].ratio < best - 1e-12 ||
              (std::fabs(cands[c].ratio - best) <= 1e-12 && cands[c].j < cands[pick].j)) {
            best = std::min(best, cands[c].ratio);
            pick = c;
          }
        }
        std::swap(cands[0], cands[pick]);
        pick = 0;
        cands.resize(1);
      } else {
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
          if (a.ratio != b.ratio) return a.ratio < b.ratio;
          return a.j < b.j;
        });
        double slope = delta;
        std::size_t k = 0;
        for (; k < cands.size(); ++k) {
          const double range = ub_[cands[k].j] - lb_[cands[k].j];
          const double drop = cands[k].abs_alpha * range;
          if (slope - drop <= 0 || k + 1 == cands.size()) break;
          slope -= drop;
        }
        // among near-ties at the break point prefer the largest pivot
        pick = k;
        const double tie = cands[k].ratio + opt_.dual_tol;
        for (std::size_t c = k + 1; c < cands.size() && cands[c].ratio <= tie; ++c) {
          if (cands[c].abs_alpha > cands[pick].abs_alpha) pick = c;
        }
      }
      const std::size_t q = cands[pick].j;
      const double t = cands[pick].ratio;

      // dual update
      for (std::size_t j : touched) {
        if (state_[j] != State::basic) d_[j] += t * s * alpha[j];
      }
      d_[q] = 0;

      // bound flips of the candidates passed over
      std::vector<double> w;
      bool flipped = false;
      for (std::size_t c = 0; c < pick; ++c) {
        const std::size_t j = cands[c].j;
        if (w.empty()) w.assign(m_, 0.0);
        double dx;
        if (state_[j] == State::at_lower) {
          state_[j] = State::at_upper;
          dx = ub_[j] - lb_[j];
          x_[j] = ub_[j];
        } else {
          state_[j] = State::at_lower;
          dx = lb_[j] - ub_[j];
          x_[j] = lb_[j];
        }
        for_column(j, [&](std::size_t i, double a) { w[i] += a * dx; });
        flipped = true;
      }
      if (flipped) {
        for (std::size_t k = 0; k < m_; ++k) {
          const double* row = &binv_[k * m_];
          double sum = 0;
          for (std::size_t i = 0; i < m_; ++i) sum += row[i] * w[i];
          x_[head_[k]] -= sum;
        }
      }

      // entering column
      col.assign(m_, 0.0);
      for_column(q, [&](std::size_t i, double a) {
        for (std::size_t k = 0; k < m_; ++k) col[k] += a * binv_[k * m_ + i];
      });
      const double pivot = col[p];
      if (std::fabs(pivot) < opt_.pivot_tol * 1e-3) {
        // numerically unreliable; refactor and retry
        refactor();
        compute_primal();
        compute_duals();
        fix_dual_infeasibility();
        ensure_primal();
        continue;
      }
      const double target = below ? lb_[leaving] : ub_[leaving];
      const double step = (x_[leaving] - target) / pivot;
      for (std::size_t k = 0; k < m_; ++k) {
        if (col[k] != 0) x_[head_[k]] -= step * col[k];
      }
      x_[q] += step;
      x_[leaving] = target;

      // basis change
      state_[leaving] = below ? State::at_lower : State::at_upper;
      pos_[leaving] = kNone;
      d_[leaving] = s * t;
      state_[q] = State::basic;
      pos_[q] = p;
      head_[p] = q;
      d_[q] = 0;
      {
        double* prow = &binv_[p * m_];
        const double inv = 1.0 / pivot;
        for (std::size_t i = 0; i < m_; ++i) prow[i] *= inv;
        for (std::size_t k = 0; k < m_; ++k) {
          if (k == p || col[k] == 0) continue;
          const double f = col[k];
          double* row = &binv_[k * m_];
          for (std::size_t i = 0; i < m_; ++i) row[i] -= f * prow[i];
        }
      }
      ++updates_;

      if (t * delta <= 1e-12) {
        if (++stall > 200) bland = true;
      } else {
        stall = 0;
        bland = false;
      }
    }
  }

  std::size_t n_;
  std::size_t m_ = 0;
  Options opt_;
  std::mt19937_64 rng_;
  std::vector<double> cost_, work_cost_;
  std::vector<double> lb_, ub_, orig_lb_, orig_ub_;
  std::vector<std::vector<Entry>> cols_;
  std::vector<std::vector<std::size_t>> row_index_;
  std::vector<std::vector<double>> row_value_;
  std::vector<State> state_;
  std::vector<std::size_t> pos_;
  std::vector<std::size_t> head_;
  std::vector<double> x_, d_;
  std::vector<double> binv_;  // row-major m x m
  std::size_t updates_ = 0;
  std::size_t iterations_ = 0;
  bool primal_dirty_ = false;
};

}  // namespace reliroute::lp
