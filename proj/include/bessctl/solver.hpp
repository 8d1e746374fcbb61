#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "bessctl/errors.hpp"
#include "bessctl/lp.hpp"

namespace bessctl {

struct SolverOptions {
    double feas_tol = 1e-6;     // absolute feasibility tolerance
    double int_tol = 1e-6;      // binary integrality tolerance
    int max_nodes = 10000;      // branch-and-bound node limit
    long max_pivots = 0;        // 0 = derive from problem size
};

/// Raised when branch and bound hits the node limit; carries the best
/// integer-feasible solution found so far, if any.
class ResourceExhausted : public Error {
public:
    ResourceExhausted(const std::string& what, std::optional<Solution> inc)
        : Error(what), incumbent(std::move(inc)) {}

    std::optional<Solution> incumbent;
};

inline double max_constraint_violation(const LinearProgram& lp, const std::vector<double>& x) {
    double worst = 0.0;
    for (const auto& c : lp.constraints()) {
        double lhs = 0.0;
        for (const auto& [v, coeff] : c.terms) {
            lhs += coeff * x[static_cast<size_t>(v)];
        }
        const double viol = (c.relation == Relation::Equal) ? std::fabs(lhs - c.rhs)
                                                            : std::max(0.0, lhs - c.rhs);
        worst = std::max(worst, viol);
    }
    for (int j = 0; j < lp.num_variables(); ++j) {
        const auto& v = lp.variable(j);
        const double xj = x[static_cast<size_t>(j)];
        worst = std::max(worst, std::max(v.lower - xj, xj - v.upper));
    }
    return worst;
}

namespace detail {

/// Two-phase dense-tableau simplex with explicit lower/upper bounds on every
/// variable. Nonbasic variables rest at one of their bounds; the tableau
/// carries structural columns, one slack per row and phase-1 artificials.
class SimplexTableau {
public:
    SimplexTableau(const LinearProgram& lp, const std::vector<double>& lower,
                   const std::vector<double>& upper, const SolverOptions& opt)
        : lp_(lp), opt_(opt), m_(lp.num_constraints()), n_(lp.num_variables()) {
        lo_.assign(lower.begin(), lower.end());
        hi_.assign(upper.begin(), upper.end());
        // slacks
        for (int i = 0; i < m_; ++i) {
            lo_.push_back(0.0);
            hi_.push_back(lp.constraints()[static_cast<size_t>(i)].relation == Relation::Equal
                              ? 0.0
                              : kInfinity);
        }
        // nonbasic rest positions for structural columns
        state_.assign(static_cast<size_t>(n_ + m_), kAtLower);
        for (int j = 0; j < n_; ++j) {
            if (std::isfinite(lo_[static_cast<size_t>(j)])) {
                state_[static_cast<size_t>(j)] = kAtLower;
            } else if (std::isfinite(hi_[static_cast<size_t>(j)])) {
                state_[static_cast<size_t>(j)] = kAtUpper;
            } else {
                state_[static_cast<size_t>(j)] = kFreeZero;
            }
        }
        // residuals at the rest point decide which rows need artificials
        std::vector<double> resid(static_cast<size_t>(m_), 0.0);
        std::vector<bool> needs_art(static_cast<size_t>(m_), false);
        int n_art = 0;
        for (int i = 0; i < m_; ++i) {
            const auto& c = lp.constraints()[static_cast<size_t>(i)];
            double r = c.rhs;
            for (const auto& [v, coeff] : c.terms) {
                r -= coeff * rest_value(v);
            }
            resid[static_cast<size_t>(i)] = r;
            const bool eq = c.relation == Relation::Equal;
            if ((eq && std::fabs(r) > 1e-12) || (!eq && r < -1e-12)) {
                needs_art[static_cast<size_t>(i)] = true;
                ++n_art;
            }
        }
        first_art_ = n_ + m_;
        ncols_ = n_ + m_ + n_art;
        tab_.assign(static_cast<size_t>(m_) * ncols_, 0.0);
        basis_.assign(static_cast<size_t>(m_), -1);
        beta_.assign(static_cast<size_t>(m_), 0.0);
        int art = first_art_;
        for (int i = 0; i < m_; ++i) {
            double* row = row_ptr(i);
            const auto& c = lp.constraints()[static_cast<size_t>(i)];
            for (const auto& [v, coeff] : c.terms) {
                row[v] += coeff;
            }
            row[n_ + i] = 1.0; // slack
            const double r = resid[static_cast<size_t>(i)];
            if (needs_art[static_cast<size_t>(i)]) {
                if (r < 0.0) {
                    // keep the basic (artificial) column at +1
                    for (int j = 0; j < n_ + m_; ++j) {
                        row[j] = -row[j];
                    }
                }
                row[art] = 1.0;
                lo_.push_back(0.0);
                hi_.push_back(kInfinity);
                basis_[static_cast<size_t>(i)] = art;
                beta_[static_cast<size_t>(i)] = std::fabs(r);
                state_.push_back(kBasic);
                ++art;
            } else {
                basis_[static_cast<size_t>(i)] = n_ + i;
                beta_[static_cast<size_t>(i)] = r;
                state_[static_cast<size_t>(n_ + i)] = kBasic;
            }
        }
        d_.assign(static_cast<size_t>(ncols_), 0.0);
    }

    SolveStatus run() {
        const long cap = opt_.max_pivots > 0
                             ? opt_.max_pivots
                             : std::max<long>(50000, 25L * (m_ + ncols_));
        if (first_art_ < ncols_) {
            std::vector<double> phase1(static_cast<size_t>(ncols_), 0.0);
            for (int j = first_art_; j < ncols_; ++j) {
                phase1[static_cast<size_t>(j)] = 1.0;
            }
            reset_costs(phase1);
            const SolveStatus s1 = iterate(cap);
            if (s1 != SolveStatus::Optimal) {
                throw Error("simplex: phase 1 failed to terminate");
            }
            if (obj_ > 1e-7) {
                return SolveStatus::Infeasible;
            }
            retire_artificials();
        }
        std::vector<double> cost(static_cast<size_t>(ncols_), 0.0);
        for (int j = 0; j < n_; ++j) {
            cost[static_cast<size_t>(j)] = lp_.objective_coeff(j);
        }
        reset_costs(cost);
        return iterate(cap);
    }

    std::vector<double> extract() const {
        std::vector<double> x(static_cast<size_t>(n_), 0.0);
        for (int j = 0; j < n_; ++j) {
            if (state_[static_cast<size_t>(j)] != kBasic) {
                x[static_cast<size_t>(j)] = rest_value(j);
            }
        }
        for (int i = 0; i < m_; ++i) {
            if (basis_[static_cast<size_t>(i)] < n_) {
                x[static_cast<size_t>(basis_[static_cast<size_t>(i)])] =
                    beta_[static_cast<size_t>(i)];
            }
        }
        return x;
    }

private:
    enum ColState : int8_t { kBasic, kAtLower, kAtUpper, kFreeZero };

    double* row_ptr(int i) { return &tab_[static_cast<size_t>(i) * ncols_]; }
    const double* row_ptr(int i) const { return &tab_[static_cast<size_t>(i) * ncols_]; }

    // value of a nonbasic column (basic values live in beta_)
    double rest_value(int j) const {
        switch (state_[static_cast<size_t>(j)]) {
        case kAtLower: return lo_[static_cast<size_t>(j)];
        case kAtUpper: return hi_[static_cast<size_t>(j)];
        default: return 0.0;
        }
    }

    void reset_costs(const std::vector<double>& cost) {
        cost_ = cost;
        obj_ = 0.0;
        for (int j = 0; j < ncols_; ++j) {
            d_[static_cast<size_t>(j)] = cost_[static_cast<size_t>(j)];
            if (state_[static_cast<size_t>(j)] != kBasic) {
                obj_ += cost_[static_cast<size_t>(j)] * rest_value(j);
            }
        }
        for (int i = 0; i < m_; ++i) {
            const double cb = cost_[static_cast<size_t>(basis_[static_cast<size_t>(i)])];
            obj_ += cb * beta_[static_cast<size_t>(i)];
            if (cb == 0.0) {
                continue;
            }
            const double* row = row_ptr(i);
            for (int j = 0; j < ncols_; ++j) {
                d_[static_cast<size_t>(j)] -= cb * row[j];
            }
        }
    }

    /// After phase 1: pin artificials to zero and pivot basic ones out where a
    /// non-artificial column is available; rows left with an artificial basis
    /// entry are redundant and stay pinned at zero.
    void retire_artificials() {
        for (int j = first_art_; j < ncols_; ++j) {
            hi_[static_cast<size_t>(j)] = 0.0;
        }
        for (int i = 0; i < m_; ++i) {
            const int b = basis_[static_cast<size_t>(i)];
            if (b < first_art_) {
                continue;
            }
            const double* row = row_ptr(i);
            int enter = -1;
            double best = 1e-7;
            for (int j = 0; j < first_art_; ++j) {
                if (state_[static_cast<size_t>(j)] == kBasic) {
                    continue;
                }
                if (std::fabs(row[j]) > best) {
                    best = std::fabs(row[j]);
                    enter = j;
                }
            }
            if (enter >= 0) {
                pivot(i, enter, rest_value(enter));
                state_[static_cast<size_t>(b)] = kAtLower;
            }
        }
    }

    SolveStatus iterate(long cap) {
        bool bland = false;
        long stall = 0;
        double stall_obj = obj_;
        const double dtol = 1e-9;
        for (long iter = 0; iter < cap; ++iter) {
            // pricing
            int enter = -1;
            int dir = 0;
            double best_rate = dtol;
            for (int j = 0; j < ncols_; ++j) {
                const ColState st = state_[static_cast<size_t>(j)];
                if (st == kBasic || lo_[static_cast<size_t>(j)] >= hi_[static_cast<size_t>(j)]) {
                    continue;
                }
                const double dj = d_[static_cast<size_t>(j)];
                int cand_dir = 0;
                if (st == kAtLower && dj < -dtol) {
                    cand_dir = 1;
                } else if (st == kAtUpper && dj > dtol) {
                    cand_dir = -1;
                } else if (st == kFreeZero && std::fabs(dj) > dtol) {
                    cand_dir = dj < 0.0 ? 1 : -1;
                }
                if (cand_dir == 0) {
                    continue;
                }
                if (bland) {
                    enter = j;
                    dir = cand_dir;
                    break;
                }
                if (std::fabs(dj) > best_rate) {
                    best_rate = std::fabs(dj);
                    enter = j;
                    dir = cand_dir;
                }
            }
            if (enter < 0) {
                return SolveStatus::Optimal;
            }
            const double dj = d_[static_cast<size_t>(enter)];

            // ratio test: smallest step wins; among (near-)exact ties pick the
            // row with the largest pivot magnitude, or the lowest basis index
            // under Bland's rule
            double tau = hi_[static_cast<size_t>(enter)] - lo_[static_cast<size_t>(enter)];
            if (state_[static_cast<size_t>(enter)] == kFreeZero) {
                tau = kInfinity;
            }
            int leave_row = -1;
            bool leave_at_upper = false;
            double leave_abs = 0.0;
            for (int i = 0; i < m_; ++i) {
                const double a = tab_[static_cast<size_t>(i) * ncols_ + enter];
                if (std::fabs(a) <= 1e-11) {
                    continue;
                }
                const int b = basis_[static_cast<size_t>(i)];
                const double delta = dir * a; // basic moves at rate -delta
                double t;
                bool at_upper;
                if (delta > 0.0) {
                    const double lb = lo_[static_cast<size_t>(b)];
                    if (!std::isfinite(lb)) {
                        continue;
                    }
                    t = (beta_[static_cast<size_t>(i)] - lb) / delta;
                    at_upper = false;
                } else {
                    const double ub = hi_[static_cast<size_t>(b)];
                    if (!std::isfinite(ub)) {
                        continue;
                    }
                    t = (ub - beta_[static_cast<size_t>(i)]) / (-delta);
                    at_upper = true;
                }
                t = std::max(t, 0.0);
                if (t < tau - 1e-12) {
                    tau = t;
                    leave_row = i;
                    leave_at_upper = at_upper;
                    leave_abs = std::fabs(a);
                } else if (leave_row >= 0 && t <= tau + 1e-12) {
                    const bool prefer =
                        bland ? b < basis_[static_cast<size_t>(leave_row)] : std::fabs(a) > leave_abs;
                    if (prefer) {
                        tau = std::min(tau, t);
                        leave_row = i;
                        leave_at_upper = at_upper;
                        leave_abs = std::fabs(a);
                    }
                }
            }
            if (!std::isfinite(tau)) {
                return SolveStatus::Unbounded;
            }

            if (leave_row < 0) {
                // entering variable travels to its opposite bound
                for (int i = 0; i < m_; ++i) {
                    beta_[static_cast<size_t>(i)] -=
                        dir * tau * tab_[static_cast<size_t>(i) * ncols_ + enter];
                }
                state_[static_cast<size_t>(enter)] =
                    state_[static_cast<size_t>(enter)] == kAtLower ? kAtUpper : kAtLower;
                obj_ += dj * dir * tau;
            } else {
                const double enter_val = rest_value(enter) + dir * tau;
                for (int i = 0; i < m_; ++i) {
                    if (i != leave_row) {
                        beta_[static_cast<size_t>(i)] -=
                            dir * tau * tab_[static_cast<size_t>(i) * ncols_ + enter];
                    }
                }
                const int leaving = basis_[static_cast<size_t>(leave_row)];
                pivot(leave_row, enter, enter_val);
                state_[static_cast<size_t>(leaving)] = leave_at_upper ? kAtUpper : kAtLower;
                obj_ += dj * dir * tau;
            }

            // anti-cycling: Bland's rule after a long spell without progress
            if (obj_ < stall_obj - 1e-12 * (1.0 + std::fabs(stall_obj))) {
                stall_obj = obj_;
                stall = 0;
                bland = false;
            } else if (++stall > 2L * (m_ + ncols_)) {
                bland = true;
            }
        }
        throw Error("simplex: pivot limit exceeded");
    }

    void pivot(int r, int enter, double enter_val) {
        double* pr = row_ptr(r);
        const double inv = 1.0 / pr[enter];
        for (int c = 0; c < ncols_; ++c) {
            pr[c] *= inv;
        }
        pr[enter] = 1.0;
        for (int i = 0; i < m_; ++i) {
            if (i == r) {
                continue;
            }
            double* ri = row_ptr(i);
            const double f = ri[enter];
            if (f == 0.0) {
                continue;
            }
            for (int c = 0; c < ncols_; ++c) {
                ri[c] -= f * pr[c];
            }
            ri[enter] = 0.0;
        }
        const double fd = d_[static_cast<size_t>(enter)];
        if (fd != 0.0) {
            for (int c = 0; c < ncols_; ++c) {
                d_[static_cast<size_t>(c)] -= fd * pr[c];
            }
            d_[static_cast<size_t>(enter)] = 0.0;
        }
        basis_[static_cast<size_t>(r)] = enter;
        beta_[static_cast<size_t>(r)] = enter_val;
        state_[static_cast<size_t>(enter)] = kBasic;
    }

    const LinearProgram& lp_;
    SolverOptions opt_;
    int m_ = 0;
    int n_ = 0;
    int ncols_ = 0;
    int first_art_ = 0;
    std::vector<double> tab_;
    std::vector<double> lo_, hi_;
    std::vector<double> cost_;
    std::vector<double> d_;
    std::vector<double> beta_;
    std::vector<int> basis_;
    std::vector<ColState> state_;
    double obj_ = 0.0;
};

inline double objective_value(const LinearProgram& lp, const std::vector<double>& x) {
    double obj = 0.0;
    for (int j = 0; j < lp.num_variables(); ++j) {
        obj += lp.objective_coeff(j) * x[static_cast<size_t>(j)];
    }
    return obj;
}

/// Solves the LP over explicit bound arrays (integrality ignored).
inline Solution solve_with_bounds(const LinearProgram& lp, const std::vector<double>& lower,
                                  const std::vector<double>& upper, const SolverOptions& opt) {
    for (int j = 0; j < lp.num_variables(); ++j) {
        if (lower[static_cast<size_t>(j)] > upper[static_cast<size_t>(j)] + 1e-12) {
            return Solution{SolveStatus::Infeasible, {}, 0.0};
        }
    }
    // trivial presolve: empty constraint rows are either redundant or proof of
    // infeasibility
    for (const auto& c : lp.constraints()) {
        bool empty = true;
        for (const auto& [v, coeff] : c.terms) {
            (void)v;
            if (coeff != 0.0) {
                empty = false;
                break;
            }
        }
        if (empty) {
            const bool ok = c.relation == Relation::Equal ? std::fabs(c.rhs) <= opt.feas_tol
                                                          : c.rhs >= -opt.feas_tol;
            if (!ok) {
                return Solution{SolveStatus::Infeasible, {}, 0.0};
            }
        }
    }
    SimplexTableau tab(lp, lower, upper, opt);
    const SolveStatus status = tab.run();
    Solution sol;
    sol.status = status;
    if (status != SolveStatus::Optimal) {
        return sol;
    }
    sol.values = tab.extract();
    for (double& v : sol.values) {
        if (std::fabs(v) < 1e-11) {
            v = 0.0;
        }
    }
    sol.objective = objective_value(lp, sol.values);
    const double viol = max_constraint_violation(lp, sol.values);
    if (viol > 100.0 * opt.feas_tol) {
        throw Error("simplex: solution fails feasibility check (violation " +
                    std::to_string(viol) + ")");
    }
    return sol;
}

} // namespace detail

/// Solves a pure LP (no binaries) with the two-phase dense simplex.
inline Solution solve_lp(const LinearProgram& lp, const SolverOptions& opt = {}) {
    lp.validate();
    if (lp.has_binaries()) {
        throw InvalidModel("solve_lp: program has binary variables, use solve_milp");
    }
    std::vector<double> lo, hi;
    lo.reserve(static_cast<size_t>(lp.num_variables()));
    hi.reserve(static_cast<size_t>(lp.num_variables()));
    for (const auto& v : lp.variables()) {
        lo.push_back(v.lower);
        hi.push_back(v.upper);
    }
    return detail::solve_with_bounds(lp, lo, hi, opt);
}

/// Best-first branch and bound on the binary variables, branching on the most
/// fractional one. Nodes whose relaxation cannot beat the incumbent are
/// pruned; a rounding pass on each relaxation supplies incumbents early.
inline Solution solve_milp(const LinearProgram& lp, const SolverOptions& opt = {}) {
    lp.validate();
    std::vector<int> binaries;
    for (int j = 0; j < lp.num_variables(); ++j) {
        if (lp.variable(j).is_binary) {
            binaries.push_back(j);
        }
    }
    std::vector<double> lo, hi;
    for (const auto& v : lp.variables()) {
        lo.push_back(v.lower);
        hi.push_back(v.upper);
    }
    Solution root = detail::solve_with_bounds(lp, lo, hi, opt);
    if (root.status != SolveStatus::Optimal || binaries.empty()) {
        return root;
    }

    struct Node {
        double bound;
        long id;
        Solution sol;
        std::vector<double> lo, hi;
    };
    auto cmp = [](const Node& a, const Node& b) {
        if (a.bound != b.bound) {
            return a.bound > b.bound; // min-heap on bound
        }
        return a.id > b.id;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(cmp)> open(cmp);

    std::optional<Solution> incumbent;
    double incumbent_obj = kInfinity;
    long next_id = 0;
    int solved_nodes = 1;

    auto fractional_binaries = [&](const Solution& s) {
        std::vector<int> frac;
        for (int b : binaries) {
            const double v = s.values[static_cast<size_t>(b)];
            if (std::fabs(v - std::round(v)) > opt.int_tol) {
                frac.push_back(b);
            }
        }
        return frac;
    };

    auto try_offer = [&](Solution cand) {
        for (int b : binaries) {
            cand.values[static_cast<size_t>(b)] = std::round(cand.values[static_cast<size_t>(b)]);
        }
        if (max_constraint_violation(lp, cand.values) > opt.feas_tol) {
            return;
        }
        cand.objective = detail::objective_value(lp, cand.values);
        if (cand.objective < incumbent_obj - 1e-12) {
            incumbent_obj = cand.objective;
            incumbent = std::move(cand);
        }
    };

    open.push(Node{root.objective, next_id++, std::move(root), lo, hi});
    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (node.bound >= incumbent_obj - 1e-9) {
            continue; // cannot improve on the incumbent
        }
        const auto frac = fractional_binaries(node.sol);
        if (frac.empty()) {
            try_offer(node.sol);
            continue;
        }
        try_offer(node.sol);
        if (node.bound >= incumbent_obj - 1e-9) {
            continue; // rounding already achieved this node's bound
        }
        // branch on the most fractional binary
        int branch_var = frac.front();
        double best_frac = -1.0;
        for (int b : frac) {
            const double v = node.sol.values[static_cast<size_t>(b)];
            const double f = std::min(v - std::floor(v), std::ceil(v) - v);
            if (f > best_frac + 1e-15) {
                best_frac = f;
                branch_var = b;
            }
        }
        for (int side = 0; side < 2; ++side) {
            if (solved_nodes >= opt.max_nodes) {
                throw ResourceExhausted("solve_milp: node limit of " +
                                            std::to_string(opt.max_nodes) + " exceeded",
                                        incumbent);
            }
            Node child;
            child.lo = node.lo;
            child.hi = node.hi;
            child.lo[static_cast<size_t>(branch_var)] = side == 0 ? 0.0 : 1.0;
            child.hi[static_cast<size_t>(branch_var)] = side == 0 ? 0.0 : 1.0;
            Solution s = detail::solve_with_bounds(lp, child.lo, child.hi, opt);
            ++solved_nodes;
            if (s.status == SolveStatus::Unbounded) {
                return s;
            }
            if (s.status != SolveStatus::Optimal) {
                continue;
            }
            if (s.objective >= incumbent_obj - 1e-9) {
                continue;
            }
            child.bound = s.objective;
            child.id = next_id++;
            child.sol = std::move(s);
            open.push(std::move(child));
        }
    }
    if (!incumbent) {
        return Solution{SolveStatus::Infeasible, {}, 0.0};
    }
    return *incumbent;
}

} // namespace bessctl
