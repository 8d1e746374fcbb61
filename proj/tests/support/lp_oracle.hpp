#pragma once

// Brute-force optimization oracles for tests. These deliberately avoid the
// simplex code path: LPs are solved by enumerating candidate vertices
// (intersections of n active hyperplanes) and MILPs by enumerating every
// binary assignment.

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "bessctl/lp.hpp"
#include "bessctl/solver.hpp"

namespace oracle {

struct Hyperplane {
    std::vector<double> a;
    double b = 0.0;
};

struct OracleResult {
    bool feasible = false;
    double objective = std::numeric_limits<double>::infinity();
    std::vector<double> argmin;
};

inline bool gauss_solve(std::vector<std::vector<double>> A, std::vector<double> b,
                        std::vector<double>& x) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) {
                piv = r;
            }
        }
        if (std::fabs(A[piv][col]) < 1e-10) {
            return false;
        }
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (int r = 0; r < n; ++r) {
            if (r == col) {
                continue;
            }
            const double f = A[r][col] / A[col][col];
            if (f == 0.0) {
                continue;
            }
            for (int c = col; c < n; ++c) {
                A[r][c] -= f * A[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    x.resize(n);
    for (int i = 0; i < n; ++i) {
        x[i] = b[i] / A[i][i];
    }
    return true;
}

/// Minimizes an LP by enumerating all vertices of the feasible polytope.
/// Assumes every variable carries finite bounds so the region is bounded.
inline OracleResult enumerate_vertices(const bessctl::LinearProgram& lp) {
    using bessctl::Relation;
    const int n = lp.num_variables();

    std::vector<Hyperplane> mandatory; // equalities: active at every feasible point
    std::vector<Hyperplane> optional_planes;
    std::vector<Hyperplane> ineqs; // all inequalities for feasibility checks (a.x <= b)

    for (const auto& c : lp.constraints()) {
        Hyperplane h;
        h.a.assign(static_cast<size_t>(n), 0.0);
        for (const auto& [v, coeff] : c.terms) {
            h.a[static_cast<size_t>(v)] += coeff;
        }
        h.b = c.rhs;
        if (c.relation == Relation::Equal) {
            mandatory.push_back(h);
        } else {
            optional_planes.push_back(h);
            ineqs.push_back(h);
        }
    }
    for (int j = 0; j < n; ++j) {
        const auto& v = lp.variable(j);
        Hyperplane up;
        up.a.assign(static_cast<size_t>(n), 0.0);
        up.a[static_cast<size_t>(j)] = 1.0;
        up.b = v.upper;
        Hyperplane lo;
        lo.a.assign(static_cast<size_t>(n), 0.0);
        lo.a[static_cast<size_t>(j)] = -1.0;
        lo.b = -v.lower;
        if (std::isfinite(v.upper)) {
            optional_planes.push_back(up);
            ineqs.push_back(up);
        }
        if (std::isfinite(v.lower)) {
            optional_planes.push_back(lo);
            ineqs.push_back(lo);
        }
    }

    const int need = n - static_cast<int>(mandatory.size());
    OracleResult result;
    if (need < 0) {
        return result; // overdetermined equality systems are not generated
    }

    auto consider = [&](const std::vector<const Hyperplane*>& active) {
        std::vector<std::vector<double>> A;
        std::vector<double> b;
        for (const auto* h : active) {
            A.push_back(h->a);
            b.push_back(h->b);
        }
        std::vector<double> x;
        if (!gauss_solve(std::move(A), std::move(b), x)) {
            return;
        }
        for (const auto& h : mandatory) {
            double lhs = 0.0;
            for (int j = 0; j < n; ++j) {
                lhs += h.a[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
            }
            if (std::fabs(lhs - h.b) > 1e-7) {
                return;
            }
        }
        for (const auto& h : ineqs) {
            double lhs = 0.0;
            for (int j = 0; j < n; ++j) {
                lhs += h.a[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
            }
            if (lhs > h.b + 1e-7) {
                return;
            }
        }
        double obj = 0.0;
        for (int j = 0; j < n; ++j) {
            obj += lp.objective_coeff(j) * x[static_cast<size_t>(j)];
        }
        if (!result.feasible || obj < result.objective) {
            result.feasible = true;
            result.objective = obj;
            result.argmin = x;
        }
    };

    std::vector<const Hyperplane*> active;
    for (const auto& h : mandatory) {
        active.push_back(&h);
    }
    std::vector<int> idx(static_cast<size_t>(need));
    const int pool = static_cast<int>(optional_planes.size());
    if (need == 0) {
        consider(active);
        return result;
    }
    if (pool < need) {
        return result;
    }
    for (int i = 0; i < need; ++i) {
        idx[static_cast<size_t>(i)] = i;
    }
    while (true) {
        active.resize(mandatory.size());
        for (int i : idx) {
            active.push_back(&optional_planes[static_cast<size_t>(i)]);
        }
        consider(active);
        int pos = need - 1;
        while (pos >= 0 && idx[static_cast<size_t>(pos)] == pool - need + pos) {
            --pos;
        }
        if (pos < 0) {
            break;
        }
        ++idx[static_cast<size_t>(pos)];
        for (int i = pos + 1; i < need; ++i) {
            idx[static_cast<size_t>(i)] = idx[static_cast<size_t>(i - 1)] + 1;
        }
    }
    return result;
}

/// Minimizes a MILP by full enumeration of the binary assignments, each
/// followed by an LP solve on the continuous remainder.
inline OracleResult enumerate_binaries(const bessctl::LinearProgram& lp,
                                       const bessctl::SolverOptions& opt = {}) {
    std::vector<int> binaries;
    for (int j = 0; j < lp.num_variables(); ++j) {
        if (lp.variable(j).is_binary) {
            binaries.push_back(j);
        }
    }
    OracleResult result;
    const int nb = static_cast<int>(binaries.size());
    for (unsigned mask = 0; mask < (1u << nb); ++mask) {
        bessctl::LinearProgram fixed = lp;
        for (int i = 0; i < nb; ++i) {
            auto& v = fixed.variable(binaries[static_cast<size_t>(i)]);
            v.is_binary = false;
            const double val = (mask >> i) & 1u ? 1.0 : 0.0;
            v.lower = val;
            v.upper = val;
        }
        const auto sol = bessctl::solve_lp(fixed, opt);
        if (sol.status != bessctl::SolveStatus::Optimal) {
            continue;
        }
        if (!result.feasible || sol.objective < result.objective) {
            result.feasible = true;
            result.objective = sol.objective;
            result.argmin = sol.values;
        }
    }
    return result;
}

/// Random LP with finite box bounds, guaranteed feasible: every constraint is
/// placed on the far side of a randomly chosen interior point.
inline bessctl::LinearProgram random_feasible_lp(std::mt19937& rng, int max_vars = 6,
                                                 int max_rows = 8, bool allow_equalities = true) {
    using bessctl::LinearProgram;
    using bessctl::Relation;
    std::uniform_real_distribution<double> lo_d(-5.0, 0.0);
    std::uniform_real_distribution<double> width_d(0.5, 8.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> coeff_d(-3, 3);
    std::uniform_real_distribution<double> margin_d(0.1, 5.0);
    std::uniform_real_distribution<double> cost_d(-2.0, 2.0);

    const int n = 2 + static_cast<int>(rng() % static_cast<unsigned>(max_vars - 1));
    const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_rows));

    LinearProgram lp;
    std::vector<double> x0(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double lo = lo_d(rng);
        const double hi = lo + width_d(rng);
        lp.add_variable("x" + std::to_string(j), lo, hi);
        x0[static_cast<size_t>(j)] = lo + unit(rng) * (hi - lo);
        lp.set_objective(j, cost_d(rng));
    }
    bool used_equality = false; // one equality at most keeps the vertex oracle's
                                // mandatory active set full-rank
    for (int i = 0; i < m; ++i) {
        std::vector<std::pair<int, double>> terms;
        double ax0 = 0.0;
        bool nonzero = false;
        for (int j = 0; j < n; ++j) {
            const int c = coeff_d(rng);
            if (c != 0) {
                terms.emplace_back(j, static_cast<double>(c));
                ax0 += c * x0[static_cast<size_t>(j)];
                nonzero = true;
            }
        }
        if (!nonzero) {
            terms.emplace_back(0, 1.0);
            ax0 = x0[0];
        }
        const bool eq = allow_equalities && !used_equality && unit(rng) < 0.25;
        if (eq) {
            used_equality = true;
            lp.add_constraint(std::move(terms), Relation::Equal, ax0);
        } else {
            lp.add_constraint(std::move(terms), Relation::LessEqual, ax0 + margin_d(rng));
        }
    }
    return lp;
}

} // namespace oracle
