#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "bessctl/errors.hpp"

namespace bessctl {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal };

enum class SolveStatus { Optimal, Infeasible, Unbounded };

inline const char* status_name(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    }
    return "?";
}

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInfinity;
    bool is_binary = false;
};

struct Constraint {
    std::vector<std::pair<int, double>> terms; // (variable index, coefficient)
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

/// Minimization linear program with bounded continuous and binary variables.
class LinearProgram {
public:
    int add_variable(std::string name, double lower, double upper) {
        if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
            throw InvalidModel("variable '" + name + "': invalid bounds");
        }
        variables_.push_back({std::move(name), lower, upper, false});
        objective_.push_back(0.0);
        return static_cast<int>(variables_.size()) - 1;
    }

    int add_binary(std::string name) {
        variables_.push_back({std::move(name), 0.0, 1.0, true});
        objective_.push_back(0.0);
        return static_cast<int>(variables_.size()) - 1;
    }

    void add_constraint(std::vector<std::pair<int, double>> terms, Relation rel, double rhs) {
        if (!std::isfinite(rhs)) {
            throw InvalidModel("constraint rhs must be finite");
        }
        Constraint c{std::move(terms), rel, rhs};
        for (const auto& [v, coeff] : c.terms) {
            if (v < 0 || v >= num_variables()) {
                throw InvalidModel("constraint references undeclared variable");
            }
            if (!std::isfinite(coeff)) {
                throw InvalidModel("constraint coefficient must be finite");
            }
        }
        constraints_.push_back(std::move(c));
    }

    void set_objective(int var, double coeff) {
        if (var < 0 || var >= num_variables()) {
            throw InvalidModel("objective references undeclared variable");
        }
        if (!std::isfinite(coeff)) {
            throw InvalidModel("objective coefficient must be finite");
        }
        objective_[static_cast<size_t>(var)] = coeff;
    }

    void add_objective(int var, double coeff) {
        set_objective(var, objective_[static_cast<size_t>(var)] + coeff);
    }

    /// Fixes a variable to a single value by collapsing its bounds.
    void fix_variable(int var, double value) {
        auto& v = variables_.at(static_cast<size_t>(var));
        v.lower = value;
        v.upper = value;
    }

    int num_variables() const { return static_cast<int>(variables_.size()); }
    int num_constraints() const { return static_cast<int>(constraints_.size()); }
    bool has_binaries() const {
        for (const auto& v : variables_) {
            if (v.is_binary) {
                return true;
            }
        }
        return false;
    }

    const Variable& variable(int i) const { return variables_.at(static_cast<size_t>(i)); }
    Variable& variable(int i) { return variables_.at(static_cast<size_t>(i)); }
    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    double objective_coeff(int i) const { return objective_.at(static_cast<size_t>(i)); }
    const std::vector<double>& objective() const { return objective_; }

    void validate() const {
        for (const auto& v : variables_) {
            if (v.is_binary && (v.lower < -1e-12 || v.upper > 1.0 + 1e-12)) {
                throw InvalidModel("binary variable '" + v.name + "' has bounds outside [0,1]");
            }
            if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
                throw InvalidModel("variable '" + v.name + "' has invalid bounds");
            }
        }
    }

    /// Plain-text dump (LP file style) for cross-checking against third-party
    /// solvers.
    void write_lp(std::ostream& os) const {
        os << "Minimize\n obj:";
        bool first = true;
        for (int j = 0; j < num_variables(); ++j) {
            const double c = objective_[static_cast<size_t>(j)];
            if (c == 0.0) {
                continue;
            }
            write_term(os, c, variables_[static_cast<size_t>(j)].name, first);
            first = false;
        }
        if (first) {
            os << " 0 " << (variables_.empty() ? "x0" : variables_[0].name);
        }
        os << "\nSubject To\n";
        for (int i = 0; i < num_constraints(); ++i) {
            const auto& c = constraints_[static_cast<size_t>(i)];
            os << " c" << i << ":";
            bool f = true;
            for (const auto& [v, coeff] : c.terms) {
                if (coeff == 0.0) {
                    continue;
                }
                write_term(os, coeff, variables_[static_cast<size_t>(v)].name, f);
                f = false;
            }
            if (f) {
                os << " 0 " << variables_[0].name;
            }
            os << (c.relation == Relation::Equal ? " = " : " <= ") << c.rhs << "\n";
        }
        os << "Bounds\n";
        for (const auto& v : variables_) {
            if (v.lower == 0.0 && v.upper == kInfinity) {
                continue;
            }
            if (v.lower == -kInfinity && v.upper == kInfinity) {
                os << " " << v.name << " free\n";
            } else if (v.lower == -kInfinity) {
                os << " " << v.name << " <= " << v.upper << "\n";
            } else if (v.upper == kInfinity) {
                os << " " << v.name << " >= " << v.lower << "\n";
            } else {
                os << " " << v.lower << " <= " << v.name << " <= " << v.upper << "\n";
            }
        }
        bool any_bin = false;
        for (const auto& v : variables_) {
            if (v.is_binary) {
                if (!any_bin) {
                    os << "Binaries\n";
                    any_bin = true;
                }
                os << " " << v.name << "\n";
            }
        }
        os << "End\n";
    }

private:
    static void write_term(std::ostream& os, double c, const std::string& name, bool first) {
        if (first) {
            os << ' ' << c << ' ' << name;
        } else if (c >= 0) {
            os << " + " << c << ' ' << name;
        } else {
            os << " - " << -c << ' ' << name;
        }
    }

    std::vector<Variable> variables_;
    std::vector<Constraint> constraints_;
    std::vector<double> objective_;
};

struct Solution {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<double> values; // indexed by variable
    double objective = 0.0;

    double value(int var) const { return values.at(static_cast<size_t>(var)); }
};

} // namespace bessctl
