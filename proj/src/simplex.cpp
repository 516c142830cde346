#include "redgraf/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "redgraf/errors.hpp"

namespace redgraf::lp {

namespace {

// Smallest acceptable pivot magnitude.
constexpr double kPivotTol = 1e-9;

class Tableau {
public:
    Tableau(const Matrix& A, const Vector& b) : m_(A.rows()), n_(A.cols()), width_(n_ + m_ + 1) {
        data_.assign(static_cast<std::size_t>((m_ + 1) * width_), 0.0);
        basis_.resize(static_cast<std::size_t>(m_));
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double sign = b[i] < 0.0 ? -1.0 : 1.0;
            for (Eigen::Index j = 0; j < n_; ++j) at(i, j) = sign * A(i, j);
            at(i, n_ + i) = 1.0;
            at(i, width_ - 1) = sign * b[i];
            basis_[static_cast<std::size_t>(i)] = n_ + i;
        }
    }

    double& at(Eigen::Index r, Eigen::Index c) { return data_[static_cast<std::size_t>(r * width_ + c)]; }
    double at(Eigen::Index r, Eigen::Index c) const { return data_[static_cast<std::size_t>(r * width_ + c)]; }
    double& rhs(Eigen::Index r) { return at(r, width_ - 1); }

    // Objective row holds reduced costs; at(m_, width_-1) holds -objective.
    void set_objective(const std::vector<double>& cost) {
        for (Eigen::Index j = 0; j < width_; ++j) at(m_, j) = 0.0;
        for (Eigen::Index j = 0; j + 1 < width_; ++j) at(m_, j) = cost[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double cb = cost[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
            if (cb == 0.0) continue;
            for (Eigen::Index j = 0; j < width_; ++j) at(m_, j) -= cb * at(i, j);
        }
    }

    void pivot(Eigen::Index row, Eigen::Index col) {
        const double inv = 1.0 / at(row, col);
        double* pr = &data_[static_cast<std::size_t>(row * width_)];
        for (Eigen::Index j = 0; j < width_; ++j) pr[j] *= inv;
        pr[col] = 1.0;
        for (Eigen::Index i = 0; i <= m_; ++i) {
            if (i == row) continue;
            double* pi = &data_[static_cast<std::size_t>(i * width_)];
            const double f = pi[col];
            if (f == 0.0) continue;
            for (Eigen::Index j = 0; j < width_; ++j) pi[j] -= f * pr[j];
            pi[col] = 0.0;
        }
        basis_[static_cast<std::size_t>(row)] = col;
    }

    // Runs simplex on the current objective restricted to columns with
    // allowed[j]. Returns false if unbounded.
    bool optimize(const std::vector<char>& allowed, double tol) {
        std::size_t degenerate_run = 0;
        bool bland = false;
        const std::size_t max_iter = 50 * static_cast<std::size_t>(m_ + n_ + 10);
        for (std::size_t iter = 0; iter < max_iter; ++iter) {
            // Once switched, Bland's rule stays on for the rest of this phase.
            bland = bland || degenerate_run > 20;
            Eigen::Index enter = -1;
            double best = -tol;
            for (Eigen::Index j = 0; j + 1 < width_; ++j) {
                if (!allowed[static_cast<std::size_t>(j)]) continue;
                const double rc = at(m_, j);
                if (rc < best) {
                    enter = j;
                    if (bland) break;
                    best = rc;
                }
            }
            if (enter < 0) return true;
            // Harris ratio test: bound the step with slightly relaxed rows,
            // then pick the sturdiest pivot among the rows within that bound.
            double bound = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double a = at(i, enter);
                if (a > kPivotTol) bound = std::min(bound, (std::max(0.0, rhs(i)) + tol) / a);
            }
            Eigen::Index leave = -1;
            double ratio = 0.0;
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double a = at(i, enter);
                if (!(a > kPivotTol)) continue;
                const double q = std::max(0.0, rhs(i)) / a;
                if (q > bound) continue;
                const bool better = leave < 0 || (bland ? basis_[static_cast<std::size_t>(i)] <
                                                              basis_[static_cast<std::size_t>(leave)]
                                                        : a > at(leave, enter));
                if (better) {
                    leave = i;
                    ratio = q;
                }
            }
            if (leave < 0) return false;
            degenerate_run = ratio <= tol ? degenerate_run + 1 : 0;
            pivot(leave, enter);
        }
        throw NumericalError("simplex iteration limit reached", 0.0);
    }

    Vector primal() const {
        Vector x = Vector::Zero(n_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
            if (j < n_) x[j] = std::max(0.0, at(i, width_ - 1));
        }
        return x;
    }

    Eigen::Index m() const { return m_; }
    Eigen::Index n() const { return n_; }
    Eigen::Index width() const { return width_; }
    Eigen::Index basis(Eigen::Index i) const { return basis_[static_cast<std::size_t>(i)]; }
    double objective_value() const { return -at(m_, width_ - 1); }

private:
    Eigen::Index m_, n_, width_;
    std::vector<double> data_;
    std::vector<Eigen::Index> basis_;
};

Result run(const Matrix& A, const Vector& b, const Vector* c, double tol) {
    if (b.size() != A.rows() || (c && c->size() != A.cols())) throw DimensionError("LP shape mismatch");
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    Tableau t(A, b);
    const Eigen::Index n = t.n();
    const Eigen::Index m = t.m();

    std::vector<double> phase1(static_cast<std::size_t>(n + m), 0.0);
    for (Eigen::Index i = 0; i < m; ++i) phase1[static_cast<std::size_t>(n + i)] = 1.0;
    std::vector<char> allowed(static_cast<std::size_t>(n + m), 1);
    t.set_objective(phase1);
    t.optimize(allowed, tol);

    Result res;
    res.infeasibility = std::max(0.0, t.objective_value());
    if (res.infeasibility > tol * scale * static_cast<double>(std::max<Eigen::Index>(1, m))) {
        res.status = Status::infeasible;
        res.x = t.primal();
        return res;
    }
    // Drive remaining artificials out of the basis where possible.
    for (Eigen::Index i = 0; i < m; ++i) {
        if (t.basis(i) < n) continue;
        Eigen::Index col = -1;
        double best = kPivotTol;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::abs(t.at(i, j)) > best) {
                best = std::abs(t.at(i, j));
                col = j;
            }
        }
        if (col >= 0) t.pivot(i, col);
    }
    for (Eigen::Index j = n; j < n + m; ++j) allowed[static_cast<std::size_t>(j)] = 0;

    if (c) {
        std::vector<double> cost(static_cast<std::size_t>(n + m), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) cost[static_cast<std::size_t>(j)] = (*c)[j];
        t.set_objective(cost);
        if (!t.optimize(allowed, tol)) {
            res.status = Status::unbounded;
            res.x = t.primal();
            return res;
        }
    }
    res.status = Status::optimal;
    res.x = t.primal();
    res.objective = c ? c->dot(res.x) : 0.0;
    return res;
}

}  // namespace

Result solve(const Matrix& A, const Vector& b, const Vector& c, double tol) { return run(A, b, &c, tol); }

Result feasible_point(const Matrix& A, const Vector& b, double tol) { return run(A, b, nullptr, tol); }

}  // namespace redgraf::lp
