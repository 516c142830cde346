#pragma once

#include "redgraf/types.hpp"

namespace redgraf::lp {

enum class Status { optimal, infeasible, unbounded };

struct Result {
    Status status = Status::infeasible;
    Vector x;
    double objective = 0.0;
    /// Phase-one residual: sum of artificial variables at the end of phase one.
    double infeasibility = 0.0;
};

/// Dense two-phase simplex for  min c^T x  s.t.  A x = b, x >= 0.
/// Dantzig pricing and a two-pass Harris ratio test; after a run of degenerate
/// pivots Bland's rule takes over for the rest of the phase. `tol` is the
/// pricing and feasibility tolerance, feasibility scaled by the magnitude of b.
Result solve(const Matrix& A, const Vector& b, const Vector& c, double tol = 1e-10);

/// Feasibility only (phase one).
Result feasible_point(const Matrix& A, const Vector& b, double tol = 1e-10);

}  // namespace redgraf::lp
