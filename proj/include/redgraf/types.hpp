#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace redgraf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Agents are numbered 0..N-1.
using AgentId = std::size_t;

/// Sorted, duplicate-free list of agent ids.
using IdSet = std::vector<AgentId>;

/// Axis-aligned box [lo, hi] in R^d.
struct Box {
    Vector lo;
    Vector hi;
};

}  // namespace redgraf
