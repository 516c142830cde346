#pragma once

#include <initializer_list>

#include "redgraf/types.hpp"

namespace redgraf::test {

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

inline Vector scalar(double v) { return vec({v}); }

}  // namespace redgraf::test
