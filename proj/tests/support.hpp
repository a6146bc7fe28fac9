#pragma once

#include "proxlab/numerics.hpp"

#include <initializer_list>

inline proxlab::Vector vec(std::initializer_list<double> v) {
    proxlab::Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

inline proxlab::Vector scalar(double x) { return proxlab::Vector::Constant(1, x); }
