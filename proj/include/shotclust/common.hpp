#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace shotclust {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using IMat = Eigen::MatrixXi;
using Index = Eigen::Index;

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid parameter or dimension mismatch (CLI exit code 1).
struct param_error : error {
    using error::error;
};

/// File, format, or configuration problem (CLI exit code 2).
struct io_error : error {
    using error::error;
};

/// Numerical failure: divergence, non-finite state (CLI exit code 1).
struct numeric_error : error {
    using error::error;
};

inline double clamp_lp(double lp, double bound = 30.0)
{
    return lp > bound ? bound : (lp < -bound ? -bound : lp);
}

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b)
{
    if (a < b)
        std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity())
        return a;
    return a + std::log1p(std::exp(b - a));
}

} // namespace shotclust
