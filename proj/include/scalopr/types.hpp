#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace scalopr {

template <typename Real>
using SignalT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RealVectorT = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Real = double;
using Complex = std::complex<double>;

/// Time-domain samples f[n], n = 0..N-1.
using Signal = SignalT<double>;
/// DFT bins f^[k], k = 0..N-1 (same storage as Signal, different role).
using Spectrum = SignalT<double>;

using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Per-scale list, indexed by scale j = 0..J.
using SignalList = std::vector<Signal>;

}  // namespace scalopr
