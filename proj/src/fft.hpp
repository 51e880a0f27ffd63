#pragma once

#include <Eigen/Dense>
#include <complex>

namespace nsci::detail {

// Unnormalized 3D real-to-complex and complex-to-real transforms of an n^3
// grid. Plans are cached per n; execution is thread-safe.
void r2c(int n, const double* in, std::complex<double>* out);
void c2r(int n, const std::complex<double>* in, double* out);

// Signed wavenumber arrays over the half-spectrum of an n^3 grid. Nyquist
// entries are zero so that derivative multipliers vanish there.
struct Waves {
    Eigen::ArrayXd k[3];
    Eigen::ArrayXd k2;          // |k|^2
    Eigen::ArrayXd inv_k2;      // 1/|k|^2, zero where |k|^2 = 0
    Eigen::ArrayXd weight;      // Parseval multiplicity (1 or 2)
    Eigen::Array<bool, Eigen::Dynamic, 1> nyquist;
    Eigen::ArrayXi kmax;        // max_i |k_i| including the Nyquist index
};

const Waves& waves(int n);

}  // namespace nsci::detail
