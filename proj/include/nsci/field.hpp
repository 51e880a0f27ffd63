#pragma once

#include "nsci/linalg.hpp"

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstddef>

namespace nsci {

using cplx = std::complex<double>;

// Uniform grid on the torus [0, 2pi)^3 with n points per axis. Real samples
// are stored row-major with x1 slowest; Fourier coefficients use the r2c
// half-spectrum layout (n, n, n/2 + 1). Fields carry only the modes with
// |k_i| <= n/2 - 1; Nyquist modes are always zero.
struct Grid {
    int n = 0;

    int nk() const { return n / 2 + 1; }
    std::size_t real_size() const { return std::size_t(n) * n * n; }
    std::size_t spec_size() const { return std::size_t(n) * n * nk(); }
    double h() const;
    double x(int i) const { return h() * i; }
    std::size_t index(int i0, int i1, int i2) const {
        return (std::size_t(i0) * n + i1) * n + i2;
    }
    bool operator==(const Grid& o) const { return n == o.n; }
};

// Throws Error(config) unless n >= 8 is a power of two.
Grid make_grid(int n);
void require_same_grid(const Grid& a, const Grid& b);

using Samples = Eigen::ArrayXd;
using Coeffs = Eigen::ArrayXcd;

// Periodic real field with C components carried as normalized Fourier
// coefficients, f(x) = sum_k c_k exp(i k.x).
template <int C>
struct Field {
    Grid grid;
    std::array<Coeffs, C> c;

    Field() = default;
    explicit Field(const Grid& g) : grid(g) {
        for (auto& a : c) a = Coeffs::Zero(static_cast<Eigen::Index>(g.spec_size()));
    }

    Field& operator+=(const Field& o) {
        require_same_grid(grid, o.grid);
        for (int i = 0; i < C; ++i) c[i] += o.c[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        require_same_grid(grid, o.grid);
        for (int i = 0; i < C; ++i) c[i] -= o.c[i];
        return *this;
    }
    Field& operator*=(double s) {
        for (auto& a : c) a *= s;
        return *this;
    }
};

using ScalarField = Field<1>;
using VectorField = Field<3>;
using SymTensorField = Field<6>;

template <int C>
Field<C> operator+(Field<C> a, const Field<C>& b) { return a += b; }
template <int C>
Field<C> operator-(Field<C> a, const Field<C>& b) { return a -= b; }
template <int C>
Field<C> operator*(double s, Field<C> a) { return a *= s; }
template <int C>
Field<C> operator-(Field<C> a) { return a *= -1.0; }

// Transforms between coefficients and real samples on the field's grid.
Samples to_real(const Grid& g, const Coeffs& coeffs);
Coeffs to_spectral(const Grid& g, const Samples& values);
template <int C>
std::array<Samples, C> samples(const Field<C>& f);
template <int C>
Field<C> from_samples(const Grid& g, const std::array<Samples, C>& s);
ScalarField from_samples(const Grid& g, const Samples& s);

// Coefficient copy between grids; modes absent on the target are dropped.
Coeffs resample(const Grid& from, const Coeffs& c, const Grid& to);
template <int C>
Field<C> resample(const Field<C>& f, const Grid& to);
Grid padded_grid(const Grid& g);
Grid refined_grid(const Grid& g);

// Spectral calculus.
ScalarField partial(const ScalarField& f, int axis);
VectorField grad(const ScalarField& f);
ScalarField div(const VectorField& v);
VectorField div_tensor(const SymTensorField& S);
VectorField curl(const VectorField& v);
template <int C>
Field<C> laplacian(const Field<C>& f);
VectorField helmholtz(const VectorField& v);
template <int C>
Field<C> project_nonzero(const Field<C>& f);
// Throws Error(nonzero-mean) when the mean exceeds 1e-12 of the sup norm.
template <int C>
Field<C> inv_laplacian(const Field<C>& f);
SymTensorField reynolds(const VectorField& v);
ScalarField pressure_from_velocity(const VectorField& v);
// div div S as a scalar field.
ScalarField div_div(const SymTensorField& S);

// Dealiased products: operands are evaluated on the 3n/2 grid, multiplied
// and truncated back to the modes of the original grid.
ScalarField product(const ScalarField& a, const ScalarField& b);
VectorField product(const ScalarField& a, const VectorField& v);
SymTensorField product(const ScalarField& a, const SymTensorField& S);
ScalarField dot(const VectorField& a, const VectorField& b);
VectorField cross(const VectorField& a, const VectorField& b);
SymTensorField sym_outer(const VectorField& a, const VectorField& b);  // (a(x)b + b(x)a)/2
SymTensorField outer_self(const VectorField& a);

SymTensorField traceless_part(const SymTensorField& S);
ScalarField trace(const SymTensorField& S);
SymTensorField times_identity(const ScalarField& f);
SymTensorField scaled_tensor(const ScalarField& f, const Eigen::Matrix3d& m);  // f (m + m^T)/2
VectorField times_vector(const ScalarField& f, const Eigen::Vector3d& xi);

ScalarField component(const VectorField& v, int i);
ScalarField component(const SymTensorField& S, int slot);
VectorField assemble(const ScalarField& a, const ScalarField& b, const ScalarField& c);

template <int C>
std::array<double, C> mean(const Field<C>& f);
template <int C>
Field<C> constant_field(const Grid& g, const std::array<double, C>& values);

// Largest |k_i| carried by a coefficient above rel_tol times the largest one.
template <int C>
int bandwidth(const Field<C>& f, double rel_tol = 1e-13);

// Pointwise magnitude on the field's grid: |.| for scalars, Euclidean for
// vectors, Frobenius for symmetric tensors.
template <int C>
Samples pointwise_norm(const Field<C>& f);

// Norms over the torus of volume (2 pi)^3. Finite p uses the uniform-grid
// rule; p = infinity and C^N use a twice-refined grid.
template <int C>
double lp_norm(const Field<C>& f, double p);
template <int C>
double linf_norm(const Field<C>& f);
template <int C>
double grid_max_abs(const Field<C>& f);
template <int C>
double c_norm(const Field<C>& f, int order);
// sqrt((2 pi)^3 sum |c_k|^2)
template <int C>
double l2_parseval(const Field<C>& f);
// (2 pi)^3 sum_k conj(a_k) b_k summed over components.
template <int C>
double inner(const Field<C>& a, const Field<C>& b);
double integral(const ScalarField& f);
double integral_of_samples(const Grid& g, const Samples& s);

// Random real field whose modes satisfy |k_i| <= kmax, coefficients drawn
// from a seeded normal distribution.
template <int C>
Field<C> random_field(const Grid& g, int kmax, unsigned long long seed);

}  // namespace nsci
