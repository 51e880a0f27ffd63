#include "nsci/field.hpp"

#include "fft.hpp"
#include "nsci/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace nsci {

namespace {

using detail::waves;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kVolume = kTwoPi * kTwoPi * kTwoPi;
const cplx I(0.0, 1.0);

template <int C>
constexpr double comp_weight(int i) {
    if constexpr (C == 6) return kSymWeight[i];
    return 1.0;
}

Coeffs zero_nyquist(const Grid& g, Coeffs c) {
    const auto& w = waves(g.n);
    for (Eigen::Index i = 0; i < c.size(); ++i)
        if (w.nyquist(i)) c(i) = 0.0;
    return c;
}

// Pads every coefficient array to the 3n/2 grid and returns real samples.
template <std::size_t K>
std::array<Samples, K> pad_all(const Grid& g, const std::array<const Coeffs*, K>& cs) {
    Grid p = padded_grid(g);
    std::array<Samples, K> out;
    for (std::size_t i = 0; i < K; ++i) out[i] = to_real(p, resample(g, *cs[i], p));
    return out;
}

Coeffs truncate(const Grid& g, const Samples& padded) {
    Grid p = padded_grid(g);
    return resample(p, to_spectral(p, padded), g);
}

}  // namespace

double Grid::h() const { return kTwoPi / n; }

Grid make_grid(int n) {
    if (n < 8 || (n & (n - 1)) != 0)
        throw Error(err::config, "grid size must be a power of two and at least 8");
    return Grid{n};
}

void require_same_grid(const Grid& a, const Grid& b) {
    if (!(a == b))
        throw Error(err::grid_mismatch,
                    "fields live on grids " + std::to_string(a.n) + " and " + std::to_string(b.n));
}

Samples to_real(const Grid& g, const Coeffs& coeffs) {
    Samples out(static_cast<Eigen::Index>(g.real_size()));
    detail::c2r(g.n, coeffs.data(), out.data());
    return out;
}

Coeffs to_spectral(const Grid& g, const Samples& values) {
    if (values.size() != static_cast<Eigen::Index>(g.real_size()))
        throw Error(err::grid_mismatch, "sample count does not match grid");
    Coeffs out(static_cast<Eigen::Index>(g.spec_size()));
    detail::r2c(g.n, values.data(), out.data());
    out /= static_cast<double>(g.real_size());
    return zero_nyquist(g, std::move(out));
}

template <int C>
std::array<Samples, C> samples(const Field<C>& f) {
    std::array<Samples, C> out;
    for (int i = 0; i < C; ++i) out[i] = to_real(f.grid, f.c[i]);
    return out;
}

template <int C>
Field<C> from_samples(const Grid& g, const std::array<Samples, C>& s) {
    Field<C> f;
    f.grid = g;
    for (int i = 0; i < C; ++i) f.c[i] = to_spectral(g, s[i]);
    return f;
}

ScalarField from_samples(const Grid& g, const Samples& s) {
    return from_samples<1>(g, std::array<Samples, 1>{s});
}

Coeffs resample(const Grid& from, const Coeffs& c, const Grid& to) {
    if (from == to) return c;
    Coeffs out = Coeffs::Zero(static_cast<Eigen::Index>(to.spec_size()));
    const int m = std::min(from.n, to.n) / 2 - 1;  // largest |k| kept
    auto src = [&](int k) { return k >= 0 ? k : k + from.n; };
    auto dst = [&](int k) { return k >= 0 ? k : k + to.n; };
    for (int a = -m; a <= m; ++a)
        for (int b = -m; b <= m; ++b) {
            std::size_t s0 = (std::size_t(src(a)) * from.n + src(b)) * from.nk();
            std::size_t d0 = (std::size_t(dst(a)) * to.n + dst(b)) * to.nk();
            for (int k = 0; k <= m; ++k) out(Eigen::Index(d0 + k)) = c(Eigen::Index(s0 + k));
        }
    return out;
}

template <int C>
Field<C> resample(const Field<C>& f, const Grid& to) {
    Field<C> out;
    out.grid = to;
    for (int i = 0; i < C; ++i) out.c[i] = resample(f.grid, f.c[i], to);
    return out;
}

Grid padded_grid(const Grid& g) { return Grid{3 * g.n / 2}; }
Grid refined_grid(const Grid& g) { return Grid{2 * g.n}; }

ScalarField partial(const ScalarField& f, int axis) {
    const auto& w = waves(f.grid.n);
    ScalarField out;
    out.grid = f.grid;
    out.c[0] = f.c[0] * (I * w.k[axis]);
    return out;
}

VectorField grad(const ScalarField& f) {
    const auto& w = waves(f.grid.n);
    VectorField out;
    out.grid = f.grid;
    for (int i = 0; i < 3; ++i) out.c[i] = f.c[0] * (I * w.k[i]);
    return out;
}

ScalarField div(const VectorField& v) {
    const auto& w = waves(v.grid.n);
    ScalarField out(v.grid);
    for (int i = 0; i < 3; ++i) out.c[0] += v.c[i] * (I * w.k[i]);
    return out;
}

VectorField div_tensor(const SymTensorField& S) {
    const auto& w = waves(S.grid.n);
    VectorField out(S.grid);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.c[i] += S.c[sym_slot(i, j)] * (I * w.k[j]);
    return out;
}

ScalarField div_div(const SymTensorField& S) { return div(div_tensor(S)); }

VectorField curl(const VectorField& v) {
    const auto& w = waves(v.grid.n);
    VectorField out;
    out.grid = v.grid;
    for (int i = 0; i < 3; ++i) {
        int j = (i + 1) % 3, k = (i + 2) % 3;
        out.c[i] = I * (w.k[j] * v.c[k] - w.k[k] * v.c[j]);
    }
    return out;
}

template <int C>
Field<C> laplacian(const Field<C>& f) {
    const auto& w = waves(f.grid.n);
    Field<C> out;
    out.grid = f.grid;
    for (int i = 0; i < C; ++i) out.c[i] = -f.c[i] * w.k2;
    return out;
}

VectorField helmholtz(const VectorField& v) {
    const auto& w = waves(v.grid.n);
    Coeffs kv = Coeffs::Zero(v.c[0].size());
    for (int i = 0; i < 3; ++i) kv += w.k[i] * v.c[i];
    VectorField out;
    out.grid = v.grid;
    for (int i = 0; i < 3; ++i) out.c[i] = v.c[i] - w.k[i] * kv * w.inv_k2;
    return out;
}

template <int C>
Field<C> project_nonzero(const Field<C>& f) {
    Field<C> out = f;
    for (auto& a : out.c) a(0) = 0.0;
    return out;
}

template <int C>
Field<C> inv_laplacian(const Field<C>& f) {
    double sup = grid_max_abs(f);
    for (int i = 0; i < C; ++i)
        if (std::abs(f.c[i](0)) > 1e-12 * std::max(sup, 1e-300) && std::abs(f.c[i](0)) > 0.0)
            throw Error(err::nonzero_mean, "inverse Laplacian needs a zero-mean input");
    const auto& w = waves(f.grid.n);
    Field<C> out;
    out.grid = f.grid;
    for (int i = 0; i < C; ++i) out.c[i] = -f.c[i] * w.inv_k2;
    return out;
}

SymTensorField reynolds(const VectorField& v) {
    const auto& w = waves(v.grid.n);
    // wv = Delta^{-1} P_{!=0} v, u = P_H wv.
    VectorField wv;
    wv.grid = v.grid;
    for (int i = 0; i < 3; ++i) wv.c[i] = -v.c[i] * w.inv_k2;
    VectorField u = helmholtz(wv);
    Coeffs divw = Coeffs::Zero(v.c[0].size());
    for (int i = 0; i < 3; ++i) divw += I * w.k[i] * wv.c[i];
    SymTensorField R;
    R.grid = v.grid;
    for (int a = 0; a < 6; ++a) {
        int i = kSymIndex[a][0], j = kSymIndex[a][1];
        Coeffs du = I * (w.k[j] * u.c[i] + w.k[i] * u.c[j]);
        Coeffs dw = I * (w.k[j] * wv.c[i] + w.k[i] * wv.c[j]);
        R.c[a] = 0.25 * du + 0.75 * dw;
        if (i == j) R.c[a] -= 0.5 * divw;
    }
    return R;
}

ScalarField pressure_from_velocity(const VectorField& v) {
    SymTensorField T = outer_self(v);
    const auto& w = waves(v.grid.n);
    ScalarField p(v.grid);
    for (int a = 0; a < 6; ++a) {
        int i = kSymIndex[a][0], j = kSymIndex[a][1];
        p.c[0] -= kSymWeight[a] * w.k[i] * w.k[j] * T.c[a] * w.inv_k2;
    }
    return p;
}

ScalarField product(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid);
    auto s = pad_all<2>(a.grid, {&a.c[0], &b.c[0]});
    ScalarField out;
    out.grid = a.grid;
    out.c[0] = truncate(a.grid, s[0] * s[1]);
    return out;
}

VectorField product(const ScalarField& a, const VectorField& v) {
    require_same_grid(a.grid, v.grid);
    auto s = pad_all<4>(a.grid, {&a.c[0], &v.c[0], &v.c[1], &v.c[2]});
    VectorField out;
    out.grid = a.grid;
    for (int i = 0; i < 3; ++i) out.c[i] = truncate(a.grid, s[0] * s[i + 1]);
    return out;
}

SymTensorField product(const ScalarField& a, const SymTensorField& S) {
    require_same_grid(a.grid, S.grid);
    Grid p = padded_grid(a.grid);
    Samples as = to_real(p, resample(a.grid, a.c[0], p));
    SymTensorField out;
    out.grid = a.grid;
    for (int i = 0; i < 6; ++i)
        out.c[i] = truncate(a.grid, as * to_real(p, resample(a.grid, S.c[i], p)));
    return out;
}

ScalarField dot(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid);
    auto s = pad_all<6>(a.grid, {&a.c[0], &a.c[1], &a.c[2], &b.c[0], &b.c[1], &b.c[2]});
    ScalarField out;
    out.grid = a.grid;
    out.c[0] = truncate(a.grid, s[0] * s[3] + s[1] * s[4] + s[2] * s[5]);
    return out;
}

VectorField cross(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid);
    auto s = pad_all<6>(a.grid, {&a.c[0], &a.c[1], &a.c[2], &b.c[0], &b.c[1], &b.c[2]});
    VectorField out;
    out.grid = a.grid;
    for (int i = 0; i < 3; ++i) {
        int j = (i + 1) % 3, k = (i + 2) % 3;
        out.c[i] = truncate(a.grid, s[j] * s[3 + k] - s[k] * s[3 + j]);
    }
    return out;
}

SymTensorField sym_outer(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid);
    auto s = pad_all<6>(a.grid, {&a.c[0], &a.c[1], &a.c[2], &b.c[0], &b.c[1], &b.c[2]});
    SymTensorField out;
    out.grid = a.grid;
    for (int m = 0; m < 6; ++m) {
        int i = kSymIndex[m][0], j = kSymIndex[m][1];
        out.c[m] = truncate(a.grid, 0.5 * (s[i] * s[3 + j] + s[j] * s[3 + i]));
    }
    return out;
}

SymTensorField outer_self(const VectorField& a) {
    auto s = pad_all<3>(a.grid, {&a.c[0], &a.c[1], &a.c[2]});
    SymTensorField out;
    out.grid = a.grid;
    for (int m = 0; m < 6; ++m) out.c[m] = truncate(a.grid, s[kSymIndex[m][0]] * s[kSymIndex[m][1]]);
    return out;
}

ScalarField trace(const SymTensorField& S) {
    ScalarField out;
    out.grid = S.grid;
    out.c[0] = S.c[0] + S.c[3] + S.c[5];
    return out;
}

SymTensorField traceless_part(const SymTensorField& S) {
    SymTensorField out = S;
    Coeffs t = (S.c[0] + S.c[3] + S.c[5]) / 3.0;
    out.c[0] -= t;
    out.c[3] -= t;
    out.c[5] -= t;
    return out;
}

SymTensorField times_identity(const ScalarField& f) {
    SymTensorField out(f.grid);
    out.c[0] = out.c[3] = out.c[5] = f.c[0];
    return out;
}

SymTensorField scaled_tensor(const ScalarField& f, const Eigen::Matrix3d& m) {
    SymTensorField out;
    out.grid = f.grid;
    for (int a = 0; a < 6; ++a) {
        int i = kSymIndex[a][0], j = kSymIndex[a][1];
        out.c[a] = f.c[0] * (0.5 * (m(i, j) + m(j, i)));
    }
    return out;
}

VectorField times_vector(const ScalarField& f, const Eigen::Vector3d& xi) {
    VectorField out;
    out.grid = f.grid;
    for (int i = 0; i < 3; ++i) out.c[i] = f.c[0] * xi(i);
    return out;
}

ScalarField component(const VectorField& v, int i) {
    ScalarField out;
    out.grid = v.grid;
    out.c[0] = v.c[i];
    return out;
}

ScalarField component(const SymTensorField& S, int slot) {
    ScalarField out;
    out.grid = S.grid;
    out.c[0] = S.c[slot];
    return out;
}

VectorField assemble(const ScalarField& a, const ScalarField& b, const ScalarField& c) {
    require_same_grid(a.grid, b.grid);
    require_same_grid(a.grid, c.grid);
    VectorField out;
    out.grid = a.grid;
    out.c = {a.c[0], b.c[0], c.c[0]};
    return out;
}

template <int C>
std::array<double, C> mean(const Field<C>& f) {
    std::array<double, C> out;
    for (int i = 0; i < C; ++i) out[i] = f.c[i](0).real();
    return out;
}

template <int C>
Field<C> constant_field(const Grid& g, const std::array<double, C>& values) {
    Field<C> out(g);
    for (int i = 0; i < C; ++i) out.c[i](0) = values[i];
    return out;
}

template <int C>
int bandwidth(const Field<C>& f, double rel_tol) {
    const auto& w = waves(f.grid.n);
    double top = 0;
    for (const auto& a : f.c) top = std::max(top, a.abs().maxCoeff());
    if (top == 0) return 0;
    int bw = 0;
    for (const auto& a : f.c)
        for (Eigen::Index i = 0; i < a.size(); ++i)
            if (std::abs(a(i)) > rel_tol * top) bw = std::max(bw, w.kmax(i));
    return bw;
}

template <int C>
Samples pointwise_norm(const Field<C>& f) {
    auto s = samples(f);
    if constexpr (C == 1) {
        return s[0].abs();
    } else {
        Samples acc = Samples::Zero(s[0].size());
        for (int i = 0; i < C; ++i) acc += comp_weight<C>(i) * s[i].square();
        return acc.sqrt();
    }
}

template <int C>
double lp_norm(const Field<C>& f, double p) {
    if (!(p >= 1.0)) throw Error(err::domain, "L^p norm needs p >= 1");
    if (std::isinf(p)) return linf_norm(f);
    Samples a = pointwise_norm(f);
    double m = a.pow(p).mean();
    return std::pow(kVolume * m, 1.0 / p);
}

template <int C>
double linf_norm(const Field<C>& f) {
    return pointwise_norm(resample(f, refined_grid(f.grid))).maxCoeff();
}

template <int C>
double grid_max_abs(const Field<C>& f) {
    return pointwise_norm(f).maxCoeff();
}

namespace {

template <int C>
double c_norm_rec(const Field<C>& f, int depth, int order, int first_axis, double* level_max) {
    level_max[depth] = std::max(level_max[depth], linf_norm(f));
    if (depth == order) return 0;
    const auto& w = waves(f.grid.n);
    for (int ax = first_axis; ax < 3; ++ax) {
        Field<C> d;
        d.grid = f.grid;
        for (int i = 0; i < C; ++i) d.c[i] = f.c[i] * (I * w.k[ax]);
        c_norm_rec(d, depth + 1, order, ax, level_max);
    }
    return 0;
}

}  // namespace

template <int C>
double c_norm(const Field<C>& f, int order) {
    if (order < 0) throw Error(err::domain, "C^N norm needs N >= 0");
    std::vector<double> level(order + 1, 0.0);
    c_norm_rec(f, 0, order, 0, level.data());
    double s = 0;
    for (double v : level) s += v;
    return s;
}

template <int C>
double l2_parseval(const Field<C>& f) {
    return std::sqrt(std::max(inner(f, f), 0.0));
}

template <int C>
double inner(const Field<C>& a, const Field<C>& b) {
    require_same_grid(a.grid, b.grid);
    const auto& w = waves(a.grid.n);
    double s = 0;
    for (int i = 0; i < C; ++i)
        s += comp_weight<C>(i) * (w.weight * (a.c[i].conjugate() * b.c[i]).real()).sum();
    return kVolume * s;
}

double integral(const ScalarField& f) { return kVolume * f.c[0](0).real(); }

double integral_of_samples(const Grid& g, const Samples& s) {
    if (s.size() != static_cast<Eigen::Index>(g.real_size()))
        throw Error(err::grid_mismatch, "sample count does not match grid");
    return kVolume * s.mean();
}

template <int C>
Field<C> random_field(const Grid& g, int kmax, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const auto& w = waves(g.n);
    Field<C> f(g);
    for (int i = 0; i < C; ++i) {
        Coeffs c = Coeffs::Zero(static_cast<Eigen::Index>(g.spec_size()));
        for (Eigen::Index j = 0; j < c.size(); ++j) {
            double re = nd(rng), im = nd(rng);
            if (!w.nyquist(j) && w.kmax(j) <= kmax) c(j) = cplx(re, im);
        }
        // A round trip through real space enforces Hermitian symmetry.
        f.c[i] = to_spectral(g, to_real(g, c));
    }
    return f;
}

#define NSCI_FIELD_INSTANTIATE(C)                                                     \
    template std::array<Samples, C> samples<C>(const Field<C>&);                         \
    template Field<C> from_samples<C>(const Grid&, const std::array<Samples, C>&);       \
    template Field<C> resample<C>(const Field<C>&, const Grid&);                         \
    template Field<C> laplacian<C>(const Field<C>&);                                     \
    template Field<C> project_nonzero<C>(const Field<C>&);                               \
    template Field<C> inv_laplacian<C>(const Field<C>&);                                 \
    template std::array<double, C> mean<C>(const Field<C>&);                             \
    template Field<C> constant_field<C>(const Grid&, const std::array<double, C>&);      \
    template int bandwidth<C>(const Field<C>&, double);                                  \
    template Samples pointwise_norm<C>(const Field<C>&);                                 \
    template double lp_norm<C>(const Field<C>&, double);                                 \
    template double linf_norm<C>(const Field<C>&);                                       \
    template double grid_max_abs<C>(const Field<C>&);                                    \
    template double c_norm<C>(const Field<C>&, int);                                     \
    template double l2_parseval<C>(const Field<C>&);                                     \
    template double inner<C>(const Field<C>&, const Field<C>&);                          \
    template Field<C> random_field<C>(const Grid&, int, unsigned long long);

NSCI_FIELD_INSTANTIATE(1)
NSCI_FIELD_INSTANTIATE(3)
NSCI_FIELD_INSTANTIATE(6)

#undef NSCI_FIELD_INSTANTIATE

}  // namespace nsci
