#pragma once

#include <Eigen/Dense>
#include <array>

namespace nsci {

// Second-order forward-mode number over the four variables (x1, x2, x3, t):
// value, gradient and Hessian.
struct Dual2 {
    double v = 0;
    Eigen::Vector4d g = Eigen::Vector4d::Zero();
    Eigen::Matrix4d h = Eigen::Matrix4d::Zero();

    Dual2() = default;
    explicit Dual2(double value) : v(value) {}

    static Dual2 linear(double value, const Eigen::Vector4d& grad) {
        Dual2 d(value);
        d.g = grad;
        return d;
    }
};

inline Dual2 operator+(const Dual2& a, const Dual2& b) {
    Dual2 r;
    r.v = a.v + b.v;
    r.g = a.g + b.g;
    r.h = a.h + b.h;
    return r;
}

inline Dual2 operator-(const Dual2& a, const Dual2& b) {
    Dual2 r;
    r.v = a.v - b.v;
    r.g = a.g - b.g;
    r.h = a.h - b.h;
    return r;
}

inline Dual2 operator-(const Dual2& a) {
    Dual2 r;
    r.v = -a.v;
    r.g = -a.g;
    r.h = -a.h;
    return r;
}

inline Dual2 operator*(const Dual2& a, const Dual2& b) {
    Dual2 r;
    r.v = a.v * b.v;
    r.g = a.v * b.g + b.v * a.g;
    r.h = a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose();
    return r;
}

inline Dual2 operator*(double s, const Dual2& a) {
    Dual2 r;
    r.v = s * a.v;
    r.g = s * a.g;
    r.h = s * a.h;
    return r;
}

inline Dual2 operator*(const Dual2& a, double s) { return s * a; }

// f(u) from f(u.v), f'(u.v), f''(u.v).
inline Dual2 compose(const Dual2& u, double f0, double f1, double f2) {
    Dual2 r;
    r.v = f0;
    r.g = f1 * u.g;
    r.h = f1 * u.h + f2 * u.g * u.g.transpose();
    return r;
}

// F(u, w) for two arguments from the value, gradient and Hessian of F.
inline Dual2 compose(const Dual2& u, const Dual2& w, double F, const Eigen::Vector2d& dF,
                     const Eigen::Matrix2d& d2F) {
    Dual2 r;
    r.v = F;
    r.g = dF(0) * u.g + dF(1) * w.g;
    r.h = dF(0) * u.h + dF(1) * w.h + d2F(0, 0) * u.g * u.g.transpose() +
          d2F(1, 1) * w.g * w.g.transpose() +
          d2F(0, 1) * (u.g * w.g.transpose() + w.g * u.g.transpose());
    return r;
}

using DualVec = std::array<Dual2, 3>;

inline DualVec cross(const DualVec& a, const DualVec& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline DualVec scale(const DualVec& a, double s) { return {s * a[0], s * a[1], s * a[2]}; }

inline DualVec add(const DualVec& a, const DualVec& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline double divergence(const DualVec& a) { return a[0].g(0) + a[1].g(1) + a[2].g(2); }

}  // namespace nsci
