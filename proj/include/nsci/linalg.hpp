#pragma once

#include <Eigen/Dense>
#include <array>

namespace nsci {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

// Symmetric tensors are stored as six components in the order
// (00, 01, 02, 11, 12, 22).
inline constexpr std::array<std::array<int, 2>, 6> kSymIndex{
    {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};

inline constexpr int sym_slot(int i, int j) {
    if (i > j) {
        int t = i;
        i = j;
        j = t;
    }
    return i == 0 ? j : (i == 1 ? 2 + j : 5);
}

// Off-diagonal slots appear twice in a full contraction.
inline constexpr std::array<double, 6> kSymWeight{1.0, 2.0, 2.0, 1.0, 2.0, 1.0};

template <typename Scalar>
Mat3<Scalar> sym_to_mat(const Eigen::Matrix<Scalar, 6, 1>& s) {
    Mat3<Scalar> m;
    for (int a = 0; a < 6; ++a) {
        m(kSymIndex[a][0], kSymIndex[a][1]) = s(a);
        m(kSymIndex[a][1], kSymIndex[a][0]) = s(a);
    }
    return m;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 6, 1> mat_to_sym(const Mat3<Scalar>& m) {
    Eigen::Matrix<Scalar, 6, 1> s;
    for (int a = 0; a < 6; ++a) s(a) = m(kSymIndex[a][0], kSymIndex[a][1]);
    return s;
}

template <typename Scalar>
Mat3<Scalar> traceless(const Mat3<Scalar>& m) {
    return m - (m.trace() / Scalar(3)) * Mat3<Scalar>::Identity();
}

}  // namespace nsci
