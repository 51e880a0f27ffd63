#include "nsci/bump.hpp"

#include <cmath>

namespace nsci {

namespace {

template <int K>
std::array<double, K + 1> exp_series(const std::array<double, K + 1>& g) {
    std::array<double, K + 1> e{};
    if (g[0] < -700.0) return e;  // exp underflows; every derivative vanishes
    e[0] = std::exp(g[0]);
    for (int k = 1; k <= K; ++k) {
        double s = 0;
        for (int j = 1; j <= k; ++j) s += j * g[j] * e[k - j];
        e[k] = s / k;
    }
    double fact = 1;
    for (int k = 1; k <= K; ++k) {
        fact *= k;
        e[k] *= fact;
    }
    return e;
}

}  // namespace

template <int K>
std::array<double, K + 1> bump_radial(double s) {
    std::array<double, K + 1> g{};
    if (s >= 1.0) return g;
    double u = 1.0 - s, p = 1.0 / u;
    for (int k = 0; k <= K; ++k, p /= u) g[k] = -p;
    return exp_series<K>(g);
}

template <int K>
std::array<double, K + 1> bump_line(double s) {
    std::array<double, K + 1> g{};
    if (std::abs(s) >= 1.0) return g;
    double u = 1.0 - s, w = 1.0 + s;
    double pu = 1.0 / u, pw = 1.0 / w, sign = 1.0;
    for (int k = 0; k <= K; ++k, pu /= u, pw /= w, sign = -sign) g[k] = -0.5 * (pu + sign * pw);
    return exp_series<K>(g);
}

template std::array<double, 1> bump_radial<0>(double);
template std::array<double, 4> bump_radial<3>(double);
template std::array<double, 5> bump_radial<4>(double);
template std::array<double, 2> bump_line<1>(double);
template std::array<double, 6> bump_line<5>(double);

}  // namespace nsci
