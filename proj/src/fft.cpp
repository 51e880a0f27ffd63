#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace nsci::detail {

namespace {

struct Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

const Plans& plans(int n) {
    static std::map<int, Plans> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::size_t nr = std::size_t(n) * n * n;
    std::size_t nc = std::size_t(n) * n * (n / 2 + 1);
    std::vector<double> r(nr);
    std::vector<fftw_complex> c(nc);
    Plans p;
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.fwd = fftw_plan_dft_r2c_3d(n, n, n, r.data(), c.data(), flags);
    p.bwd = fftw_plan_dft_c2r_3d(n, n, n, c.data(), r.data(), flags | FFTW_DESTROY_INPUT);
    return cache.emplace(n, p).first->second;
}

}  // namespace

void r2c(int n, const double* in, std::complex<double>* out) {
    const Plans& p = plans(n);
    fftw_execute_dft_r2c(p.fwd, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void c2r(int n, const std::complex<double>* in, double* out) {
    const Plans& p = plans(n);
    std::size_t nc = std::size_t(n) * n * (n / 2 + 1);
    std::vector<std::complex<double>> scratch(in, in + nc);
    fftw_execute_dft_c2r(p.bwd, reinterpret_cast<fftw_complex*>(scratch.data()), out);
}

const Waves& waves(int n) {
    static std::map<int, std::unique_ptr<Waves>> cache;
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(n);
    if (it != cache.end()) return *it->second;
    auto w = std::make_unique<Waves>();
    const int nk = n / 2 + 1;
    const Eigen::Index size = Eigen::Index(n) * n * nk;
    for (auto& k : w->k) k.resize(size);
    w->k2.resize(size);
    w->inv_k2.resize(size);
    w->weight.resize(size);
    w->nyquist.resize(size);
    w->kmax.resize(size);
    auto wave = [n](int i) { return i < n / 2 ? i : i - n; };
    Eigen::Index idx = 0;
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < nk; ++i2, ++idx) {
                int a = wave(i0), b = wave(i1), c = i2;
                bool ny = (i0 == n / 2) || (i1 == n / 2) || (i2 == n / 2);
                w->nyquist(idx) = ny;
                w->kmax(idx) = std::max({std::abs(a), std::abs(b), c});
                double ka = ny ? 0.0 : a, kb = ny ? 0.0 : b, kc = ny ? 0.0 : c;
                w->k[0](idx) = ka;
                w->k[1](idx) = kb;
                w->k[2](idx) = kc;
                double k2 = ka * ka + kb * kb + kc * kc;
                w->k2(idx) = k2;
                w->inv_k2(idx) = k2 > 0 ? 1.0 / k2 : 0.0;
                w->weight(idx) = (i2 == 0 || i2 == n / 2) ? 1.0 : 2.0;
            }
    return *cache.emplace(n, std::move(w)).first->second;
}

}  // namespace nsci::detail
