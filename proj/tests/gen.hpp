#pragma once

// Hand-rolled generators for property tests: every case gets its own seed,
// which is captured so a failure names the case to replay.

#include "nsci/field.hpp"
#include "nsci/geometry.hpp"

#include <doctest.h>

#include <cstdint>
#include <random>

namespace nsci::test {

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
    std::uint64_t seed() { return rng(); }
    Eigen::Matrix3d ball_matrix(double radius) { return random_ball_matrix(rng, radius); }
    template <int C>
    Field<C> field(const Grid& g, int kmax) {
        return random_field<C>(g, kmax, seed());
    }
};

template <typename F>
void for_all(int cases, std::uint64_t seed, F&& body) {
    for (int i = 0; i < cases; ++i) {
        const std::uint64_t s = seed + std::uint64_t(i);
        CAPTURE(s);
        Gen g(s);
        body(g);
    }
}

}  // namespace nsci::test
