#include "gen.hpp"

#include "nsci/errors.hpp"
#include "nsci/iterate.hpp"

#include <doctest.h>

#include <cmath>

using namespace nsci;
using doctest::Approx;

namespace {
const DirectionSet& dirs() {
    static const DirectionSet s = build_direction_set();
    return s;
}
const ProfileSet& raised() {
    static const ProfileSet p = make_profiles(ProfileKind::RaisedCosine, 1);
    return p;
}
}  // namespace

TEST_SUITE("iterate") {

TEST_CASE("chi") {
    const ChiCheck c = check_chi();
    CHECK(c.ok);
    CHECK(c.min_chi >= 1.0);
    CHECK(chi(0.5) == 1.0);
    CHECK(chi(1.0) == Approx(1.0));
    CHECK(chi(2.0) == Approx(2.0));
    CHECK(chi(3.5) == 3.5);
    CHECK(chi_prime(0.5) == 0.0);
    CHECK(chi_prime(3.0) == 1.0);
    test::for_all(50, 10, [](test::Gen& g) {
        const double z = g.uniform(1.0, 2.0);
        CHECK(z <= 2 * chi(z));
        CHECK(2 * chi(z) <= 4 * z);
        const double h = 1e-6;
        CHECK(chi_prime(z) == Approx((chi(z + h) - chi(z - h)) / (2 * h)).epsilon(1e-6));
    });
}

TEST_CASE("cutoffs are one on the inner and zero off the outer interval") {
    const ParameterConfig c;
    for (int q = 0; q < 3; ++q) {
        const LevelSchedule s = schedule(c, q);
        const CutoffPair p = make_cutoffs(s, c);
        test::for_all(100, 20 + q, [&](test::Gen& g) {
            const double t = c.t0 + g.uniform(-2 * c.s, 2 * c.s);
            const double d = std::abs(t - c.t0);
            if (d <= s.I_q.half) CHECK(p.eta.value(t) == 1.0);
            if (d >= s.Itilde_q.half) CHECK(p.eta.value(t) == 0.0);
            if (d <= s.Itilde_q.half) CHECK(p.eta_tilde.value(t) == 1.0);
            if (d >= s.I_q1.half) CHECK(p.eta_tilde.value(t) == 0.0);
            CHECK(p.eta.value(t) >= 0.0);
            CHECK(p.eta.value(t) <= 1.0);
            const double h = 1e-7;
            CHECK(p.eta_tilde.slope(t) ==
                  Approx((p.eta_tilde.value(t + h) - p.eta_tilde.value(t - h)) / (2 * h)).epsilon(1e-5).scale(1.0));
        });
        CHECK_FALSE(p.bounds.empty());
    }
}

TEST_CASE("five-point time derivative is exact on quartics") {
    const Grid g = make_grid(8);
    test::for_all(10, 30, [&](test::Gen& gen) {
        double co[5];
        for (double& x : co) x = gen.uniform(-1, 1);
        const double dt = gen.uniform(0.01, 0.2);
        auto poly = [&](double t) { return co[0] + t * (co[1] + t * (co[2] + t * (co[3] + t * co[4]))); };
        auto dpoly = [&](double t) { return co[1] + t * (2 * co[2] + t * (3 * co[3] + t * 4 * co[4])); };
        std::vector<VectorField> vs;
        for (int j = 0; j < 5; ++j) vs.push_back(constant_field<3>(g, {poly(j * dt), 0.0, 0.0}));
        std::vector<const VectorField*> w;
        for (auto& v : vs) w.push_back(&v);
        for (int off = 0; off < 5; ++off) {
            const VectorField d = time_derivative<3>(w, off, dt);
            CHECK(mean(d)[0] == Approx(dpoly(off * dt)).epsilon(1e-9).scale(1.0));
        }
    });
}

TEST_CASE("mollifier") {
    const Grid g = make_grid(32);
    const TimeGrid times = make_time_grid(ParameterConfig{}, 33);
    const Mollifier m = make_mollifier(g, times, 2 * g.h(), 2 * times.dt());
    double sum = 0;
    for (double w : m.time_weights) sum += w;
    CHECK(sum == Approx(1.0).epsilon(1e-15));
    for (int j = 0; j < m.J; ++j) CHECK(m.time_weights[std::size_t(j)] == m.time_weights[std::size_t(2 * m.J - j)]);
    CHECK(m.multiplier.c[0](0).real() == Approx(1.0).epsilon(1e-12));
    try {
        make_mollifier(g, times, g.h(), 2 * times.dt());
        FAIL("expected under-resolution");
    } catch (const Error& e) {
        CHECK(e.kind() == err::under_resolution);
    }
}

TEST_CASE("shear flow solves the unforced system") {
    const ParameterConfig c;
    const NSRState st = shear_flow_state(c, make_grid(16), 17, dirs());
    const ResidualResult r = residual_check(st);
    CHECK(r.residual_linf < 1e-12);
    CHECK(st.v0_l2 > 0);
}

TEST_CASE("a frozen profile is not a solution") {
    const ParameterConfig c;
    const Grid g = make_grid(16);
    const TimeGrid times = make_time_grid(c, 9);
    std::vector<Snapshot> samples;
    for (int i = 0; i < times.nt; ++i) {
        Snapshot s = zero_snapshot(g, times.at(i));
        s.dv.reset();
        s.dR.reset();
        Samples x3(Eigen::Index(g.real_size()));
        for (int a = 0; a < g.n; ++a)
            for (int b = 0; b < g.n; ++b)
                for (int k = 0; k < g.n; ++k) x3(Eigen::Index(g.index(a, b, k))) = std::sin(g.x(k));
        s.v.c[0] = to_spectral(g, x3);
        samples.push_back(std::move(s));
    }
    const NSRState st = sampled_state(c, g, samples, dirs());
    CHECK(residual_check(st).residual_linf > 0.5);
}

TEST_CASE("stress outside I_q violates the support hypothesis") {
    const ParameterConfig c;
    const Grid g = make_grid(8);
    const TimeGrid times = make_time_grid(c, 9);
    std::vector<Snapshot> samples;
    for (int i = 0; i < times.nt; ++i) samples.push_back(zero_snapshot(g, times.at(i)));
    samples[1].R = traceless_part(random_field<6>(g, 2, 5));
    samples[1].dR.reset();
    const NSRState st = sampled_state(c, g, samples, dirs());
    try {
        check_support_hypothesis(st);
        FAIL("expected support error");
    } catch (const Error& e) {
        CHECK(e.kind() == err::support);
    }
}

TEST_CASE("energy profile") {
    const NSRState st = shear_flow_state(ParameterConfig{}, make_grid(16), 17, dirs());
    const EnergyProfile e = make_energy_profile(st);
    for (std::size_t i = 0; i < e.t.size(); ++i) {
        CHECK(e.g[i] >= e.eps1 / 2);
        CHECK(e.g[i] <= e.eps1);
        CHECK(e.e[i] == Approx(e.kinetic[i] + e.g[i]));
    }
    CHECK(e.g_slope_t0 == Approx(2 * e.slope_bound).epsilon(1e-12));
    CHECK_THROWS_AS(make_energy_profile(st, 1.0), Error);
}

TEST_CASE("one step from rest") {
    const NSRState st = zero_state(ParameterConfig{}, make_grid(64), 9, dirs());
    const EnergyProfile e = make_energy_profile(st);
    const StepResult r = step(st, e, dirs(), raised());
    const DiagnosticsReport& rep = r.report;
    CHECK(rep.hard_ok());
    CHECK(rep.info.at("amplitudes_constant").get<bool>());
    CHECK(r.next.q == 1);
    for (const char* name : {"output NSR residual (relative)", "trace R_next / |R_next|",
                             "div v_next / |v_next|", "rho Id - R_ell - sum a^2 xi(x)xi (relative)",
                             "energy decomposition balance (relative)", "Supp_T(R_q+1) in I_q+1"}) {
        CAPTURE(name);
        const DiagnosticEntry* x = rep.find(name);
        REQUIRE(x != nullptr);
        CHECK(x->pass);
    }
    // Constant amplitudes: e - int|w_p|^2 equals delta_{q+2}/2 exactly.
    const DiagnosticEntry* g1 = rep.find("e - (int|v_tilde|^2 + int|w_p|^2) <= 2 delta_q+2/3 on I_0");
    REQUIRE(g1 != nullptr);
    CHECK(g1->measured == Approx(st.schedule.delta_q2 / 2).epsilon(1e-10));
    // Outside I_1 nothing changes.
    for (const auto& row : rep.trace)
        if (std::abs(row.t - 0.5) >= st.schedule.I_q1.half) CHECK(row.w_l2 == 0.0);
}

TEST_CASE("one step on the shear flow, deterministic") {
    const NSRState st = shear_flow_state(ParameterConfig{}, make_grid(64), 9, dirs());
    const EnergyProfile e = make_energy_profile(st);
    const StepResult a = step(st, e, dirs(), raised());
    CHECK(a.report.hard_ok());
    CHECK(a.report.find("output NSR residual (relative)")->measured < 1e-10);
    const StepResult b = step(st, e, dirs(), raised());
    CHECK(to_json(a.report).dump() == to_json(b.report).dump());
    CHECK(trace_csv(a.report) == trace_csv(b.report));
    // The output state satisfies the residual check on its own.
    CHECK(residual_check(a.next).residual_linf < 1e-10);
}

TEST_CASE("step preconditions name their stage") {
    const NSRState st = zero_state(ParameterConfig{}, make_grid(32), 17, dirs());
    EnergyProfile e = make_energy_profile(st);
    EnergyProfile low = e;
    for (std::size_t i = 0; i < low.e.size(); ++i) low.e[i] = low.kinetic[i];
    try {
        step(st, low, dirs(), raised());
        FAIL("expected precondition");
    } catch (const Error& x) {
        CHECK(x.kind() == err::precondition);
        CHECK(std::string(x.what()).find("amplitudes") != std::string::npos);
    }
    EnergyProfile shortp = e;
    shortp.e.pop_back();
    CHECK_THROWS_AS(step(st, shortp, dirs(), raised()), Error);
    const ProfileSet compact = make_profiles(ProfileKind::Compact);
    try {
        step(st, e, dirs(), compact);
        FAIL("expected under-resolution");
    } catch (const Error& x) {
        CHECK(x.kind() == err::under_resolution);
        CHECK(std::string(x.what()).find("perturbation") != std::string::npos);
    }
}

TEST_CASE("hard checks ignore inductive margins") {
    DiagnosticsReport r;
    r.entries.push_back({"identity", "identity", 0, 1, true, ""});
    r.entries.push_back({"margin", "inductive", 2, 1, false, ""});
    r.entries.push_back({"lemma", "lemma", 2, 1, false, ""});
    CHECK(r.hard_ok());
    r.entries.push_back({"support", "support", 1, 0, false, ""});
    CHECK_FALSE(r.hard_ok());
}

}
