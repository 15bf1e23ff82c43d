#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "respsar/rng.hpp"
#include "respsar/scene.hpp"

using namespace respsar;

namespace {

// Independent range oracle: direct norm plus direct Fourier-series evaluation.
double range_reference(const ScanTrajectory& traj, const Scatterer& s, double t) {
    const double dx = traj.origin.x + t * traj.velocity.x - s.position.x;
    const double dy = traj.origin.y + t * traj.velocity.y - s.position.y;
    const double dz = traj.origin.z + t * traj.velocity.z - s.position.z;
    double d = 0.0;
    for (size_t n = 0; n < s.motion.coeffs.size(); ++n) {
        const std::complex<double> rot(std::cos(s.motion.omega_r * static_cast<double>(n) * t),
                                       std::sin(s.motion.omega_r * static_cast<double>(n) * t));
        d += (s.motion.coeffs[n] * rot).real();
    }
    return std::sqrt(dx * dx + dy * dy + dz * dz) + d;
}

// Central finite difference of (2/lambda) R(t) on a 1 ms grid.
double doppler_fd(const ScanTrajectory& traj, const Scatterer& s, double t, double lambda) {
    const double h = 5e-4;
    return (2.0 / lambda) * (range_reference(traj, s, t + h) - range_reference(traj, s, t - h)) /
           (2.0 * h);
}

Scatterer random_scatterer(CounterRng& rng) {
    Scatterer s;
    s.position = {rng.uniform(-0.5, 0.5), rng.uniform(0.8, 1.5), rng.uniform(-0.3, 0.3)};
    s.reflectivity = rng.uniform(0.1, 2.0);
    s.motion.omega_r = 2.0 * kPi * rng.uniform(0.1, 0.5);
    s.motion.coeffs.resize(3);
    for (auto& c : s.motion.coeffs) {
        c = {rng.uniform(-0.004, 0.004), rng.uniform(-0.004, 0.004)};
    }
    return s;
}

ScanTrajectory random_trajectory(CounterRng& rng) {
    ScanTrajectory traj;
    traj.origin = {rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.5, -0.3)};
    traj.velocity = {rng.uniform(-0.005, 0.005), rng.uniform(-0.005, 0.005), rng.uniform(0.005, 0.02)};
    traj.duration = 85.0;
    return traj;
}

} // namespace

TEST_CASE("antenna position is the affine scan law") {
    const ScanTrajectory traj{{0.0, 0.0, -0.45}, {0.0, 0.0, 9.9e-3}, 85.0};

    SECTION("identity at t = 0") {
        const Vec3 p = antenna_position(traj, 0.0);
        CHECK(p.x == 0.0);
        CHECK(p.y == 0.0);
        CHECK(p.z == -0.45);
    }
    SECTION("experimental scan endpoint") {
        const Vec3 p = antenna_position(traj, 84.8);
        CHECK_THAT(p.z, Catch::Matchers::WithinAbs(-0.45 + 84.8 * 9.9e-3, 1e-12));
        CHECK_THAT(p.z, Catch::Matchers::WithinAbs(0.39, 1e-3));
    }
    SECTION("unit velocity arithmetic") {
        const ScanTrajectory unit{{0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, 5.0};
        const Vec3 p = antenna_position(unit, 2.0);
        CHECK(p.z == 2.0);
    }
    SECTION("out-of-range time throws") {
        CHECK_THROWS_AS(antenna_position(traj, -1.0), DomainError);
        CHECK_THROWS_AS(antenna_position(traj, 86.0), DomainError);
    }
    SECTION("affine in t") {
        CounterRng rng(11);
        for (int i = 0; i < 50; ++i) {
            const double t1 = rng.uniform(0.0, 40.0);
            const double t2 = rng.uniform(0.0, 40.0);
            const Vec3 lhs = antenna_position(traj, t1) + antenna_position(traj, t2) -
                             antenna_position(traj, 0.0);
            const Vec3 rhs = antenna_position(traj, t1 + t2);
            CHECK_THAT((lhs - rhs).norm(), Catch::Matchers::WithinAbs(0.0, 1e-12));
        }
    }
}

TEST_CASE("respiratory displacement follows the truncated Fourier series") {
    SECTION("all-zero coefficients") {
        RespiratoryMotion m{2.0 * kPi * 0.25, {0.0, 0.0, 0.0}};
        for (double t : {0.0, 0.3, 1.7, 12.0}) CHECK(m.displacement(t) == 0.0);
    }
    SECTION("real coefficients at t = 0") {
        RespiratoryMotion m{2.0 * kPi * 0.25, {cplx(0.002, 0.0), cplx(0.001, 0.0)}};
        CHECK_THAT(m.displacement(0.0), Catch::Matchers::WithinAbs(0.003, 1e-15));
    }
    SECTION("random draws match direct complex-exponential evaluation") {
        CounterRng rng(12);
        for (int i = 0; i < 100; ++i) {
            RespiratoryMotion m;
            m.omega_r = 2.0 * kPi * rng.uniform(0.05, 1.0);
            m.coeffs.resize(1 + static_cast<size_t>(rng.uniform(1.0, 4.0)));
            for (auto& c : m.coeffs) c = {rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01)};
            const double t = rng.uniform(0.0, 20.0);
            double expected = 0.0;
            for (size_t n = 0; n < m.coeffs.size(); ++n) {
                expected += (m.coeffs[n] * std::exp(cplx(0.0, m.omega_r * static_cast<double>(n) * t)))
                                .real();
            }
            CHECK_THAT(m.displacement(t), Catch::Matchers::WithinAbs(expected, 1e-15));
        }
    }
    SECTION("periodic in the fundamental") {
        CounterRng rng(13);
        for (int i = 0; i < 20; ++i) {
            RespiratoryMotion m;
            m.omega_r = 2.0 * kPi * rng.uniform(0.1, 0.6);
            m.coeffs = {cplx(0.0, 0.0), cplx(rng.uniform(-0.005, 0.005), rng.uniform(-0.005, 0.005)),
                        cplx(rng.uniform(-0.002, 0.002), rng.uniform(-0.002, 0.002))};
            const double t = rng.uniform(0.0, 10.0);
            const double period = 2.0 * kPi / m.omega_r;
            CHECK_THAT(m.displacement(t) - m.displacement(t + period),
                       Catch::Matchers::WithinAbs(0.0, 1e-12));
        }
    }
}

TEST_CASE("range combines geometry and breathing displacement") {
    const ScanTrajectory traj{{0.0, 0.0, 0.0}, {0.0, 0.0, 1e-3}, 10.0};

    SECTION("stationary unit range") {
        Scatterer s{{0.0, 1.0, 0.0}, 1.0, RespiratoryMotion::none()};
        CHECK_THAT(range_to(traj, s, 0.0), Catch::Matchers::WithinAbs(1.0, 1e-15));
    }
    SECTION("constant offset adds") {
        Scatterer s{{0.0, 1.0, 0.0}, 1.0, {2.0 * kPi * 0.25, {cplx(0.005, 0.0)}}};
        CHECK_THAT(range_to(traj, s, 0.0), Catch::Matchers::WithinAbs(1.005, 1e-15));
    }
    SECTION("random scenes match the reference routine") {
        CounterRng rng(14);
        for (int i = 0; i < 100; ++i) {
            const ScanTrajectory t2 = random_trajectory(rng);
            const Scatterer s = random_scatterer(rng);
            const double t = rng.uniform(0.0, t2.duration);
            CHECK_THAT(range_to(t2, s, t),
                       Catch::Matchers::WithinRel(range_reference(t2, s, t), 1e-13));
        }
    }
    SECTION("pure geometry when all coefficients vanish") {
        CounterRng rng(15);
        for (int i = 0; i < 20; ++i) {
            const ScanTrajectory t2 = random_trajectory(rng);
            Scatterer s = random_scatterer(rng);
            s.motion.coeffs.assign(s.motion.coeffs.size(), cplx(0.0, 0.0));
            const double t = rng.uniform(0.0, t2.duration);
            const Vec3 los = antenna_position(t2, t) - s.position;
            CHECK(range_to(t2, s, t) == los.norm());
        }
    }
}

TEST_CASE("azimuth against the array baseline") {
    const ScanTrajectory traj{{0.0, 0.0, 0.0}, {0.0, 0.0, 1e-3}, 10.0};
    const Vec3 axis{1.0, 0.0, 0.0};

    SECTION("broadside is pi/2") {
        CHECK_THAT(azimuth_to(traj, axis, {0.0, 1.3, 0.0}, 0.0),
                   Catch::Matchers::WithinAbs(kPi / 2.0, 1e-12));
    }
    SECTION("along the axis is 0") {
        CHECK_THAT(azimuth_to(traj, axis, {2.0, 0.0, 0.0}, 0.0),
                   Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
    SECTION("random geometry matches the arccos oracle") {
        CounterRng rng(16);
        for (int i = 0; i < 100; ++i) {
            const Vec3 x{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
            const double t = rng.uniform(0.0, 10.0);
            const Vec3 a = antenna_position(traj, t);
            const Vec3 los = x - a;
            if (los.norm() < 1e-6) continue;
            const double expected = std::acos(std::clamp(los.x / los.norm(), -1.0, 1.0));
            CHECK_THAT(azimuth_to(traj, axis, x, t), Catch::Matchers::WithinAbs(expected, 1e-12));
            CHECK(azimuth_to(traj, axis, x, t) >= 0.0);
            CHECK(azimuth_to(traj, axis, x, t) <= kPi);
        }
    }
    SECTION("zero line of sight throws") {
        CHECK_THROWS_AS(azimuth_to(traj, axis, antenna_position(traj, 1.0), 1.0), GeometryError);
    }
}

TEST_CASE("instantaneous Doppler = (2/lambda) dR/dt") {
    const double lambda = 3.794e-3;

    SECTION("zero at closest approach of a stationary scatterer") {
        const ScanTrajectory traj{{0.0, 0.0, -1.0}, {0.0, 0.0, 0.01}, 200.0};
        Scatterer s{{0.0, 1.0, 0.0}, 1.0, RespiratoryMotion::none()};
        // closest approach when the antenna passes z = 0, i.e. t = 100 s
        CHECK_THAT(instantaneous_doppler(traj, s, 100.0, lambda),
                   Catch::Matchers::WithinAbs(0.0, 1e-9));
    }
    SECTION("peak respiratory Doppler of a single harmonic") {
        const double omega = 2.0 * kPi * 0.25;
        const ScanTrajectory traj{{0.0, 0.0, -0.03}, {0.0, 0.0, 0.01}, 10.0};
        // at t = 3 s, sin(omega t) = -1 (respiratory peak) and the antenna is
        // at z = 0, broadside to the scatterer, so the scan term vanishes
        Scatterer s{{0.0, 1.0, 0.0}, 1.0, {omega, {cplx(0.0, 0.0), cplx(0.001, 0.0)}}};
        const double expected_peak = (2.0 / lambda) * omega * 0.001;
        CHECK_THAT(expected_peak, Catch::Matchers::WithinAbs(0.828, 5e-4));
        const double fd = instantaneous_doppler(traj, s, 3.0, lambda);
        CHECK_THAT(fd, Catch::Matchers::WithinAbs(expected_peak, 1e-6));
        CHECK_THAT(fd, Catch::Matchers::WithinAbs(doppler_fd(traj, s, 3.0, lambda), 1e-4));
    }
    SECTION("100 random scenes match the finite-difference oracle") {
        CounterRng rng(17);
        for (int i = 0; i < 100; ++i) {
            const ScanTrajectory traj = random_trajectory(rng);
            const Scatterer s = random_scatterer(rng);
            const double t = rng.uniform(0.1, traj.duration - 0.1);
            const double fd = instantaneous_doppler(traj, s, t, lambda);
            const double ref = doppler_fd(traj, s, t, lambda);
            CHECK_THAT(fd, Catch::Matchers::WithinAbs(ref, 1e-6 * std::max(1.0, std::fabs(fd))));
        }
    }
    SECTION("antenna on the scatterer throws") {
        const ScanTrajectory traj{{0.0, 0.0, 0.0}, {0.0, 0.0, 0.01}, 10.0};
        Scatterer s{{0.0, 0.0, 0.01}, 1.0, RespiratoryMotion::none()};
        CHECK_THROWS_AS(instantaneous_doppler(traj, s, 1.0, lambda), GeometryError);
    }
}
