#include <doctest.h>

#include <vector>

#include "mdv/levy.hpp"

using namespace mdv;

namespace {

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    return g;
}

}  // namespace

TEST_SUITE("levy") {

TEST_CASE("characteristic exponents of the presets") {
    const auto bm = LevyModel::brownian_drift(1.0, 1.0);
    CHECK(std::abs(bm.psi(2.0) - cplx(2.0, -2.0)) < 1e-15);
    CHECK(bm.psi(0.0) == cplx(0.0, 0.0));

    const auto st = LevyModel::stable(1.5);
    CHECK(st.psi(4.0).real() == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(st.psi(4.0).imag() == 0.0);
    CHECK(st.psi(0.0) == cplx(0.0, 0.0));

    const auto tri = LevyModel::triplet(0.5, 1.0, {{0.5, 2.0}, {3.0, 0.7}});
    CHECK(tri.psi(0.0) == cplx(0.0, 0.0));
    CHECK_THROWS_AS(LevyModel::stable(2.5), ModelError);
    CHECK_THROWS_AS(LevyModel::triplet(0.0, -1.0, {}), ModelError);
    CHECK_THROWS_AS(LevyModel::triplet(0.0, 1.0, {{1.0, -2.0}}), ModelError);
}

TEST_CASE("Re psi is nonnegative for triplet models") {
    const auto tri = LevyModel::triplet(-0.7, 0.3, {{0.4, 1.5}, {-2.5, 0.6}, {1.2, 0.2}});
    for (double u = -60.0; u <= 60.0; u += 0.37) CHECK(tri.psi(u).real() >= -1e-14);
}

TEST_CASE("psi_prime matches finite differences") {
    const std::vector<LevyModel> models = {
        LevyModel::brownian_drift(1.3, 0.8),
        LevyModel::stable(1.4),
        LevyModel::triplet(0.5, 0.9, {{0.5, 2.0}, {-3.0, 0.7}}),
    };
    for (const auto& m : models) {
        for (double u : {0.3, 1.7, 9.0, 40.0}) {
            const double eps = 1e-6 * std::max(1.0, u);
            const cplx fd = (m.psi(u + eps) - m.psi(u - eps)) / (2.0 * eps);
            const cplx an = m.psi_prime(u);
            CHECK(std::abs(fd - an) < 1e-5 * std::max(1.0, std::abs(an)));
        }
    }
}

TEST_CASE("contour condition report") {
    const auto grid = log_grid(0.1, 200.0, 120);

    // Brownian with drift: |Im/Re| = 2 mu / (sigma^2 u), attained at the
    // smallest grid point
    const auto bm = LevyModel::brownian_drift(1.0, 1.0);
    const auto rep = contour_condition_check(bm, grid);
    CHECK_FALSE(rep.condition_violated);
    CHECK(rep.re_divergent);
    CHECK(rep.a_hat == doctest::Approx(2.0 / grid.front()).epsilon(1e-12));

    // symmetric stable: psi real, A_hat = 0
    const auto st = contour_condition_check(LevyModel::stable(1.5), grid);
    CHECK(st.a_hat == 0.0);
    CHECK(st.re_divergent);
    CHECK_FALSE(st.condition_violated);

    // pure drift: Re psi vanishes identically
    const auto drift = contour_condition_check(LevyModel::brownian_drift(1.0, 0.0), grid);
    CHECK(drift.condition_violated);
    CHECK_FALSE(drift.re_divergent);
    CHECK(drift.zero_re_points == grid.size());

    CHECK_THROWS_AS(contour_condition_check(bm, log_grid(0.1, 50.0, 60)), ParamError);
}

TEST_CASE("growth diagnostics of the triplet exponent") {
    // |psi(u)| <~ u^2 and |psi'(u)| <~ u at infinity
    const auto tri = LevyModel::triplet(0.4, 0.8, {{0.5, 1.0}, {-2.0, 0.3}});
    double r2 = 0.0, r1 = 0.0;
    for (double u = 50.0; u <= 2000.0; u *= 1.7) {
        r2 = std::max(r2, std::abs(tri.psi(u)) / (u * u));
        r1 = std::max(r1, std::abs(tri.psi_prime(u)) / u);
    }
    CHECK(r2 < 10.0);
    CHECK(r1 < 10.0);

    // nonzero effective drift d = mu + int_{|x|>1} x nu(dx): |psi(u)| >~ u near 0
    const auto drifted = LevyModel::triplet(0.4, 0.8, {{2.0, 0.3}});
    double low = 1e300;
    for (double u = 1e-4; u <= 1e-2; u *= 2.0) low = std::min(low, std::abs(drifted.psi(u)) / u);
    CHECK(low > 0.1);

    // d = 0 and no big jumps: |psi(u)| >~ u^2 near 0, |psi'| <~ u
    const auto centered = LevyModel::triplet(0.0, 0.5, {{0.8, 1.0}, {-0.8, 1.0}});
    double low2 = 1e300, hi1 = 0.0;
    for (double u = 1e-4; u <= 1e-2; u *= 2.0) {
        low2 = std::min(low2, std::abs(centered.psi(u)) / (u * u));
        hi1 = std::max(hi1, std::abs(centered.psi_prime(u)) / u);
    }
    CHECK(low2 > 0.1);
    CHECK(hi1 < 10.0);

    // d = 0 with big jumps: psi' -> 0; Re psi still grows like u^2 from below
    const auto balanced = LevyModel::triplet(-0.6, 0.0, {{2.0, 0.3}});  // mu cancels int x nu
    CHECK(std::abs(balanced.psi_prime(1e-5)) < 1e-3);
    double low3 = 1e300;
    for (double u = 1e-3; u <= 1e-1; u *= 2.0)
        low3 = std::min(low3, balanced.psi(u).real() / (u * u));
    CHECK(low3 > 0.1);
}

}  // TEST_SUITE
