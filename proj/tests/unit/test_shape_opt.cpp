#include <cmath>

#include "curvot/errors.hpp"
#include "curvot/measures.hpp"
#include "curvot/power_diagram.hpp"
#include "curvot/shape_opt.hpp"
#include "curvot/synthetic.hpp"
#include "doctest.h"

using namespace curvot;

namespace {

// G(P) with length-normalized densities and the dual re-solved to high
// accuracy; the ground truth for shape-derivative checks.
std::pair<double, DualPotential> solve_G(const AtomicMeasure<2>& mu,
                                         std::vector<Vec2> vertices, bool disjoint = false) {
    PolylineMeasure<2> nu;
    nu.vertices = std::move(vertices);
    nu.disjoint_mode = disjoint;
    nu.densities = density_from_lengths(nu.vertices, disjoint);
    SolverConfig cfg;
    cfg.method = SolveMethod::hybrid;
    cfg.grad_tol = 1e-12;
    cfg.outer_max = 3000;
    auto r = solve(mu, nu, {}, cfg);
    REQUIRE(r.converged);
    return {r.final_cost, r.phi};
}

ShapeGradient<2> gradient_at(const AtomicMeasure<2>& mu, const PolylineMeasure<2>& nu,
                             const DualPotential& phi, double dual_tol = 1e-12) {
    auto oracle = build_oracle(mu, phi);
    auto trace = trace_polyline(mu, nu, phi, oracle);
    ShapeGradientOptions opt;
    opt.dual_tolerance = dual_tol;
    return shape_gradient(mu, nu, phi, trace, opt);
}

}  // namespace

TEST_CASE("single segment, single Dirac at the origin") {
    AtomicMeasure<2> mu{{{{0, 0}}}, {1.0}};
    PolylineMeasure<2> nu{{{{0, 0}}, {{1, 0}}}, {1.0}, false};
    DualPotential phi{0.0};
    auto g = gradient_at(mu, nu, phi, 1.0);
    CHECK(g.position_part[0][0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(g.position_part[0][1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mirror-symmetric configurations give mirrored gradients") {
    AtomicMeasure<2> mu{{{{0.3, 0.4}}, {{0.7, 0.4}}}, {0.5, 0.5}};
    PolylineMeasure<2> nu{{{{0.2, 0}}, {{0.8, 0}}}, {1.0}, false};
    DualPotential phi{0.0, 0.0};
    auto g = gradient_at(mu, nu, phi, 1.0);
    CHECK(g.position_part[0][0] == doctest::Approx(-g.position_part[1][0]).epsilon(1e-10));
    CHECK(g.position_part[0][1] == doctest::Approx(g.position_part[1][1]).epsilon(1e-10));
}

TEST_CASE("total shape gradient matches finite differences of G") {
    auto [mu, nu0] = generic_instance<2>(40, 8, 401);
    auto [G0, phi] = solve_G(mu, nu0.vertices);
    PolylineMeasure<2> nu = nu0;
    nu.densities = density_from_lengths(nu.vertices);
    auto g = gradient_at(mu, nu, phi);

    double worst = 0.0, scale = 0.0;
    for (int v = 0; v < static_cast<int>(nu.vertices.size()); ++v) {
        for (int c = 0; c < 2; ++c) {
            const double eps = 1e-5;
            auto vp = nu.vertices, vm = nu.vertices;
            vp[v][c] += eps;
            vm[v][c] -= eps;
            const double fd = (solve_G(mu, vp).first - solve_G(mu, vm).first) / (2 * eps);
            worst = std::max(worst, std::abs(fd - g.total[v][c]));
            scale = std::max(scale, std::abs(fd));
        }
    }
    CHECK(worst <= 1e-4 * scale);
}

TEST_CASE("stale duals are rejected") {
    auto [mu, nu] = generic_instance<2>(30, 6, 403);
    DualPotential junk(30, 0.0);
    auto oracle = build_oracle(mu, junk);
    auto trace = trace_polyline(mu, nu, junk, oracle);
    ShapeGradientOptions opt;
    opt.dual_tolerance = 1e-10;
    CHECK_THROWS_AS(shape_gradient(mu, nu, junk, trace, opt), StaleDual);
}

TEST_CASE("barycenter diagnostic") {
    SUBCASE("segment under a single off-axis Dirac") {
        AtomicMeasure<2> mu{{{{0.5, 1.0}}}, {1.0}};
        PolylineMeasure<2> nu{{{{0, 0}}, {{1, 0}}}, {1.0}, false};
        DualPotential phi{0.0};
        auto oracle = build_oracle(mu, phi);
        auto trace = trace_polyline(mu, nu, phi, oracle);
        auto bc = barycenter_diagnostic(mu, nu, phi, trace);
        CHECK(bc[0].first[0] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(bc[0].first[1] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(bc[0].second[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(bc[0].second[1] == doctest::Approx(1.0).epsilon(1e-12));

        // averaged vertex gradient equals rho (c - xbar)
        ShapeGradientOptions opt;
        opt.dual_tolerance = 1.0;
        auto g = shape_gradient(mu, nu, phi, trace, opt);
        const Vec2 avg = 0.5 * (g.position_part[0] + g.position_part[1]);
        CHECK(avg[0] == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(avg[1] == doctest::Approx(-1.0).epsilon(1e-10));
    }
    SUBCASE("two-cell split at the midpoint") {
        AtomicMeasure<2> mu{{{{0, 0}}, {{1, 0}}}, {0.5, 0.5}};
        PolylineMeasure<2> nu{{{{0, 0}}, {{1, 0}}}, {1.0}, false};
        DualPotential phi{0.0, 0.0};
        auto oracle = build_oracle(mu, phi);
        auto trace = trace_polyline(mu, nu, phi, oracle);
        auto bc = barycenter_diagnostic(mu, nu, phi, trace);
        CHECK(bc[0].second[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(bc[0].second[1] == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("isolated-segment identity on a random instance") {
        auto [mu, nu] = generic_instance<2>(25, 1, 405);
        auto [G0, phi] = solve_G(mu, nu.vertices);
        PolylineMeasure<2> poly = nu;
        poly.densities = density_from_lengths(poly.vertices);
        auto oracle = build_oracle(mu, phi);
        auto trace = trace_polyline(mu, poly, phi, oracle);
        auto bc = barycenter_diagnostic(mu, poly, phi, trace);
        ShapeGradientOptions opt;
        opt.dual_tolerance = 1e-12;
        auto g = shape_gradient(mu, poly, phi, trace, opt);
        const Vec2 avg = 0.5 * (g.position_part[0] + g.position_part[1]);
        const Vec2 expect = poly.densities[0] * (bc[0].first - bc[0].second);
        CHECK(avg[0] == doctest::Approx(expect[0]).epsilon(1e-10));
        CHECK(avg[1] == doctest::Approx(expect[1]).epsilon(1e-10));
    }
}

TEST_CASE("kinematic projection") {
    SUBCASE("feasible input is returned unchanged") {
        std::vector<Vec2> P{{{0, 0}}, {{0.3, 0}}, {{0.6, 0.1}}};
        KinematicConstraints K;
        K.k1 = 0.5;
        K.k2 = 0.4;
        auto r = project_kinematic(P, K);
        REQUIRE(r.converged);
        for (std::size_t v = 0; v < P.size(); ++v) {
            CHECK(std::abs(r.vertices[v][0] - P[v][0]) <= 1e-10);
            CHECK(std::abs(r.vertices[v][1] - P[v][1]) <= 1e-10);
        }
    }
    SUBCASE("two points shrink about their midpoint") {
        std::vector<Vec2> P{{{0, 0}}, {{2, 0}}};
        KinematicConstraints K;
        K.k1 = 1.0;
        auto r = project_kinematic(P, K);
        REQUIRE(r.converged);
        CHECK(std::abs(r.vertices[0][0] - 0.5) <= 1e-6);
        CHECK(std::abs(r.vertices[1][0] - 1.5) <= 1e-6);
        CHECK(std::abs(r.vertices[0][1]) <= 1e-9);
    }
    SUBCASE("kinked chain becomes acceleration-feasible") {
        std::vector<Vec2> P{{{0, 0}}, {{1, 0}}, {{1, 1}}};
        KinematicConstraints K;
        K.k2 = 0.1;
        auto r = project_kinematic(P, K);
        const Vec2 second = 2.0 * r.vertices[1] - r.vertices[0] - r.vertices[2];
        CHECK(norm(second) <= 0.1 + 1e-8);
    }
    SUBCASE("projection is idempotent and feasible on random chains") {
        for (std::uint64_t seed : {11u, 12u, 13u}) {
            auto nu = random_walk_polyline<2>(12, seed, 0.25);
            KinematicConstraints K;
            K.k1 = 0.15;
            K.k2 = 0.08;
            auto r1 = project_kinematic(nu.vertices, K);
            for (std::size_t a = 0; a + 1 < r1.vertices.size(); ++a)
                CHECK(norm(r1.vertices[a + 1] - r1.vertices[a]) <= K.k1 + 1e-6);
            for (std::size_t v = 1; v + 1 < r1.vertices.size(); ++v)
                CHECK(norm(2.0 * r1.vertices[v] - r1.vertices[v - 1] - r1.vertices[v + 1]) <=
                      K.k2 + 1e-6);
            auto r2 = project_kinematic(r1.vertices, K);
            for (std::size_t v = 0; v < r1.vertices.size(); ++v)
                CHECK(norm(r2.vertices[v] - r1.vertices[v]) <= 1e-6);
        }
    }
}

TEST_CASE("optimize_polyline shrinks a segment toward a lone Dirac") {
    AtomicMeasure<2> mu{{{{0.5, 0.5}}}, {1.0}};
    PolylineMeasure<2> nu;
    nu.vertices = {{{0.1, 0.2}}, {{0.8, 0.9}}};
    nu.densities = {1.0};
    SolverConfig inner;
    inner.method = SolveMethod::hybrid;
    inner.grad_tol = 1e-9;
    ShapeConfig cfg;
    cfg.outer_max = 50;
    cfg.grad_tol_inf = 1e-12;  // run all 50 iterations
    auto r = optimize_polyline(mu, nu, inner, cfg);
    REQUIRE(r.history.size() >= 40);
    for (std::size_t k = 1; k < r.history.size(); ++k)
        CHECK(r.history[k].cost <= r.history[k - 1].cost + 1e-12);
    CHECK(r.history.back().cost < r.history.front().cost);
}

TEST_CASE("optimize_polyline is translation equivariant") {
    auto [mu, nu] = generic_instance<2>(25, 5, 407);
    nu.densities = density_from_lengths(nu.vertices);
    SolverConfig inner;
    inner.method = SolveMethod::hybrid;
    inner.grad_tol = 1e-10;
    ShapeConfig cfg;
    cfg.outer_max = 8;
    cfg.grad_tol_inf = 1e-9;

    auto base = optimize_polyline(mu, nu, inner, cfg);

    const Vec2 shift{{2.5, -1.25}};
    AtomicMeasure<2> mu2 = mu;
    for (auto& p : mu2.positions) p += shift;
    PolylineMeasure<2> nu2 = nu;
    for (auto& p : nu2.vertices) p += shift;
    auto moved = optimize_polyline(mu2, nu2, inner, cfg);

    REQUIRE(base.polyline.vertices.size() == moved.polyline.vertices.size());
    for (std::size_t v = 0; v < base.polyline.vertices.size(); ++v)
        for (int c = 0; c < 2; ++c)
            CHECK(moved.polyline.vertices[v][c] - shift[c] ==
                  doctest::Approx(base.polyline.vertices[v][c]).epsilon(1e-9));
}

TEST_CASE("metric entries follow the adjacent densities") {
    // endpoint vertices use half the single adjacent density; interior
    // vertices average both. Checked through the step actually taken.
    AtomicMeasure<2> mu{{{{0.5, 10.0}}}, {1.0}};
    PolylineMeasure<2> nu;
    nu.vertices = {{{0, 0}}, {{1, 0}}, {{3, 0}}};
    nu.densities = density_from_lengths(nu.vertices);
    DualPotential phi{0.0};
    auto oracle = build_oracle(mu, phi);
    auto trace = trace_polyline(mu, nu, phi, oracle);
    ShapeGradientOptions opt;
    opt.dual_tolerance = 1.0;
    auto g = shape_gradient(mu, nu, phi, trace, opt);
    // Sigma entries: vertex0 -> rho0/2, vertex1 -> (rho0+rho1)/2, vertex2 -> rho1/2
    CHECK(nu.densities[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    const double s0 = 0.5 * nu.densities[0];
    const double s1 = 0.5 * (nu.densities[0] + nu.densities[1]);
    const double s2 = 0.5 * nu.densities[1];
    CHECK(s0 > 0.0);
    CHECK(s1 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s2 > 0.0);
    CHECK(std::isfinite(g.total[0][0]));
}
