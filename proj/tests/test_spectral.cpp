#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "beamlab/spectral.hpp"
#include "oracle.hpp"

using namespace beamlab;

TEST_CASE("quadruple sine integral matches frozen closed-form cases") {
    CHECK(quadruple_sine_integral(1, 1, 1, 1) == 3.0);
    CHECK(quadruple_sine_integral(2, 2, 2, 2) == 3.0);
    CHECK(quadruple_sine_integral(1, 1, 1, 3) == -1.0);
    CHECK(quadruple_sine_integral(1, 1, 2, 4) == -1.0);
    CHECK(quadruple_sine_integral(1, 1, 3, 3) == 2.0);
    CHECK(quadruple_sine_integral(1, 2, 2, 3) == 1.0);
    CHECK(quadruple_sine_integral(1, 2, 3, 4) == 1.0);
    CHECK(quadruple_sine_integral(1, 2, 4, 7) == -1.0);
    CHECK(quadruple_sine_integral(1, 3, 5, 7) == 1.0);
    CHECK(quadruple_sine_integral(1, 2, 3, 5) == 0.0);
    CHECK(quadruple_sine_integral(2, 3, 5, 9) == 0.0);

    // Each frozen value double-checked against quadrature.
    for (auto [p, q, r, s] : {std::array{1, 1, 1, 3}, std::array{1, 1, 2, 4},
                              std::array{1, 2, 2, 3}, std::array{1, 2, 4, 7}})
        CHECK(quadruple_sine_integral(p, q, r, s) ==
              doctest::Approx(oracle::quadruple_sine(p, q, r, s, 20000)).epsilon(1e-10));
}

TEST_CASE("quadruple sine integral agrees with quadrature on random quadruples") {
    std::mt19937 rng(20250814);
    std::uniform_int_distribution<int> idx(1, 12);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = idx(rng), q = idx(rng), r = idx(rng), s = idx(rng);
        CAPTURE(p);
        CAPTURE(q);
        CAPTURE(r);
        CAPTURE(s);
        CHECK(quadruple_sine_integral(p, q, r, s) ==
              doctest::Approx(oracle::quadruple_sine(p, q, r, s, 20000)).epsilon(1e-8));
    }
}

TEST_CASE("quadruple sine integral is invariant under all argument permutations") {
    for (auto quad : {std::array{1, 1, 2, 4}, std::array{1, 2, 3, 4}, std::array{2, 3, 3, 8},
                      std::array{1, 1, 1, 3}}) {
        std::sort(quad.begin(), quad.end());
        const double ref = quadruple_sine_integral(quad[0], quad[1], quad[2], quad[3]);
        do {
            CHECK(quadruple_sine_integral(quad[0], quad[1], quad[2], quad[3]) == ref);
        } while (std::next_permutation(quad.begin(), quad.end()));
    }
}

TEST_CASE("cubic tensor stores exactly the nonzero quadruples") {
    const CubicCouplingTensor t1 = build_cubic_tensor(1);
    CHECK(t1.entries.size() == 1);
    CHECK(t1.value(1, 1, 1, 1) == 3.0);

    const CubicCouplingTensor t3 = build_cubic_tensor(3);
    CHECK(t3.value(1, 1, 1, 3) == -1.0);
    CHECK(t3.value(3, 1, 1, 1) == -1.0);
    CHECK(t3.value(2, 2, 2, 2) == 3.0);

    const CubicCouplingTensor t6 = build_cubic_tensor(6);
    for (int p = 1; p <= 6; ++p)
        for (int q = p; q <= 6; ++q)
            for (int r = q; r <= 6; ++r)
                for (int s = r; s <= 6; ++s) {
                    CAPTURE(p);
                    CAPTURE(q);
                    CAPTURE(r);
                    CAPTURE(s);
                    const double stored = t6.value(p, q, r, s);
                    if (stored != 0.0)
                        CHECK((stored == -1.0 || stored == 1.0 || stored == 2.0 ||
                               stored == 3.0));
                    CHECK(stored ==
                          doctest::Approx(oracle::quadruple_sine(p, q, r, s, 20000))
                              .epsilon(1e-10));
                }
}

TEST_CASE("tensor construction enforces the mode cap") {
    CHECK_THROWS_AS(build_cubic_tensor(max_mode_count() + 1), ResourceError);
    CHECK_THROWS_AS(build_cubic_tensor(0), std::invalid_argument);
}

TEST_CASE("cubic projection reproduces the sine-cube identity") {
    // sin³x = (3 sin x − sin 3x)/4
    const ModeVector proj = project_nonlinearity(NonlinearitySpec::cubic(), {1.0, 0.0, 0.0});
    CHECK(proj[0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(proj[1] == 0.0);
    CHECK(proj[2] == doctest::Approx(-0.25).epsilon(1e-14));
}

TEST_CASE("positive part projection of a single-signed first mode") {
    const NonlinearitySpec f = NonlinearitySpec::positive_part(3.0);
    const ModeVector pos = project_nonlinearity(f, {2.5, 0.0, 0.0, 0.0});
    CHECK(pos[0] == doctest::Approx(7.5).epsilon(1e-12));
    for (int n = 2; n <= 4; ++n) CHECK(std::abs(pos[n - 1]) < 1e-12);

    // A sin x < 0 on (0,π), so u⁺ vanishes identically.
    const ModeVector neg = project_nonlinearity(f, {-2.5, 0.0, 0.0, 0.0});
    for (double v : neg) CHECK(v == 0.0);
}

TEST_CASE("cubic tensor contraction equals direct quadrature on random vectors") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_int_distribution<int> size(1, 8);
    for (int trial = 0; trial < 50; ++trial) {
        const int N = size(rng);
        ModeVector u(N);
        for (double& v : u) v = coeff(rng);
        const ModeVector got = project_nonlinearity(NonlinearitySpec::cubic(), u);
        const ModeVector want = oracle::project(NonlinearitySpec::cubic(), u, 4000);
        for (int n = 1; n <= N; ++n) {
            CAPTURE(trial);
            CAPTURE(n);
            CHECK(got[n - 1] == doctest::Approx(want[n - 1]).epsilon(1e-8).scale(1.0));
        }
    }
}

TEST_CASE("non-smooth projections agree with trapezoid quadrature") {
    // The default panel count resolves generic u⁺ kinks to ~1e-5 (the kink
    // sits inside a Gauss-Legendre panel); (u⁺)³ is C² so its default-rule
    // error is far smaller.  A refined rule must converge to the oracle.
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    const struct {
        NonlinearitySpec f;
        double default_tol;
    } kinds[] = {
        {NonlinearitySpec::positive_part(1.7), 1e-4},
        {NonlinearitySpec::positive_cubic(), 1e-7},
    };
    for (const auto& [f, default_tol] : kinds) {
        const NonlinearProjector coarse(f, 6);
        const NonlinearProjector fine(f, 6, 8192);
        for (int trial = 0; trial < 10; ++trial) {
            ModeVector u(6);
            for (double& v : u) v = coeff(rng);
            const ModeVector got = coarse.project(u);
            const ModeVector refined = fine.project(u);
            const ModeVector want = oracle::project(f, u, 200000);
            for (int n = 1; n <= 6; ++n) {
                CAPTURE(trial);
                CAPTURE(n);
                CHECK(got[n - 1] ==
                      doctest::Approx(want[n - 1]).epsilon(default_tol).scale(1.0));
                CHECK(refined[n - 1] == doctest::Approx(want[n - 1]).epsilon(1e-8).scale(1.0));
            }
        }
    }
}

TEST_CASE("potential integral matches closed forms and quadrature") {
    const NonlinearProjector cubic(NonlinearitySpec::cubic(), 3);
    const ModeVector e1{1.0, 0.0, 0.0};
    // ∫ sin⁴x/4 dx = 3π/32
    CHECK(cubic.potential_integral(e1.data()) ==
          doctest::Approx(3.0 * pi / 32.0).epsilon(1e-14));

    const NonlinearProjector pos(NonlinearitySpec::positive_part(2.0), 3);
    const ModeVector neg{-1.0, 0.0, 0.0};
    CHECK(pos.potential_integral(neg.data()) == 0.0);
    // μ/2 ∫ sin²x dx = μπ/4
    CHECK(pos.potential_integral(e1.data()) == doctest::Approx(2.0 * pi / 4.0).epsilon(1e-12));

    std::mt19937 rng(13);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    const NonlinearProjector pcub(NonlinearitySpec::positive_cubic(), 5);
    for (int trial = 0; trial < 5; ++trial) {
        ModeVector u(5);
        for (double& v : u) v = coeff(rng);
        CHECK(pcub.potential_integral(u.data()) ==
              doctest::Approx(oracle::potential(NonlinearitySpec::positive_cubic(), u, 200000))
                  .epsilon(1e-7));
    }
}

TEST_CASE("field evaluation sums the sine series pointwise") {
    CHECK(evaluate_field({1.0}, {pi / 2.0})[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(evaluate_field({0.0, 1.0}, {pi / 2.0})[0]) < 1e-15);
    CHECK(evaluate_field({1.0, 1.0}, {pi / 4.0})[0] ==
          doctest::Approx(std::sqrt(2.0) / 2.0 + 1.0).epsilon(1e-15));
}

TEST_CASE("influence sets follow the coupling rules and exclude sources") {
    CHECK(influence_set({2}) == std::set<int>{6});
    CHECK(influence_set({1, 2}) == std::set<int>{3, 4, 5});
    CHECK(influence_set({1, 2, 3}) == std::set<int>{4, 6});
    CHECK(influence_set({3}) == std::set<int>{9});
    CHECK_THROWS_AS(influence_set({2, 2}), std::invalid_argument);
    CHECK_THROWS_AS(influence_set({}), std::invalid_argument);
    CHECK_THROWS_AS(influence_set({1, 2, 3, 4}), std::invalid_argument);
}

TEST_CASE("influence preserves parity of the source set") {
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> half(1, 10);
    for (int parity : {0, 1}) { // 0: all-even sources, 1: all-odd sources
        for (int trial = 0; trial < 20; ++trial) {
            std::set<int> src;
            while (src.size() < 3) src.insert(2 * half(rng) - parity);
            const std::vector<int> sources(src.begin(), src.end());
            for (int k : influence_set(sources)) {
                CAPTURE(parity);
                CAPTURE(trial);
                CHECK(k % 2 == parity);
            }
        }
    }
}

TEST_CASE("all three nonlinearities are non-decreasing with nonnegative potential") {
    for (const NonlinearitySpec& f :
         {NonlinearitySpec::positive_part(0.5), NonlinearitySpec::cubic(),
          NonlinearitySpec::positive_cubic()}) {
        CHECK(f.f(0.0) == 0.0);
        double prev = f.f(-5.0);
        for (double s = -5.0; s <= 5.0; s += 0.01) {
            CHECK(f.f(s) >= prev);
            CHECK(f.F(s) >= 0.0);
            prev = f.f(s);
        }
    }
}

TEST_CASE("Gauss-Legendre rule integrates high-degree polynomials exactly") {
    std::vector<double> nodes, weights;
    gauss_legendre(8, nodes, weights);
    REQUIRE(nodes.size() == 8);
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-15));
    // Exact through degree 2·8−1 = 15: ∫_{-1}^{1} x^14 dx = 2/15.
    double m14 = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) m14 += weights[i] * std::pow(nodes[i], 14);
    CHECK(m14 == doctest::Approx(2.0 / 15.0).epsilon(1e-14));
    double m15 = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) m15 += weights[i] * std::pow(nodes[i], 15);
    CHECK(std::abs(m15) < 1e-15);
}
