#include <doctest.h>

#include <cmath>
#include <random>

#include "aodmap/error.hpp"
#include "aodmap/lattice.hpp"
#include "aodmap/posterior.hpp"
#include "aodmap/rng.hpp"
#include "fixtures.hpp"

using namespace aodmap;
using fixtures::rel_err;

TEST_SUITE("lattice") {
    TEST_CASE("2x2 lattice has four edges and only corners") {
        const auto lat = build_lattice(2, 2);
        CHECK(lat.edges().size() == 4);
        for (int p = 0; p < 4; ++p) CHECK(lat.neighbor_count(p) == 2);
    }

    TEST_CASE("3x3 lattice neighbour counts") {
        const auto lat = build_lattice(3, 3);
        CHECK(lat.edges().size() == 12);
        CHECK(lat.neighbor_count(4) == 4);
        for (int p : {0, 2, 6, 8}) CHECK(lat.neighbor_count(p) == 2);
        for (int p : {1, 3, 5, 7}) CHECK(lat.neighbor_count(p) == 3);
    }

    TEST_CASE("degenerate dimensions are rejected") {
        CHECK_THROWS_AS(build_lattice(2, 1), ConfigError);
        CHECK_THROWS_AS(build_lattice(1, 5), ConfigError);
        CHECK_THROWS_AS(build_lattice(0, 0), ConfigError);
    }

    TEST_CASE("edge count, symmetry and degree bounds on random shapes") {
        std::mt19937 rng(7);
        std::uniform_int_distribution<int> dim(2, 40);
        for (int trial = 0; trial < 200; ++trial) {
            const int w = dim(rng), h = dim(rng);
            const auto lat = build_lattice(w, h);
            REQUIRE(lat.edges().size() == static_cast<std::size_t>(w * (h - 1) + h * (w - 1)));
            int degree_sum = 0;
            for (int p = 0; p < w * h; ++p) {
                const int n = lat.neighbor_count(p);
                CHECK(n >= 2);
                CHECK(n <= 4);
                degree_sum += n;
                for (int q : lat.neighbors(p)) {
                    const auto back = lat.neighbors(q);
                    CHECK(std::find(back.begin(), back.end(), p) != back.end());
                    CHECK(std::abs(lat.x_of(p) - lat.x_of(q)) + std::abs(lat.y_of(p) - lat.y_of(q)) == 1);
                }
            }
            CHECK(degree_sum == 2 * static_cast<int>(lat.edges().size()));
            for (const auto& e : lat.edges()) CHECK(e.a < e.b);
        }
    }
}

TEST_SUITE("misfit") {
    TEST_CASE("exact reproduction gives zero misfit") {
        auto rp = fixtures::random_problem(3, 3, 3, 5, 3);
        for (int p = 0; p < rp.scene.regions(); ++p) {
            const auto l = rp.forward.radiance(rp.state.tau[p], rp.state.theta_row(p));
            std::copy(l.begin(), l.end(), rp.scene.radiance.begin() + p * rp.scene.channels);
        }
        for (int p = 0; p < rp.scene.regions(); ++p)
            CHECK(chi_square_region(rp.scene, rp.state, rp.forward, p) == 0.0);
    }

    TEST_CASE("single channel arithmetic") {
        RadianceTable t;
        t.tau_knots = {0.0, 6.0};
        t.components = 2;
        t.channels = 1;
        t.values = {0.2, 0.2, 0.2, 0.2};  // flat curves at 0.2
        const TableForwardModel fwd(t);
        Scene s;
        s.width = s.height = 2;
        s.channels = 1;
        s.channel_mask = {true};
        s.radiance = {0.7, 0.2, 0.2, 0.2};
        RetrievalState st;
        st.components = 2;
        st.tau = {0.1, 0.1, 0.1, 0.1};
        st.theta = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
        st.sigma2 = {0.25};
        CHECK(chi_square_region(s, st, fwd, 0) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(chi_square_region(s, st, fwd, 1) < 1e-30);
    }

    TEST_CASE("regional misfit matches the direct-summation oracle") {
        for (const auto& j : fixtures::oracle()["posterior_cases"]) {
            const auto oc = fixtures::load_case(j);
            const auto& want = (*oc.expected)["chi2"];
            for (int p = 0; p < oc.scene.regions(); ++p)
                CHECK(rel_err(chi_square_region(oc.scene, oc.state, oc.forward, p), want[p].get<double>()) < 1e-12);
        }
    }

    TEST_CASE("36-channel case matches the oracle") {
        const auto& j = fixtures::oracle()["posterior_cases"][1];
        REQUIRE(j["channels"].get<int>() == 36);
        const auto oc = fixtures::load_case(j);
        for (int p = 0; p < oc.scene.regions(); ++p)
            CHECK(rel_err(chi_square_region(oc.scene, oc.state, oc.forward, p),
                          (*oc.expected)["chi2"][p].get<double>()) < 1e-12);
    }
}

TEST_SUITE("log_posterior") {
    TEST_CASE("every term matches the term-by-term oracle") {
        const auto& cases = fixtures::oracle()["posterior_cases"];
        REQUIRE(cases.size() >= 50);
        for (const auto& j : cases) {
            const auto oc = fixtures::load_case(j);
            const auto t = posterior_terms(oc.scene, oc.state, oc.hyper, oc.forward, oc.lattice);
            const auto& e = (*oc.expected)["terms"];
            CHECK(rel_err(t.kappa_norm, e["kappa_norm"]) < 1e-12);
            CHECK(rel_err(t.noise_norm, e["noise_norm"]) < 1e-12);
            CHECK(rel_err(t.misfit, e["misfit"]) < 1e-12);
            CHECK(rel_err(t.smoothness, e["smoothness"]) < 1e-12);
            CHECK(rel_err(t.dirichlet, e["dirichlet"]) < 1e-12);
            CHECK(rel_err(t.gamma_norm, e["gamma_norm"]) < 1e-12);
            CHECK(rel_err(log_posterior(oc.scene, oc.state, oc.hyper, oc.forward, oc.lattice),
                          (*oc.expected)["total"]) < 1e-10);
        }
    }

    TEST_CASE("small P = 9, C = 4, M = 3 scene") {
        const auto& j = fixtures::oracle()["posterior_cases"][0];
        REQUIRE(j["width"].get<int>() * j["height"].get<int>() == 9);
        const auto oc = fixtures::load_case(j);
        CHECK(oc.scene.channels == 4);
        CHECK(oc.state.components == 3);
        CHECK(rel_err(log_posterior(oc.scene, oc.state, oc.hyper, oc.forward, oc.lattice),
                      (*oc.expected)["total"]) < 1e-10);
    }

    TEST_CASE("zero composition entries are evaluated through the floor") {
        const auto& j = fixtures::oracle()["posterior_cases"][2];
        const auto oc = fixtures::load_case(j);
        REQUIRE(oc.state.theta[1] == 0.0);
        const double f = log_posterior(oc.scene, oc.state, oc.hyper, oc.forward, oc.lattice);
        CHECK(std::isfinite(f));
        CHECK(rel_err(f, (*oc.expected)["total"]) < 1e-10);
    }

    TEST_CASE("uniform alpha makes the composition term vanish") {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            auto rp = fixtures::random_problem(seed, 3, 4, 6, 4);
            rp.hyper = HyperParams::uniform(4);
            CHECK(posterior_terms(rp.scene, rp.state, rp.hyper, rp.forward, rp.lattice).dirichlet == 0.0);
        }
    }

    TEST_CASE("doubling every difference quadruples the smoothness penalty") {
        auto rp = fixtures::random_problem(5, 4, 4, 3, 3);
        const double a = posterior_terms(rp.scene, rp.state, rp.hyper, rp.forward, rp.lattice).smoothness;
        // Scale around tau_0 so all pairwise differences double.
        const double t0 = rp.state.tau[0];
        for (double& t : rp.state.tau) t = t0 + 2.0 * (t - t0);
        for (double& t : rp.state.tau) t += 2.0;  // keep in range; shifts leave differences alone
        const double b = posterior_terms(rp.scene, rp.state, rp.hyper, rp.forward, rp.lattice).smoothness;
        CHECK(b == doctest::Approx(4.0 * a).epsilon(1e-12));
    }

    TEST_CASE("additivity: misfit term is the negated sum of regional misfits") {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto rp = fixtures::random_problem(seed, 2 + seed % 4, 2 + seed % 3, 1 + seed % 7, 2 + seed % 5);
            double sum = 0.0;
            for (int p = 0; p < rp.scene.regions(); ++p) sum += chi_square_region(rp.scene, rp.state, rp.forward, p);
            CHECK(posterior_terms(rp.scene, rp.state, rp.hyper, rp.forward, rp.lattice).misfit ==
                  doctest::Approx(-sum).epsilon(1e-13));
        }
    }
}

namespace {

// The same scene with channel c dropped from every table.
struct Dropped {
    Scene scene;
    TableForwardModel forward;
    RetrievalState state;
};

Dropped drop_channel(const fixtures::RandomProblem& rp, int drop) {
    const auto& t = rp.forward.table();
    RadianceTable nt = t;
    nt.channels = t.channels - 1;
    nt.values.clear();
    for (int m = 0; m < t.components; ++m)
        for (int k = 0; k < t.knots(); ++k)
            for (int c = 0; c < t.channels; ++c)
                if (c != drop) nt.values.push_back(t.value(m, k, c));
    Dropped d{rp.scene, TableForwardModel(nt), rp.state};
    d.scene.channels -= 1;
    d.scene.channel_mask.assign(static_cast<std::size_t>(d.scene.channels), true);
    d.scene.radiance.clear();
    for (int p = 0; p < rp.scene.regions(); ++p)
        for (int c = 0; c < rp.scene.channels; ++c)
            if (c != drop) d.scene.radiance.push_back(rp.scene.at(p, c));
    d.state.sigma2.erase(d.state.sigma2.begin() + drop);
    return d;
}

}  // namespace

TEST_CASE("masking a channel equals deleting it") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        auto rp = fixtures::random_problem(seed, 3, 3, 5, 3);
        const int drop = static_cast<int>(seed % 5);
        const auto d = drop_channel(rp, drop);
        rp.scene.channel_mask[drop] = false;
        const auto a = posterior_terms(rp.scene, rp.state, rp.hyper, rp.forward, rp.lattice);
        const auto b = posterior_terms(d.scene, d.state, rp.hyper, d.forward, rp.lattice);
        CHECK(a.misfit == b.misfit);
        CHECK(a.noise_norm == b.noise_norm);
        CHECK(a.total() == b.total());
        for (int p = 0; p < rp.scene.regions(); ++p)
            CHECK(chi_square_region(rp.scene, rp.state, rp.forward, p) ==
                  chi_square_region(d.scene, d.state, d.forward, p));
    }
}

TEST_SUITE("deltas") {
    TEST_CASE("identity changes give zero") {
        const auto rp = fixtures::random_problem(11, 3, 3, 4, 3);
        for (int p = 0; p < 9; ++p) {
            CHECK(delta_log_posterior_tau(rp.scene, rp.state, rp.forward, rp.lattice, p, rp.state.tau[p]) == 0.0);
            CHECK(delta_log_posterior_theta(rp.scene, rp.state, rp.hyper, rp.forward, p, rp.state.theta_row(p)) == 0.0);
        }
    }

    TEST_CASE("with kappa = 0 the tau delta is the misfit change only") {
        auto rp = fixtures::random_problem(12, 3, 3, 4, 3);
        rp.state.kappa = 0.0;
        for (int p = 0; p < 9; ++p) {
            const double before = chi_square_region(rp.scene, rp.state, rp.forward, p);
            auto moved = rp.state;
            moved.tau[p] = 0.9;
            const double after = chi_square_region(rp.scene, moved, rp.forward, p);
            CHECK(delta_log_posterior_tau(rp.scene, rp.state, rp.forward, rp.lattice, p, 0.9) ==
                  doctest::Approx(before - after).epsilon(1e-14));
        }
    }

    TEST_CASE("with uniform alpha the theta delta is the misfit change only") {
        auto rp = fixtures::random_problem(13, 3, 3, 4, 3);
        rp.hyper = HyperParams::uniform(3);
        const std::vector<double> row = {0.2, 0.5, 0.3};
        for (int p = 0; p < 9; ++p) {
            auto moved = rp.state;
            std::copy(row.begin(), row.end(), moved.theta_row(p).begin());
            const double d = chi_square_region(rp.scene, rp.state, rp.forward, p) -
                             chi_square_region(rp.scene, moved, rp.forward, p);
            CHECK(delta_log_posterior_theta(rp.scene, rp.state, rp.hyper, rp.forward, p, row) ==
                  doctest::Approx(d).epsilon(1e-14));
        }
    }

    TEST_CASE("single-coordinate deltas equal full re-evaluation") {
        Rng rng(99);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::gamma_distribution<double> g(0.5, 1.0);
        for (std::uint64_t seed = 1; seed <= 60; ++seed) {
            const int w = 2 + static_cast<int>(seed % 4), h = 2 + static_cast<int>((seed / 4) % 4);
            const int M = 2 + static_cast<int>(seed % 6);
            const auto rp = fixtures::random_problem(seed, w, h, 1 + static_cast<int>(seed % 9), M);
            const double f0 = log_posterior(rp.scene, rp.state, rp.hyper, rp.forward, rp.lattice);
            for (int trial = 0; trial < 10; ++trial) {
                const int p = static_cast<int>(u(rng) * rp.scene.regions());
                const double t_new = 6.0 * u(rng);
                auto a = rp.state;
                a.tau[p] = t_new;
                const double full_t = log_posterior(rp.scene, a, rp.hyper, rp.forward, rp.lattice) - f0;
                CHECK(std::abs(delta_log_posterior_tau(rp.scene, rp.state, rp.forward, rp.lattice, p, t_new) - full_t) <
                      1e-9);

                std::vector<double> row(M);
                double s = 0.0;
                for (double& v : row) s += (v = g(rng));
                for (double& v : row) v /= s;
                project_to_simplex_floor(row);
                auto b = rp.state;
                std::copy(row.begin(), row.end(), b.theta_row(p).begin());
                const double full_th = log_posterior(rp.scene, b, rp.hyper, rp.forward, rp.lattice) - f0;
                CHECK(std::abs(delta_log_posterior_theta(rp.scene, rp.state, rp.hyper, rp.forward, p, row) - full_th) <
                      1e-9);

                auto c = a;
                std::copy(row.begin(), row.end(), c.theta_row(p).begin());
                const double full_r = log_posterior(rp.scene, c, rp.hyper, rp.forward, rp.lattice) - f0;
                CHECK(std::abs(delta_log_posterior_region(rp.scene, rp.state, rp.hyper, rp.forward, rp.lattice, p,
                                                          t_new, row) -
                               full_r) < 1e-9);
            }
        }
    }
}

TEST_SUITE("validation") {
    TEST_CASE("scene invariants") {
        auto rp = fixtures::random_problem(1, 2, 2, 3, 2);
        CHECK_NOTHROW(validate(rp.scene));
        auto s = rp.scene;
        s.radiance[0] = -1.0;
        CHECK_THROWS_AS(validate(s), ConfigError);
        s = rp.scene;
        s.radiance[1] = std::nan("");
        CHECK_THROWS_AS(validate(s), ConfigError);
        s = rp.scene;
        s.channel_mask.assign(3, false);
        CHECK_THROWS_AS(validate(s), ConfigError);
    }

    TEST_CASE("state invariants") {
        const auto rp = fixtures::random_problem(2, 3, 3, 3, 3);
        CHECK_NOTHROW(validate(rp.state, rp.scene, rp.hyper));
        auto st = rp.state;
        st.tau[2] = 6.5;
        CHECK_THROWS_AS(validate(st, rp.scene, rp.hyper), DomainError);
        st = rp.state;
        st.theta[0] += 0.1;
        CHECK_THROWS_AS(validate(st, rp.scene, rp.hyper), DomainError);
        st = rp.state;
        st.sigma2[0] = 0.0;
        CHECK_THROWS_AS(validate(st, rp.scene, rp.hyper), DomainError);
        st = rp.state;
        st.kappa = -1.0;
        CHECK_THROWS_AS(validate(st, rp.scene, rp.hyper), DomainError);
    }

    TEST_CASE("alpha must be positive") {
        auto h = HyperParams::uniform(3);
        h.alpha[1] = 0.0;
        CHECK_THROWS_AS(validate(h), ConfigError);
    }

    TEST_CASE("floor projection keeps rows on the simplex") {
        std::vector<double> row = {0.0, 0.0, 1.0};
        project_to_simplex_floor(row);
        double s = 0.0;
        for (double v : row) {
            CHECK(v >= kThetaFloor * (1.0 - 1e-9));  // clamped, then renormalized
            s += v;
        }
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
}
