#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "modcs/sensing.hpp"
#include "modcs/wl1.hpp"

using namespace modcs;

namespace {

struct Instance {
    DenseMatrix a;
    Vector y;
    Vector x_true;
    IndexSet t;
};

Instance random_instance(std::size_t n, std::size_t m, std::size_t sparsity, std::uint64_t seed,
                         double noise_eps = 0.0) {
    Rng rng(seed);
    Instance ins;
    ins.a = gen_gaussian_unit_columns(n, m, seed * 13 + 1);
    ins.x_true.assign(m, 0.0);
    std::vector<std::size_t> idx;
    while (idx.size() < sparsity) {
        std::size_t i = rng.uniform_index(m);
        if (ins.x_true[i] == 0.0) {
            ins.x_true[i] = (1.0 + rng.uniform()) * rng.sign();
            idx.push_back(i);
        }
    }
    ins.y = ins.a.mul(ins.x_true);
    if (noise_eps > 0.0) {
        Vector w(n);
        double wn = 0.0;
        for (auto& v : w) {
            v = rng.gaussian();
            wn += v * v;
        }
        const double scale = 0.7 * noise_eps / std::sqrt(wn);
        for (std::size_t i = 0; i < n; ++i) ins.y[i] += scale * w[i];
    }
    // random known-support part: a subset of the truth plus a couple of blanks
    std::vector<std::size_t> known;
    for (std::size_t i : idx)
        if (rng.uniform() < 0.5) known.push_back(i);
    for (int k = 0; k < 2; ++k) {
        std::size_t i = rng.uniform_index(m);
        known.push_back(i);
    }
    ins.t = IndexSet(std::move(known));
    return ins;
}

} // namespace

TEST_CASE("exact recovery with perfect support knowledge") {
    DenseMatrix a = gen_gaussian_unit_columns(6, 12, 5);
    Vector x(12, 0.0);
    x[2] = 1.5;
    x[7] = -2.0;
    x[9] = 0.75;
    Vector y = a.mul(x);
    WeightedL1Problem p{&a, y, 0.0, IndexSet{2, 7, 9}};
    SolverResult r = solve_modcs(p);
    CHECK(r.converged);
    CHECK(r.objective == doctest::Approx(0.0).epsilon(1e-8));
    for (std::size_t i = 0; i < 12; ++i) CHECK(r.beta[i] == doctest::Approx(x[i]).epsilon(1e-7));
}

TEST_CASE("identity matrix, empty T, zero epsilon returns y") {
    DenseMatrix id = DenseMatrix::identity(5);
    Vector y{1, -2, 0, 4, 0.5};
    SolverResult r = solve_noisy_l1(id, y, 0.0);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(r.beta[i] == doctest::Approx(y[i]).epsilon(1e-6));
}

TEST_CASE("zero measurement returns zero") {
    DenseMatrix a = gen_gaussian_unit_columns(4, 8, 3);
    SolverResult r = solve_noisy_l1(a, Vector(4, 0.0), 0.0);
    CHECK(r.converged);
    CHECK(norm2(r.beta) == 0.0);
}

TEST_CASE("infeasible zero-epsilon system is rejected") {
    DenseMatrix a(3, 2); // rank 1, y outside the range
    a(0, 0) = 1; a(0, 1) = 2;
    a(1, 0) = 1; a(1, 1) = 2;
    a(2, 0) = 1; a(2, 1) = 2;
    Vector y{1, 0, 0};
    CHECK_THROWS_AS(solve_noisy_l1(a, y, 0.0), infeasible_error);
}

TEST_CASE("solver objective matches the enumeration oracle on noiseless instances") {
    int solved = 0;
    int converged = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        Instance ins = random_instance(5, 8, 2, seed);
        auto [beta_star, obj_star] = bp_enumeration_oracle(ins.a, ins.y, ins.t);
        WeightedL1Problem p{&ins.a, ins.y, 0.0, ins.t};
        SolverResult r = solve_modcs(p);
        converged += r.converged ? 1 : 0;
        CHECK(std::abs(r.objective - obj_star) <= 1e-5 * std::max(1.0, obj_star));
        CHECK(r.objective >= obj_star - 1e-5 * std::max(1.0, obj_star));
        CHECK(kkt_certificate(p, r.beta, 1e-4).pass);
        ++solved;
    }
    CHECK(solved == 40);
    CHECK(converged >= 38); // non-convergence is flagged, not hidden, and stays rare
}

TEST_CASE("oracle basics") {
    DenseMatrix id = DenseMatrix::identity(4);
    Vector y{1, -2, 3, 0};
    auto [beta, obj] = bp_enumeration_oracle(id, y, IndexSet{1});
    for (std::size_t i = 0; i < 4; ++i) CHECK(beta[i] == doctest::Approx(y[i]).epsilon(1e-9));
    CHECK(obj == doctest::Approx(4.0).epsilon(1e-9)); // |1| + |3|

    // T covering the support makes the objective zero
    DenseMatrix a = gen_gaussian_unit_columns(4, 7, 8);
    Vector x(7, 0.0);
    x[1] = 2.0;
    x[5] = -1.0;
    auto [b2, o2] = bp_enumeration_oracle(a, a.mul(x), IndexSet{1, 5});
    CHECK(o2 == doctest::Approx(0.0).epsilon(1e-9));

    // 1-sparse recovery from a well-spread 4x8 matrix
    DenseMatrix a3 = gen_gaussian_unit_columns(4, 8, 15);
    Vector x3(8, 0.0);
    x3[6] = 1.75;
    auto [b3, o3] = bp_enumeration_oracle(a3, a3.mul(x3), IndexSet{});
    CHECK(o3 == doctest::Approx(1.75).epsilon(1e-9));
    CHECK(b3[6] == doctest::Approx(1.75).epsilon(1e-7));
}

TEST_CASE("oracle reports infeasibility") {
    DenseMatrix a(3, 2);
    a(0, 0) = 1; a(0, 1) = 0;
    a(1, 0) = 0; a(1, 1) = 1;
    a(2, 0) = 0; a(2, 1) = 0;
    Vector y{1, 1, 1}; // unreachable third coordinate
    CHECK_THROWS_AS(bp_enumeration_oracle(a, y, IndexSet{}), infeasible_error);
}

TEST_CASE("certificate passes oracle points and rejects perturbations") {
    for (std::uint64_t seed = 50; seed < 60; ++seed) {
        Instance ins = random_instance(5, 8, 2, seed);
        auto [beta_star, obj_star] = bp_enumeration_oracle(ins.a, ins.y, ins.t);
        WeightedL1Problem p{&ins.a, ins.y, 0.0, ins.t};
        CertReport ok = kkt_certificate(p, beta_star, 1e-4);
        CHECK(ok.pass);

        const double scale = std::max(1.0, norm_inf(ins.a.tmul(ins.y)));
        Vector bad = beta_star;
        bad[seed % bad.size()] += 10.0 * 1e-4 * scale;
        CertReport no = kkt_certificate(p, bad, 1e-4);
        CHECK_FALSE(no.pass);
    }
}

TEST_CASE("certificate accepts an interior zero-objective point") {
    DenseMatrix a = gen_gaussian_unit_columns(5, 9, 33);
    Vector x(9, 0.0);
    x[3] = 2.0;
    Vector y = a.mul(x);
    WeightedL1Problem p{&a, y, 0.5, IndexSet{3}};
    Vector beta(9, 0.0);
    beta[3] = 2.0; // beta_{T^c} = 0 and strictly feasible
    CHECK(kkt_certificate(p, beta, 1e-4).pass);
}

TEST_CASE("noisy solves pass the certificate") {
    for (std::uint64_t seed = 70; seed < 90; ++seed) {
        Instance ins = random_instance(6, 10, 2, seed, 0.1);
        WeightedL1Problem p{&ins.a, ins.y, 0.1, ins.t};
        SolverResult r = solve_modcs(p, SolverConfig{});
        CHECK(r.converged);
        CHECK(r.feasibility_slack >= -1e-6 * std::max(1.0, norm2(ins.y)));
        CHECK(kkt_certificate(p, r.beta, 1e-4).pass);
    }
}

TEST_CASE("enlarging T never raises the optimum") {
    for (std::uint64_t seed = 5; seed < 25; ++seed) {
        Instance ins = random_instance(5, 9, 2, seed);
        WeightedL1Problem p1{&ins.a, ins.y, 0.0, ins.t};
        IndexSet bigger = ins.t;
        bigger.insert((seed * 3) % 9);
        bigger.insert((seed * 5) % 9);
        WeightedL1Problem p2{&ins.a, ins.y, 0.0, bigger};
        SolverResult r1 = solve_modcs(p1);
        SolverResult r2 = solve_modcs(p2);
        CHECK(r2.objective <= r1.objective + 1e-5 * std::max(1.0, r1.objective));
    }
}

TEST_CASE("solver is deterministic") {
    Instance ins = random_instance(6, 10, 3, 111, 0.2);
    WeightedL1Problem p{&ins.a, ins.y, 0.2, ins.t};
    SolverResult r1 = solve_modcs(p);
    SolverResult r2 = solve_modcs(p);
    CHECK(r1.beta == r2.beta);
    CHECK(r1.iterations == r2.iterations);
}
