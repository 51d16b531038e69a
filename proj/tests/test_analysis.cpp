#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "modcs/analysis.hpp"
#include "modcs/sensing.hpp"
#include "modcs/wl1.hpp"

using namespace modcs;

namespace {

// Independent RIC oracle: recursive subset enumeration (different order) and
// Jacobi eigenvalues of the Gram matrix (different numerical path).
void gram_eigen_range(const DenseMatrix& g, double& lo, double& hi) {
    const std::size_t n = g.rows();
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = g(i, j);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p * n + q] == 0.0) continue;
                const double theta = 0.5 * std::atan2(2.0 * a[p * n + q], a[q * n + q] - a[p * n + p]);
                const double c = std::cos(theta), s = std::sin(theta);
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
    }
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, a[i * n + i]);
        hi = std::max(hi, a[i * n + i]);
    }
}

void ric_recursive(const DenseMatrix& a, std::vector<std::size_t>& pick, std::size_t next,
                   std::size_t S, double& min_sq, double& max_sq) {
    if (pick.size() == S) {
        DenseMatrix sub = columns(a, IndexSet(pick));
        double lo, hi;
        gram_eigen_range(gram(sub), lo, hi);
        min_sq = std::min(min_sq, lo);
        max_sq = std::max(max_sq, hi);
        return;
    }
    for (std::size_t i = next; i < a.cols(); ++i) {
        pick.push_back(i);
        ric_recursive(a, pick, i + 1, S, min_sq, max_sq);
        pick.pop_back();
    }
}

RipEstimate ric_oracle(const DenseMatrix& a, std::size_t S) {
    double min_sq = std::numeric_limits<double>::infinity(), max_sq = 0.0;
    std::vector<std::size_t> pick;
    ric_recursive(a, pick, 0, S, min_sq, max_sq);
    RipEstimate e;
    e.S = S;
    e.delta_left = 1.0 - min_sq;
    e.delta_right = max_sq - 1.0;
    e.delta = std::max(e.delta_left, e.delta_right);
    return e;
}

DenseMatrix random_orthonormal(std::size_t n, std::uint64_t seed) {
    // QR of a Gaussian square matrix via Gram-Schmidt
    Rng rng(seed);
    DenseMatrix a(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        Vector v(n);
        for (auto& x : v) x = rng.gaussian();
        for (std::size_t prev = 0; prev < c; ++prev) {
            double d = 0.0;
            for (std::size_t r = 0; r < n; ++r) d += a(r, prev) * v[r];
            for (std::size_t r = 0; r < n; ++r) v[r] -= d * a(r, prev);
        }
        const double nv = norm2(v);
        for (std::size_t r = 0; r < n; ++r) a(r, c) = v[r] / nv;
    }
    return a;
}

} // namespace

TEST_CASE("ric on orthonormal and degenerate matrices") {
    DenseMatrix q = random_orthonormal(8, 4);
    for (std::size_t S : {1u, 2u, 4u}) {
        RipEstimate e = ric_bruteforce(q, S);
        CHECK(std::abs(e.delta) < 1e-10);
    }

    DenseMatrix dup(4, 5);
    Rng rng(5);
    for (std::size_t c = 0; c < 4; ++c) {
        Vector v(4);
        double nv = 0;
        for (auto& x : v) {
            x = rng.gaussian();
            nv += x * x;
        }
        for (std::size_t r = 0; r < 4; ++r) dup(r, c) = v[r] / std::sqrt(nv);
    }
    for (std::size_t r = 0; r < 4; ++r) dup(r, 4) = dup(r, 0); // duplicated column
    RipEstimate e2 = ric_bruteforce(dup, 2);
    CHECK(e2.delta_left == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ric matches the independent oracle and is monotone") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        DenseMatrix a = gen_gaussian_unit_columns(8, 12, seed);
        double prev = 0.0;
        for (std::size_t S = 1; S <= 4; ++S) {
            RipEstimate mine = ric_bruteforce(a, S);
            RipEstimate ref = ric_oracle(a, S);
            CHECK(mine.delta == doctest::Approx(ref.delta).epsilon(1e-9));
            CHECK(mine.delta_left == doctest::Approx(ref.delta_left).epsilon(1e-9));
            CHECK(mine.delta_right == doctest::Approx(ref.delta_right).epsilon(1e-9));
            CHECK(mine.delta >= prev - 1e-12);
            prev = mine.delta;
        }
    }
}

TEST_CASE("ric refuses beyond the budget") {
    DenseMatrix a = gen_gaussian_unit_columns(8, 30, 3);
    CHECK_THROWS_AS(ric_bruteforce(a, 15, 1000), budget_error);
}

TEST_CASE("roc basics and the theta <= delta inequality") {
    DenseMatrix q = random_orthonormal(8, 9);
    RocEstimate t = roc_bruteforce(q, 2, 2);
    CHECK(t.theta < 1e-10);

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        DenseMatrix a = gen_gaussian_unit_columns(8, 12, seed + 40);
        RocEstimate roc = roc_bruteforce(a, 1, 2);
        RipEstimate rip = ric_bruteforce(a, 3);
        CHECK(roc.theta <= rip.delta + 1e-12);
    }
}

TEST_CASE("roc with single columns equals mutual coherence") {
    DenseMatrix a = gen_gaussian_unit_columns(6, 9, 77);
    RocEstimate t = roc_bruteforce(a, 1, 1);
    double coherence = 0.0;
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j) {
            if (i == j) continue;
            coherence = std::max(coherence, std::abs(dot(a.column(i), a.column(j))));
        }
    CHECK(t.theta == doctest::Approx(coherence).epsilon(1e-10));
}

TEST_CASE("bound constants") {
    CHECK(c1_constant(0.207) == doctest::Approx(7.4992).epsilon(1e-4));
    CHECK(c1_constant(0.0) == doctest::Approx(4.0));
    CHECK(c1_constant(0.4) == doctest::Approx(4.0 * std::sqrt(1.4) / 0.2).epsilon(1e-12));
    CHECK_THROWS_AS(c1_constant(0.5), input_error);

    CHECK(ls_error_bound(0.0, 0.0, 1.0, 1.0) == doctest::Approx(2.0));
    CHECK(ls_error_bound(0.207, 0.207, 1.0, 0.0) == doctest::Approx(1.1229).epsilon(1e-4));
    CHECK(ls_error_bound(0.207, 0.207, 0.0, 1.0) == doctest::Approx(1.2610).epsilon(1e-4));
    CHECK(ls_error_bound(0.5, 0.0, 1.0, 0.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(ls_error_bound(1.0, 0.0, 1.0, 0.0), input_error);
}

TEST_CASE("theorem 3.2 checker") {
    DenseMatrix q = random_orthonormal(8, 21);
    RipAccess rip = RipAccess::exact(q);
    TheoremParams p;
    p.S = 2;
    p.S_a = 1;
    p.epsilon = 0.05;

    // zero signal: the small-entries condition is vacuous
    std::vector<Vector> zeros(4, Vector(8, 0.0));
    ConditionReport rep = check_theorem_general("3.2", p, rip, &zeros);
    CHECK(rep.pass());
    CHECK(rep.rip_verified);

    // wrong alpha fails condition 1
    TheoremParams bad = p;
    bad.alpha = 1.0;
    ConditionReport rep2 = check_theorem_general("3.2", bad, rip, &zeros);
    CHECK_FALSE(rep2.pass());
    bool cond1_failed = false;
    for (const auto& c : rep2.conditions)
        if (c.id == "1" && !c.pass) cond1_failed = true;
    CHECK(cond1_failed);
}

TEST_CASE("theorem 3.2 delta condition fails on a bad matrix") {
    DenseMatrix a = gen_gaussian_unit_columns(8, 16, 2); // delta_9 will exceed 0.207
    RipAccess rip = RipAccess::exact(a);
    TheoremParams p;
    p.S = 3;
    p.S_a = 1;
    p.epsilon = 0.01;
    std::vector<Vector> zeros(2, Vector(16, 0.0));
    ConditionReport rep = check_theorem_general("3.2", p, rip, &zeros);
    bool cond2 = false;
    for (const auto& c : rep.conditions)
        if (c.id == "2") {
            cond2 = true;
            CHECK(c.lhs > 0.207);
            CHECK_FALSE(c.pass);
        }
    CHECK(cond2);
    CHECK_FALSE(rep.pass());
}

TEST_CASE("model-1 theorem constants") {
    RipAccess rip = RipAccess::asserted({{100, 0.1}});
    TheoremParams p;
    p.S = 8;
    p.S_a = 1;
    p.epsilon = 0.1;
    p.r = 10.0;
    p.d = 4;

    p.d0 = 2;
    ConditionReport rep = check_theorem_model1("4.3", p, rip);
    CHECK(rep.derived.at("k1") == 2.0);
    ConditionReport rep48 = check_theorem_model1("4.8", p, rip);
    CHECK(rep48.derived.at("k2") == 1.0);
    CHECK(rep48.derived.at("k3") == doctest::Approx(1.0));

    p.d0 = 1;
    ConditionReport rep1 = check_theorem_model1("4.8", p, rip);
    CHECK(rep1.derived.at("k1") == 1.0);
    CHECK(rep1.derived.at("k2") == 0.0);
    CHECK(rep1.derived.at("k3") == 0.0);

    // zeta_M = sqrt(S_a), d0 = 2: G = (7.50 eps + 7.50 eps)/2 = 7.50 eps
    p.d0 = 2;
    p.zeta_m = 1.0; // sqrt(S_a) with S_a = 1
    ConditionReport repg = check_theorem_model1("4.3", p, rip);
    CHECK(repg.derived.at("G") == doctest::Approx(7.50 * p.epsilon).epsilon(1e-12));

    CHECK_THROWS_AS(check_theorem_model1("4.3", [&] {
                        TheoremParams q = p;
                        q.d0 = 5; // d0 > d
                        return q;
                    }(), rip),
                    input_error);
}

TEST_CASE("model-2 theorem checker matches the worked constants") {
    RipAccess rip = RipAccess::asserted({{1000, 0.1}});
    TheoremParams p;
    p.S = 20;
    p.S_a = 2;
    p.b = 3;
    p.d_min = 3;
    p.d0 = 2;
    p.a_min = 1.0;
    p.r_min = 1.0;
    p.epsilon = 0.5;
    p.f = p.S_a;

    // required RIC order is S + 15 S_a for b = 3, d0 = 2
    ConditionReport rep = check_theorem_model2("5.5", p, rip);
    bool found = false;
    for (const auto& c : rep.conditions)
        if (c.id == "2a") {
            found = true;
            CHECK(c.description.find("0.207") != std::string::npos);
        }
    CHECK(found);
    CHECK(rep.derived.at("ell") == doctest::Approx(4.0));

    // h for b = 3, d0 = 2 is 2 (alpha_add + zeta_M/sqrt(S_a) 7.50 eps)
    p.alpha_add = 0.3;
    p.zeta_m = std::sqrt(2.0);
    ConditionReport rep59 = check_theorem_model2("5.9", p, rip);
    CHECK(rep59.derived.at("h") ==
          doctest::Approx(2.0 * (0.3 + 7.50 * p.epsilon)).epsilon(1e-12));

    // eps = 0 drops every magnitude threshold to zero
    TheoremParams pz = p;
    pz.epsilon = 0.0;
    pz.alpha_add = 0.0;
    ConditionReport repz = check_theorem_model2("5.5", pz, rip);
    for (const auto& c : repz.conditions)
        if (c.id == "3") CHECK(c.pass);
}

TEST_CASE("certified RIC implies the l1 error bound empirically") {
    // perturbed rotation: genuinely nonzero delta that still clears the bound
    DenseMatrix a;
    bool found = false;
    for (std::uint64_t seed = 1; seed <= 30 && !found; ++seed) {
        DenseMatrix cand = random_orthonormal(16, seed);
        Rng prng(seed + 100);
        for (std::size_t c = 0; c < 16; ++c) {
            double ss = 0.0;
            for (std::size_t r = 0; r < 16; ++r) {
                cand(r, c) += 0.02 * prng.gaussian();
                ss += cand(r, c) * cand(r, c);
            }
            for (std::size_t r = 0; r < 16; ++r) cand(r, c) /= std::sqrt(ss);
        }
        if (ric_bruteforce(cand, 5).delta < 0.207) {
            a = cand;
            found = true;
        }
    }
    REQUIRE(found);
    const std::size_t n = 16;
    Rng rng(5);
    int applied = 0;
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        Vector x(16, 0.0);
        IndexSet support;
        while (support.size() < 3) support.insert(rng.uniform_index(16));
        for (std::size_t i : support) x[i] = (1.0 + rng.uniform()) * rng.sign();
        IndexSet t{support[0], support[1]};       // known part
        IndexSet delta = support.set_difference(t); // |Delta| = 1
        const double eps = 0.05;
        Vector w(n);
        double wn = 0.0;
        for (auto& v : w) {
            v = rng.gaussian();
            wn += v * v;
        }
        for (std::size_t i = 0; i < n; ++i) w[i] *= 0.9 * eps / std::sqrt(wn);
        Vector y = a.mul(x);
        for (std::size_t i = 0; i < n; ++i) y[i] += w[i];

        const std::size_t order = t.size() + 3 * delta.size();
        RipEstimate rip = ric_bruteforce(a, order);
        if (rip.delta >= 0.207) continue;
        ++applied;
        WeightedL1Problem p{&a, y, eps, t};
        SolverResult r = solve_modcs(p);
        Vector e(16);
        for (std::size_t i = 0; i < 16; ++i) e[i] = x[i] - r.beta[i];
        CHECK(norm2(e) <= c1_constant(rip.delta) * eps + 1e-9);
    }
    CHECK(applied > 0);
}

TEST_CASE("estimate_zeta extremes") {
    // one-sparse error: ratio 1, zeta = sqrt(S_a)
    Vector sparse(10, 0.0);
    sparse[4] = 3.0;
    auto est = estimate_zeta({{sparse, 4}}, {});
    CHECK(est.zeta_m == doctest::Approx(2.0));

    // flat error vector of length L: zeta = sqrt(S_a / L)
    Vector flat(16, 0.5);
    auto est2 = estimate_zeta({{flat, 4}}, {});
    CHECK(est2.zeta_m == doctest::Approx(std::sqrt(4.0 / 16.0)));

    auto est3 = estimate_zeta({{Vector(4, 0.0), 1}}, {});
    CHECK_FALSE(est3.defined);
}
