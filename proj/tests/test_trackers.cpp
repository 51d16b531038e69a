#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "modcs/trackers.hpp"

using namespace modcs;

TEST_CASE("auto_alpha picks the documented grid point") {
    // x = (3, 0.1), xmin_hat = 2: keeping the 0.1 entry violates the
    // minimum-magnitude clause, so the scan lands on alpha = 0.1
    DenseMatrix id = DenseMatrix::identity(2);
    Vector x{3.0, 0.1};
    CHECK(auto_alpha(x, id, 2.0) == doctest::Approx(0.1));

    // everything comfortably above 0.5 * xmin and orthonormal: keep all
    Vector x2{3.0, 2.5};
    CHECK(auto_alpha(x2, id, 2.0) == 0.0);

    // zero estimate: empty support, alpha = 0
    Vector x3{0.0, 0.0};
    CHECK(auto_alpha(x3, id, 1.0) == 0.0);
}

TEST_CASE("auto_alpha enforces the sigma_min clause") {
    DenseMatrix a(2, 2); // two nearly identical columns
    a(0, 0) = 1.0; a(0, 1) = 1.0;
    a(1, 0) = 1e-8; a(1, 1) = 0.0;
    Vector x{1.0, 0.9};
    const double alpha = auto_alpha(x, a, 1.6);
    IndexSet kept = support_above(x, alpha);
    CHECK(kept.size() == 1);
    CHECK(min_singular_value(columns(a, kept)) >= 0.4);
}

TEST_CASE("auto_alpha_add basics") {
    DenseMatrix id = DenseMatrix::identity(3);
    Vector x{0.5, -0.2, 0.1};
    bool degenerate = true;
    CHECK(auto_alpha_add(x, id, IndexSet{}, &degenerate) == 0.0);
    CHECK_FALSE(degenerate);

    // duplicated columns: the pair has sigma_min 0, one must stay out
    DenseMatrix dup(2, 2);
    dup(0, 0) = 1.0; dup(0, 1) = 1.0;
    dup(1, 0) = 0.0; dup(1, 1) = 0.0;
    Vector x2{1.0, 0.8};
    const double alpha = auto_alpha_add(x2, dup, IndexSet{}, &degenerate);
    CHECK_FALSE(degenerate);
    IndexSet picked;
    for (std::size_t i = 0; i < 2; ++i)
        if (std::abs(x2[i]) > alpha) picked.insert(i);
    CHECK(picked.size() == 1);

    // predicted support already ill-conditioned: flagged, and the returned
    // threshold induces no additions
    const double alpha2 = auto_alpha_add(x2, dup, IndexSet{0, 1}, &degenerate);
    CHECK(degenerate);
    IndexSet adds;
    for (std::size_t i = 0; i < 2; ++i)
        if (!IndexSet{0, 1}.contains(i) && std::abs(x2[i]) > alpha2) adds.insert(i);
    CHECK(adds.empty());
}

TEST_CASE("auto_alpha_del formula and clamping") {
    DenseMatrix a_tadd = DenseMatrix::identity(2);
    Vector residual{0.2, 0.05};
    CHECK(auto_alpha_del(1.0, a_tadd, residual) == doctest::Approx(0.5));
    CHECK(auto_alpha_del(0.1, a_tadd, residual) == 0.0); // clamped at zero
    Vector zero{0.0, 0.0};
    CHECK(auto_alpha_del(1.0, a_tadd, zero) == doctest::Approx(0.7));
}

TEST_CASE("update_xmin keeps a bounded window and skips empty supports") {
    XminTracker xt;
    Vector x{2.0, -2.0, 2.0};
    CHECK(update_xmin(xt, IndexSet{0, 1, 2}, x) == doctest::Approx(2.0));
    CHECK(update_xmin(xt, IndexSet{}, x) == doctest::Approx(2.0)); // unchanged
    CHECK(xt.window.size() == 1);
    for (int k = 0; k < 20; ++k) {
        Vector v{static_cast<double>(k + 1), 0.0, 0.0};
        update_xmin(xt, IndexSet{0}, v);
    }
    CHECK(xt.window.size() == kXminWindow);
    // mean of the last 10 pushes: 11..20
    CHECK(*xt.average() == doctest::Approx(15.5));
}

TEST_CASE("modcs_step recovers exactly with perfect prior support and no noise") {
    DenseMatrix a = gen_gaussian_unit_columns(8, 16, 5);
    Wl1Solver solver(a);
    Vector x(16, 0.0);
    x[3] = 2.0;
    x[9] = -1.5;
    x[12] = 1.0;
    MeasurementFrame f;
    f.t = 1;
    f.y = a.mul(x);
    f.epsilon = 0.0;

    TrackerState st;
    st.prev_support = IndexSet{3, 9, 12};
    st.xmin.push(1.0);
    Thresholds thr;
    thr.alpha = 0.5; // below the smallest magnitude
    StepOutput out = modcs_step(st, f, solver, thr);
    CHECK(out.support == IndexSet{3, 9, 12});
    for (std::size_t i = 0; i < 16; ++i) CHECK(out.x_hat[i] == doctest::Approx(x[i]).epsilon(1e-6));
    CHECK(st.prev_support == out.support);

    // infinite threshold keeps nothing
    TrackerState st2;
    st2.prev_support = IndexSet{3, 9, 12};
    Thresholds thr2;
    thr2.alpha = std::numeric_limits<double>::infinity();
    StepOutput out2 = modcs_step(st2, f, solver, thr2);
    CHECK(out2.support.empty());
}

TEST_CASE("addlsdel_step equals the trivial case with a perfect prior") {
    DenseMatrix a = gen_gaussian_unit_columns(8, 16, 6);
    Wl1Solver solver(a);
    Vector x(16, 0.0);
    x[1] = 2.0;
    x[7] = -1.0;
    MeasurementFrame f;
    f.t = 1;
    f.y = a.mul(x);
    f.epsilon = 0.0;

    TrackerState st;
    st.prev_support = IndexSet{1, 7};
    st.xmin.push(1.0);
    StepOutput out = addlsdel_step(st, f, solver, Thresholds{});
    CHECK(out.support == IndexSet{1, 7});
    for (std::size_t i = 0; i < 16; ++i) CHECK(out.x_hat[i] == doctest::Approx(x[i]).epsilon(1e-6));

    // alpha_add = infinity: no additions, deletion runs on T alone
    TrackerState st2;
    st2.prev_support = IndexSet{1, 7};
    st2.xmin.push(1.0);
    Thresholds thr;
    thr.alpha_add = std::numeric_limits<double>::infinity();
    StepOutput out2 = addlsdel_step(st2, f, solver, thr);
    CHECK(out2.add_support == IndexSet{1, 7});
    CHECK(out2.support == IndexSet{1, 7});
}

TEST_CASE("addlsdel auto thresholds satisfy their defining sigma_min clauses") {
    DenseMatrix a = gen_gaussian_unit_columns(10, 24, 9);
    Wl1Solver solver(a);
    Rng rng(31);
    Vector x(24, 0.0);
    x[2] = 2.0;
    x[5] = 1.4;
    x[17] = -2.2;
    Vector w(10);
    NoiseSpec spec(0.05);
    Vector noise = gen_bounded_uniform_noise(10, spec, 3);
    MeasurementFrame f = measure(a, x, noise, spec, 1);

    TrackerState st;
    st.prev_support = IndexSet{2, 17}; // missing one
    st.xmin.push(1.4);
    StepOutput out = addlsdel_step(st, f, solver, Thresholds{});
    CHECK(min_singular_value(columns(a, out.add_support)) >= 0.4);
    CHECK(out.support.set_difference(out.add_support).empty());
    // the final LS support is at least as well conditioned
    CHECK(min_singular_value(columns(a, out.support)) >= 0.4);
}

TEST_CASE("noisy_l1_step ignores the previous estimate") {
    DenseMatrix a = gen_gaussian_unit_columns(8, 16, 10);
    Wl1Solver solver(a);
    Vector x(16, 0.0);
    x[4] = 3.0;
    MeasurementFrame f;
    f.t = 2;
    f.y = a.mul(x);
    f.epsilon = 0.0;
    TrackerState st;
    st.prev_support = IndexSet{0, 1, 2, 3}; // garbage prior
    StepOutput out = noisy_l1_step(st, f, solver, Thresholds{});
    CHECK(out.predicted.empty());
    CHECK(out.support.contains(4));
}

TEST_CASE("diagnose computes the definition sets") {
    StepOutput out;
    out.predicted = IndexSet{1, 2, 3};
    out.support = IndexSet{2, 3, 5};
    out.add_support = IndexSet{1, 2, 3, 5, 6};
    Vector x(8, 0.0);
    x[2] = 1;
    x[3] = 1;
    x[4] = 1;
    FrameDiagnostics d = diagnose(out, x);
    CHECK(d.delta == IndexSet{4});
    CHECK(d.delta_e == IndexSet{1});
    CHECK(d.tilde_delta == IndexSet{4});
    CHECK(d.tilde_delta_e == IndexSet{5});
    CHECK(d.delta_add == IndexSet{4});
    CHECK(d.delta_e_add == IndexSet{1, 5, 6});

    // N_t = T_t u Delta_t \ Delta_e,t
    IndexSet n_t = support_of(x);
    CHECK(out.predicted.set_union(d.delta).set_difference(d.delta_e) == n_t);
}

TEST_CASE("binary-search threshold scan matches a linear reference") {
    Rng rng(123);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 6, m = 12;
        DenseMatrix a = gen_gaussian_unit_columns(n, m, 1000 + trial);
        Vector x(m);
        for (auto& v : x) v = rng.uniform() < 0.4 ? 0.0 : rng.gaussian();
        const double xmin_hat = 0.3 + rng.uniform();

        auto pass = [&](double alpha) {
            IndexSet kept = support_above(x, alpha);
            if (kept.empty()) return true;
            if (kept.size() > n) return false;
            double mn = std::numeric_limits<double>::infinity();
            for (std::size_t i : kept) mn = std::min(mn, std::abs(x[i]));
            if (mn < 0.5 * xmin_hat) return false;
            return min_singular_value(columns(a, kept)) >= 0.4;
        };
        // linear reference over the same grid
        std::vector<double> grid{0.0};
        for (double v : x)
            if (v != 0.0) grid.push_back(std::abs(v));
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        double linear = grid.back();
        for (double g : grid)
            if (pass(g)) {
                linear = g;
                break;
            }
        CHECK(auto_alpha(x, a, xmin_hat) == doctest::Approx(linear));
    }
}
