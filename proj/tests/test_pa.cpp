#include "pafp/errors.hpp"
#include "pafp/pa.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace pafp;

namespace {
LinearModel make(std::vector<double> w, double theta = 0.0) {
    LinearModel m;
    m.w = std::move(w);
    m.threshold = theta;
    return m;
}
} // namespace

TEST_SUITE("pa") {

TEST_CASE("hinge loss hand values") {
    CHECK(hinge_loss(1.0) == 0.0);
    CHECK(hinge_loss(2.5) == 0.0);
    CHECK(hinge_loss(0.0) == 1.0);
    CHECK(hinge_loss(-1.0) == 2.0);
}

TEST_CASE("exact update, hand-worked cases") {
    SUBCASE("zero model, unit example") {
        const auto [next, rec] = pa_update(make({0.0, 0.0}), {{1.0, 0.0}, +1});
        CHECK(rec.verdict == Verdict::Applied);
        CHECK(rec.tau == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(next.w[0] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(next.w[1] == 0.0);
        CHECK(rec.margin_before == 0.0);
        CHECK(rec.margin_after == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("benign correction lands exactly on margin 1") {
        const auto [next, rec] = pa_update(make({0.5, -0.5}), {{1.0, 1.0}, -1});
        // margin_before = -1*(0.5-0.5) = 0, loss 1, ||x||^2 = 2, tau = 0.5
        CHECK(rec.tau == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(next.w[0] == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(next.w[1] == doctest::Approx(-1.0).epsilon(1e-15));
        CHECK(rec.margin_after == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("already-satisfied example is passive, bitwise") {
        const LinearModel m = make({2.0, 0.0});
        const auto [next, rec] = pa_update(m, {{1.0, 0.0}, +1});
        CHECK(rec.verdict == Verdict::Passive);
        CHECK(rec.tau == 0.0);
        CHECK(next.w == m.w);
        CHECK(rec.margin_after == rec.margin_before);
    }
    SUBCASE("threshold carries through untouched") {
        const auto [next, rec] = pa_update(make({0.0, 0.0}, 0.75), {{1.0, 0.0}, +1});
        CHECK(next.threshold == 0.75);
    }
}

TEST_CASE("capped update truncates the step") {
    PaConfig cfg;
    cfg.variant = PaVariant::RegularizedC;
    cfg.c = 0.1;
    // loss = 1, ||x||^2 = 4, uncapped tau = 0.25 > c -> tau = 0.1
    const auto [next, rec] = pa_update(make({0.0, 0.0}), {{2.0, 0.0}, +1}, cfg);
    CHECK(rec.tau == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(next.w[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(rec.margin_after == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(rec.verdict == Verdict::Applied);
}

TEST_CASE("sgd update, hand-worked cases") {
    SUBCASE("single step from zero") {
        SgdConfig cfg;
        cfg.learning_rate = 0.1;
        const auto [next, rec] = sgd_update(make({0.0, 0.0}), {{1.0, 0.0}, +1}, cfg);
        CHECK(rec.verdict == Verdict::Applied);
        CHECK(next.w[0] == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(rec.margin_after == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("satisfied example takes no step") {
        const LinearModel m = make({2.0, 0.0});
        const auto [next, rec] = sgd_update(m, {{1.0, 0.0}, +1});
        CHECK(rec.verdict == Verdict::Passive);
        CHECK(next.w == m.w);
    }
    SUBCASE("benign step") {
        SgdConfig cfg;
        cfg.learning_rate = 0.1;
        const auto [next, rec] = sgd_update(make({0.5, -0.5}), {{1.0, 1.0}, -1}, cfg);
        CHECK(next.w[0] == doctest::Approx(0.4).epsilon(1e-14));
        CHECK(next.w[1] == doctest::Approx(-0.6).epsilon(1e-14));
        CHECK(rec.margin_after == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("multi-step run stops once the hinge clears") {
        SgdConfig cfg;
        cfg.learning_rate = 0.6;
        cfg.steps_per_correction = 3;
        // step 1: w=0.6, margin 0.6, loss>0; step 2: w=1.2, margin 1.2, stop.
        const auto [next, rec] = sgd_update(make({0.0}), {{1.0}, +1}, cfg);
        CHECK(next.w[0] == doctest::Approx(1.2).epsilon(1e-14));
        CHECK(rec.tau == doctest::Approx(1.2).epsilon(1e-14)); // lr * steps_taken
    }
}

TEST_CASE("weight delta norm matches |tau| * ||x||") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 50; ++t) {
        LinearModel m = make({u(rng), u(rng), u(rng)});
        LabeledExample ex{{u(rng), u(rng), u(rng)}, (rng() & 1) ? +1 : -1};
        double x2 = 0.0;
        for (double v : ex.x) x2 += v * v;
        if (x2 == 0.0) continue;
        const auto [next, rec] = pa_update(m, ex);
        CHECK(rec.weight_delta_norm ==
              doctest::Approx(std::abs(rec.tau) * std::sqrt(x2)).epsilon(1e-9));
    }
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(pa_update(make({1.0, 1.0}), {{0.0, 0.0}, +1}), InvalidInput);
    CHECK_THROWS_AS(sgd_update(make({1.0, 1.0}), {{0.0, 0.0}, -1}), InvalidInput);

    PaConfig bad;
    bad.variant = PaVariant::RegularizedC;
    bad.c = 0.0;
    CHECK_THROWS_AS(pa_update(make({1.0}), {{1.0}, -1}, bad), InvalidInput);

    CHECK_THROWS_AS(pa_update(make({1.0}), {{1.0}, 0}), InvalidInput); // bad label
    CHECK_THROWS_AS(pa_update(make({1.0, 0.0}), {{1.0}, +1}), InvalidInput);

    SgdConfig bad_lr;
    bad_lr.learning_rate = 0.0;
    CHECK_THROWS_AS(sgd_update(make({1.0}), {{1.0}, -1}, bad_lr), InvalidInput);
    SgdConfig bad_steps;
    bad_steps.steps_per_correction = 0;
    CHECK_THROWS_AS(sgd_update(make({1.0}), {{1.0}, -1}, bad_steps), InvalidInput);
}

TEST_CASE("exact update properties on random instances") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const std::size_t dim = 6;
    for (int t = 0; t < 200; ++t) {
        LinearModel m;
        m.w.resize(dim);
        LabeledExample ex;
        ex.x.resize(dim);
        for (auto& v : m.w) v = u(rng);
        for (auto& v : ex.x) v = u(rng);
        ex.y = (rng() & 1) ? +1 : -1;

        const auto [next, rec] = pa_update(m, ex);
        if (rec.verdict == Verdict::Passive) {
            CHECK(next.w == m.w);
            continue;
        }
        // full correction
        CHECK(rec.margin_after == doctest::Approx(1.0).epsilon(1e-9));
        // no sampled point on the constraint is closer than the update (lite)
        double d2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j)
            d2 += (next.w[j] - m.w[j]) * (next.w[j] - m.w[j]);
        const double dist = std::sqrt(d2);
        if (t < 50) {
            for (int k = 0; k < 100; ++k) {
                const auto v = oracle::constraint_sample(rng, ex.x, ex.y);
                double s2 = 0.0;
                for (std::size_t j = 0; j < dim; ++j)
                    s2 += (v[j] - m.w[j]) * (v[j] - m.w[j]);
                CHECK(std::sqrt(s2) >= dist - 1e-9);
            }
        }
    }
}

TEST_CASE("capped tau never exceeds c and sgd undercorrects") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    PaConfig capped;
    capped.variant = PaVariant::RegularizedC;
    capped.c = 0.05;
    for (int t = 0; t < 100; ++t) {
        LinearModel m = make({u(rng), u(rng)});
        LabeledExample ex{{u(rng), u(rng)}, (rng() & 1) ? +1 : -1};
        if (ex.x[0] == 0.0 && ex.x[1] == 0.0) continue;
        const auto [mc, rc] = pa_update(m, ex, capped);
        CHECK(rc.tau <= capped.c + 1e-15);
        const auto [ms, rs] = sgd_update(m, ex); // lr 0.01, one step
        if (rs.verdict == Verdict::Applied) {
            // one subgradient step moves the margin by exactly lr * ||x||^2
            const double x2 = ex.x[0] * ex.x[0] + ex.x[1] * ex.x[1];
            CHECK(rs.margin_after ==
                  doctest::Approx(rs.margin_before + 0.01 * x2).epsilon(1e-9));
        }
    }
}

TEST_CASE("online training separates a separable pair") {
    Dataset d;
    d.dim = 2;
    d.examples.push_back({{1.0, 0.0}, +1});
    d.examples.push_back({{-1.0, 0.0}, -1});

    LinearModel init = make({0.0, 0.0});
    const LinearModel trained = train_online(init, d, 1, PaConfig{}, 5);
    CHECK(score(trained, {1.0, 0.0}) > 0.0);
    CHECK(score(trained, {-1.0, 0.0}) < 0.0);

    const LinearModel untouched = train_online(init, d, 0, PaConfig{}, 5);
    CHECK(untouched.w == init.w);

    const LinearModel again = train_online(init, d, 3, PaConfig{}, 99);
    const LinearModel same = train_online(init, d, 3, PaConfig{}, 99);
    CHECK(again.w == same.w); // same seed, bitwise identical

    CHECK_THROWS_AS(train_online(init, d, -1, PaConfig{}, 5), InvalidInput);
    Dataset empty;
    empty.dim = 2;
    CHECK_THROWS_AS(train_online(init, empty, 1, PaConfig{}, 5), InvalidInput);
}

} // TEST_SUITE
