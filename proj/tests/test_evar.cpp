#include <catch2/catch_amalgamated.hpp>

#include <uclean/evar.hpp>

using namespace uclean;

namespace {

DiscreteDist uniform_over(std::vector<double> values) {
    DiscreteDist d;
    for (double v : values) d.support.emplace_back(v, 1.0 / values.size());
    return d;
}

Dataset bernoulli_trio() {
    Dataset ds;
    auto bernoulli = [](const std::string& id, double p) {
        return UncertainObject{id, 1.0, 1.0, DiscreteDist{{{0.0, 1 - p}, {1.0, p}}}};
    };
    ds.objects = {bernoulli("x1", 0.5), bernoulli("x2", 1.0 / 3), bernoulli("x3", 0.25)};
    return ds;
}

Dataset two_object_dataset() {
    Dataset ds;
    ds.objects.push_back({"x1", 1.0, 1.0, uniform_over({0, 0.5, 1, 1.5, 2})});
    ds.objects.push_back({"x2", 1.0, 1.0, uniform_over({1.0 / 3, 1, 5.0 / 3})});
    return ds;
}

QueryFunction pair_indicator() { return indicator_query({ThresholdClaim{{0, 1}, 11.0 / 12, true}}); }

QueryFunction trio_indicator() { return indicator_query({ThresholdClaim{{0, 1, 2}, 3.0, true}}); }

Dataset random_dataset(CounterRng& rng, int n, int max_support = 4) {
    Dataset ds;
    for (int i = 0; i < n; ++i) {
        int size = static_cast<int>(rng.uniform_int(1, max_support));
        DiscreteDist d;
        double psum = 0;
        std::vector<double> raw(size);
        for (int k = 0; k < size; ++k) psum += raw[k] = rng.next_open_closed();
        double v = rng.uniform(-2, 2);
        for (int k = 0; k < size; ++k) {
            d.support.emplace_back(v, raw[k] / psum);
            v += 0.3 + rng.next_double();
        }
        ds.objects.push_back({"o" + std::to_string(i), d.support[0].first,
                              std::floor(rng.uniform(1, 10)), d});
    }
    return ds;
}

QueryFunction random_query(CounterRng& rng, int n) {
    if (rng.next_double() < 0.5) {
        std::vector<double> w(n);
        for (double& x : w) x = rng.uniform(-2, 2);
        return linear_query(w, rng.uniform(-1, 1));
    }
    std::vector<ThresholdClaim> claims;
    int m = static_cast<int>(rng.uniform_int(1, 3));
    for (int k = 0; k < m; ++k) {
        ThresholdClaim tc;
        for (int i = 0; i < n; ++i)
            if (rng.next_double() < 0.6) tc.member_indices.push_back(i);
        if (tc.member_indices.empty()) tc.member_indices.push_back(static_cast<int>(rng.uniform_int(0, n - 1)));
        tc.threshold = rng.uniform(-2, 2) * tc.member_indices.size();
        tc.below = rng.next_double() < 0.5;
        claims.push_back(tc);
    }
    return indicator_query(std::move(claims));
}

std::vector<int> random_subset(CounterRng& rng, int n, double p = 0.5) {
    std::vector<int> s;
    for (int i = 0; i < n; ++i)
        if (rng.next_double() < p) s.push_back(i);
    return s;
}

} // namespace

TEST_CASE("conditional_variance goldens") {
    SECTION("indicator over three bernoulli objects, first pinned to 1") {
        Realization r;
        r.assignment[0] = 1.0;
        CHECK(conditional_variance(trio_indicator(), bernoulli_trio(), r) ==
              Catch::Approx(11.0 / 144).margin(1e-12));
    }

    SECTION("everything assigned leaves no variance") {
        Realization r;
        r.assignment[0] = 1.0;
        r.assignment[1] = 0.0;
        r.assignment[2] = 1.0;
        CHECK(conditional_variance(trio_indicator(), bernoulli_trio(), r) == 0.0);
    }

    SECTION("two-object indicator with the second pinned at 1/3") {
        Realization r;
        r.assignment[1] = 1.0 / 3;
        CHECK(conditional_variance(pair_indicator(), two_object_dataset(), r) ==
              Catch::Approx(6.0 / 25).margin(1e-12));
    }
}

TEST_CASE("evar_bruteforce goldens") {
    Dataset pair = two_object_dataset();
    QueryFunction f = pair_indicator();
    CHECK(evar_bruteforce(f, pair, {}) == Catch::Approx(26.0 / 225).margin(1e-12));
    CHECK(evar_bruteforce(f, pair, {0}) == Catch::Approx(4.0 / 45).margin(1e-12));
    CHECK(evar_bruteforce(f, pair, {1}) == Catch::Approx(2.0 / 25).margin(1e-12));
    CHECK(evar_bruteforce(f, pair, {0, 1}) == 0.0);

    Dataset trio = bernoulli_trio();
    QueryFunction g = trio_indicator();
    CHECK(evar_bruteforce(g, trio, {}) == Catch::Approx(23.0 / 576).margin(1e-12));
    CHECK(evar_bruteforce(g, trio, {0}) == Catch::Approx(11.0 / 288).margin(1e-12));
}

TEST_CASE("marginal_gain goldens") {
    EvarEvaluator ev(pair_indicator(), two_object_dataset());
    CHECK(ev.marginal_gain({}, 1) == Catch::Approx(8.0 / 225).margin(1e-12));
    CHECK(ev.marginal_gain({}, 0) == Catch::Approx(6.0 / 225).margin(1e-12));

    Dataset with_constant = two_object_dataset();
    with_constant.objects.push_back({"k", 7.0, 1.0, DiscreteDist{{{7.0, 1.0}}}});
    QueryFunction f = indicator_query({ThresholdClaim{{0, 1, 2}, 11.0 / 12 + 7, true}});
    EvarEvaluator ev2(f, with_constant);
    CHECK(ev2.marginal_gain({}, 2) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("evar_decomposed matches brute force") {
    CounterRng rng(61, 2);
    for (int trial = 0; trial < 60; ++trial) {
        int n = static_cast<int>(rng.uniform_int(2, 5));
        Dataset ds = random_dataset(rng, n);
        QueryFunction q = random_query(rng, n);
        if (!q.decomposable()) continue;
        std::vector<int> T = random_subset(rng, n);
        CHECK(evar_decomposed(q, ds, T) ==
              Catch::Approx(evar_bruteforce(q, ds, T)).margin(1e-9));
    }
}

TEST_CASE("evar_decomposed is additive over disjoint claims") {
    // ten copies of the two-object indicator instance side by side
    Dataset big;
    std::vector<ThresholdClaim> claims;
    Dataset pair = two_object_dataset();
    for (int k = 0; k < 10; ++k) {
        for (auto obj : pair.objects) {
            obj.id += "_" + std::to_string(k);
            big.objects.push_back(obj);
        }
        claims.push_back({{2 * k, 2 * k + 1}, 11.0 / 12, true});
    }
    QueryFunction q = indicator_query(claims);
    double single = evar_bruteforce(pair_indicator(), pair, {0});
    std::vector<int> T;
    for (int k = 0; k < 10; ++k) T.push_back(2 * k); // clean every first member
    CHECK(evar_decomposed(q, big, T) == Catch::Approx(10 * single).margin(1e-9));
    CHECK(evar_decomposed(q, big, {}) ==
          Catch::Approx(10 * evar_bruteforce(pair_indicator(), pair, {})).margin(1e-9));

    SECTION("overlapping claims still match the brute force") {
        Dataset four;
        for (int i = 0; i < 4; ++i)
            four.objects.push_back({"o" + std::to_string(i), 0.5, 1,
                                    DiscreteDist{{{0.0, 0.5}, {1.0, 0.5}}}});
        QueryFunction overlap = indicator_query(
            {ThresholdClaim{{0, 1, 2}, 1.5, true}, ThresholdClaim{{1, 2, 3}, 2.5, false}});
        CHECK(evar_decomposed(overlap, four, {}) ==
              Catch::Approx(evar_bruteforce(overlap, four, {})).margin(1e-9));
        CHECK(evar_decomposed(overlap, four, {1, 3}) ==
              Catch::Approx(evar_bruteforce(overlap, four, {1, 3})).margin(1e-9));
    }
}

TEST_CASE("monotone and submodular on random instances") {
    CounterRng rng(77, 5);
    for (int trial = 0; trial < 60; ++trial) {
        int n = static_cast<int>(rng.uniform_int(2, 5));
        Dataset ds = random_dataset(rng, n);
        QueryFunction q = random_query(rng, n);
        EvarEvaluator ev(q, ds);

        std::vector<int> T = random_subset(rng, n, 0.35);
        std::vector<int> Tp = T;
        for (int i = 0; i < n; ++i)
            if (std::find(Tp.begin(), Tp.end(), i) == Tp.end() && rng.next_double() < 0.4)
                Tp.push_back(i);
        // growing T never raises the objective
        CHECK(ev.evar(T) >= ev.evar(Tp) - 1e-9);

        std::vector<int> rest;
        for (int i = 0; i < n; ++i)
            if (std::find(Tp.begin(), Tp.end(), i) == Tp.end()) rest.push_back(i);
        if (!rest.empty()) {
            int j = rest[static_cast<int>(rng.uniform_int(0, static_cast<int>(rest.size()) - 1))];
            // submodularity of the objective itself: EVar(T+j) - EVar(T) >= EVar(T'+j) - EVar(T'),
            // equivalently the cleaning gain never shrinks as the cleaned set grows
            CHECK(ev.marginal_gain(T, j) <= ev.marginal_gain(Tp, j) + 1e-9);
        }
    }
}

TEST_CASE("complement objective is non-decreasing and submodular") {
    CounterRng rng(83, 9);
    for (int trial = 0; trial < 40; ++trial) {
        int n = static_cast<int>(rng.uniform_int(2, 5));
        Dataset ds = random_dataset(rng, n);
        QueryFunction q = random_query(rng, n);
        EvarEvaluator ev(q, ds);
        std::vector<int> all(n);
        for (int i = 0; i < n; ++i) all[i] = i;
        auto bar = [&](const std::vector<int>& tbar) {
            return ev.evar(detail::set_minus(all, detail::sorted_unique(tbar)));
        };

        std::vector<int> A = random_subset(rng, n, 0.35);
        std::vector<int> B = A;
        for (int i = 0; i < n; ++i)
            if (std::find(B.begin(), B.end(), i) == B.end() && rng.next_double() < 0.4)
                B.push_back(i);
        A = detail::sorted_unique(A);
        B = detail::sorted_unique(B);
        CHECK(bar(B) >= bar(A) - 1e-9);

        std::vector<int> rest = detail::set_minus(all, B);
        if (!rest.empty()) {
            int j = rest[static_cast<int>(rng.uniform_int(0, static_cast<int>(rest.size()) - 1))];
            auto withj = [&](std::vector<int> s) {
                s.push_back(j);
                return detail::sorted_unique(s);
            };
            CHECK(bar(withj(A)) - bar(A) >= bar(withj(B)) - bar(B) - 1e-9);
        }
    }
}

TEST_CASE("indicator conditional variance is p(1-p)") {
    Dataset ds = two_object_dataset();
    QueryFunction f = pair_indicator();
    for (auto& [v1, p1] : std::get<DiscreteDist>(ds.objects[0].dist).support) {
        Realization r;
        r.assignment[0] = v1;
        double p = 0;
        Dataset cond = condition(ds, r);
        for (auto& [v2, p2] : std::get<DiscreteDist>(cond.objects[1].dist).support)
            if (v1 + v2 < 11.0 / 12) p += p2;
        CHECK(conditional_variance(f, ds, r) == Catch::Approx(p * (1 - p)).margin(1e-12));
    }
}

TEST_CASE("dependent-mode closed form") {
    std::vector<double> w = {1.0, -2.0, 0.5};
    std::vector<std::vector<double>> cov = {
        {4.0, 1.0, 0.5}, {1.0, 9.0, -1.0}, {0.5, -1.0, 1.0}};

    SECTION("empty subset returns the full query variance") {
        double total = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) total += w[i] * w[j] * cov[i][j];
        CHECK(evar_linear_dependent(w, cov, {}) == Catch::Approx(total).margin(1e-12));
    }

    SECTION("full subset leaves nothing") {
        CHECK(evar_linear_dependent(w, cov, {0, 1, 2}) == Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("diagonal covariance reduces to the modular independent form") {
        std::vector<std::vector<double>> diag = {{4, 0, 0}, {0, 9, 0}, {0, 0, 1}};
        CHECK(evar_linear_dependent(w, diag, {1}) ==
              Catch::Approx(w[0] * w[0] * 4 + w[2] * w[2] * 1).margin(1e-12));
    }

    SECTION("evaluator routes covariance datasets here and rejects nonlinear queries") {
        Dataset ds;
        for (int i = 0; i < 3; ++i)
            ds.objects.push_back({"o" + std::to_string(i), 0.0, 1.0,
                                  NormalSpec{0.0, std::sqrt(cov[i][i])}});
        ds.covariance = cov;
        EvarEvaluator ev(linear_query(w), ds);
        CHECK(ev.evar({0}) == Catch::Approx(evar_linear_dependent(w, cov, {0})).margin(1e-12));
        CHECK_THROWS_AS(EvarEvaluator(indicator_query({ThresholdClaim{{0, 1}, 0, true}}), ds),
                        ValidationError);
    }
}

TEST_CASE("monte carlo fallback") {
    Dataset ds = two_object_dataset();
    QueryFunction f = pair_indicator();
    double exact = evar_bruteforce(f, ds, {0});
    double mc = evar_montecarlo(f, ds, {0}, 200000, 5);
    CHECK(mc == Catch::Approx(exact).margin(0.02));
    CHECK(evar_montecarlo(f, ds, {0}, 200000, 5) == mc); // deterministic

    EvarOptions opts;
    opts.cap = 2; // force the fallback
    opts.mc_samples = 100000;
    EvarEvaluator ev(f, ds, opts);
    CHECK_FALSE(ev.approximate());
    CHECK(ev.evar({0}) == Catch::Approx(exact).margin(0.03));
    CHECK(ev.approximate());
}

TEST_CASE("curvature") {
    SECTION("linear query over independent objects is modular") {
        CounterRng rng(19, 14);
        Dataset ds = random_dataset(rng, 4);
        std::vector<double> w = {1.5, -2.0, 0.7, 3.0};
        EvarEvaluator ev(linear_query(w), ds);
        CHECK(curvature(ev) == Catch::Approx(0.0).margin(1e-9));
    }

    SECTION("two-object indicator instance") {
        EvarEvaluator ev(pair_indicator(), two_object_dataset());
        double e0 = ev.evar({});
        double r1 = (e0 - ev.evar({0})) / ev.evar({1});
        double r2 = (e0 - ev.evar({1})) / ev.evar({0});
        CHECK(curvature(ev) == Catch::Approx(1.0 - std::min(r1, r2)).margin(1e-12));
        CHECK(curvature(ev) == Catch::Approx(2.0 / 3).margin(1e-9));
    }

    SECTION("single object uses EVar(empty) as the denominator") {
        Dataset ds;
        ds.objects.push_back({"x", 0.0, 1.0, DiscreteDist{{{0.0, 0.5}, {2.0, 0.5}}}});
        EvarEvaluator ev(linear_query({1.0}), ds);
        CHECK(curvature(ev) == Catch::Approx(0.0).margin(1e-9));
    }

    SECTION("degenerate instance is rejected") {
        Dataset ds;
        ds.objects.push_back({"x", 5.0, 1.0, DiscreteDist{{{5.0, 1.0}}}});
        EvarEvaluator ev(linear_query({1.0}), ds);
        CHECK_THROWS_AS(curvature(ev), ValidationError);
    }
}
