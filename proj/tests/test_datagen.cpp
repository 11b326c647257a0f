#include <catch2/catch_amalgamated.hpp>

#include <uclean/datagen.hpp>
#include <uclean/model.hpp>

using namespace uclean;

TEST_CASE("generate is deterministic per seed") {
    GenSpec spec{Family::UR, 40, 12345, CostModel::uniform(1, 10)};
    Dataset a = generate(spec);
    Dataset b = generate(spec);
    REQUIRE(a.size() == 40);
    REQUIRE(b.size() == 40);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.objects[i].id == b.objects[i].id);
        CHECK(a.objects[i].cost == b.objects[i].cost);
        CHECK(a.objects[i].current_value == b.objects[i].current_value);
        auto& da = std::get<DiscreteDist>(a.objects[i].dist);
        auto& db = std::get<DiscreteDist>(b.objects[i].dist);
        REQUIRE(da.support.size() == db.support.size());
        for (std::size_t k = 0; k < da.support.size(); ++k) {
            CHECK(da.support[k].first == db.support[k].first);
            CHECK(da.support[k].second == db.support[k].second);
        }
    }
    Dataset c = generate({Family::UR, 40, 12346, CostModel::uniform(1, 10)});
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.objects[i].cost != c.objects[i].cost ||
            a.objects[i].current_value != c.objects[i].current_value)
            any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("generated datasets pass validation in every family") {
    for (Family fam : {Family::UR, Family::LN, Family::SM, Family::NormalMeanFixed}) {
        for (std::uint64_t seed : {1ull, 7ull, 99ull}) {
            Dataset ds = generate({fam, 25, seed, CostModel::uniform(1, 10)});
            CHECK(validate_dataset(ds).empty());
        }
    }
}

TEST_CASE("UR supports are distinct integers in range with unit-sum probabilities") {
    Dataset ds = generate({Family::UR, 60, 5, CostModel::uniform(1, 10)});
    for (auto& o : ds.objects) {
        auto& d = std::get<DiscreteDist>(o.dist);
        CHECK(d.support.size() >= 1);
        CHECK(d.support.size() <= 6);
        double psum = 0;
        for (std::size_t k = 0; k < d.support.size(); ++k) {
            auto [v, p] = d.support[k];
            CHECK(v == std::floor(v));
            CHECK(v >= 1.0);
            CHECK(v <= 100.0);
            if (k > 0) CHECK(d.support[k - 1].first < v);
            psum += p;
        }
        CHECK(psum == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("LN probabilities sum to one and values increase") {
    Dataset ds = generate({Family::LN, 50, 11, CostModel::uniform(1, 10)});
    for (auto& o : ds.objects) {
        auto& d = std::get<DiscreteDist>(o.dist);
        double psum = 0;
        for (std::size_t k = 0; k < d.support.size(); ++k) {
            CHECK(d.support[k].first > 0);
            if (k > 0) CHECK(d.support[k - 1].first < d.support[k].first);
            psum += d.support[k].second;
        }
        CHECK(psum == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("support sizes are uniform over one to six") {
    Dataset ds = generate({Family::UR, 1000, 42, CostModel::uniform(1, 10)});
    std::vector<int> counts(7, 0);
    for (auto& o : ds.objects) counts[std::get<DiscreteDist>(o.dist).support.size()]++;
    double chi2 = 0, expected = 1000.0 / 6;
    for (int s = 1; s <= 6; ++s) {
        double diff = counts[s] - expected;
        chi2 += diff * diff / expected;
    }
    CHECK(chi2 < 15.086); // 5 degrees of freedom, p > 0.01
}

TEST_CASE("cost models") {
    SECTION("uniform costs are integers in the stated range") {
        Dataset ds = generate({Family::UR, 100, 3, CostModel::uniform(1, 10)});
        for (auto& o : ds.objects) {
            CHECK(o.cost == std::floor(o.cost));
            CHECK(o.cost >= 1.0);
            CHECK(o.cost <= 10.0);
        }
    }

    SECTION("recency costs decrease with index within the jitter band") {
        Dataset ds = generate({Family::UR, 20, 3, CostModel::recency(200, 5, 5)});
        for (int i = 0; i < 20; ++i) {
            double hi = 200 - 5.0 * i;
            CHECK(ds.objects[i].cost <= hi);
            CHECK(ds.objects[i].cost >= hi - 5);
        }
    }

    SECTION("two-point costs take exactly the two values") {
        Dataset ds = generate({Family::UR, 60, 3, CostModel::two_point(1, 9)});
        bool saw1 = false, saw9 = false;
        for (auto& o : ds.objects) {
            CHECK((o.cost == 1.0 || o.cost == 9.0));
            saw1 |= o.cost == 1.0;
            saw9 |= o.cost == 9.0;
        }
        CHECK(saw1);
        CHECK(saw9);
    }
}

TEST_CASE("inject_dependency") {
    SECTION("gamma 0 gives a diagonal matrix") {
        auto cov = inject_dependency({1, 2, 3}, 0.0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                if (i == j)
                    CHECK(cov[i][j] == Catch::Approx((i + 1.0) * (i + 1.0)).margin(1e-12));
                else
                    CHECK(cov[i][j] == 0.0);
            }
    }

    SECTION("gamma 0.7 at lag 2 gives 0.49") {
        auto cov = inject_dependency({1, 1, 1}, 0.7);
        CHECK(cov[0][2] == Catch::Approx(0.49).margin(1e-12));
        CHECK(cov[2][0] == Catch::Approx(0.49).margin(1e-12));
        CHECK(cov[0][1] == Catch::Approx(0.7).margin(1e-12));
    }

    SECTION("symmetry and diagonal variances") {
        auto cov = inject_dependency({0.5, 2, 1.5, 3}, 0.4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) CHECK(cov[i][j] == Catch::Approx(cov[j][i]).margin(1e-15));
    }

    SECTION("gamma 1 is flagged as fully correlated") {
        CHECK(fully_correlated(1.0));
        CHECK_FALSE(fully_correlated(0.999));
        CHECK_THROWS_AS(inject_dependency({1}, 1.5), ValidationError);
    }
}

TEST_CASE("adoptions_like") {
    SECTION("deterministic per seed") {
        Dataset a = adoptions_like(26, 50, 100, 8);
        Dataset b = adoptions_like(26, 50, 100, 8);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.objects[i].cost == b.objects[i].cost);
            CHECK(std::get<NormalSpec>(a.objects[i].dist).stddev ==
                  std::get<NormalSpec>(b.objects[i].dist).stddev);
        }
    }

    SECTION("normals are centered at the bundled series with bounded parameters") {
        Dataset ds = adoptions_like(26, 50, 100, 8);
        const auto& series = adoption_series();
        for (int i = 0; i < 26; ++i) {
            auto& ns = std::get<NormalSpec>(ds.objects[i].dist);
            CHECK(ns.mean == series[i]);
            CHECK(ds.objects[i].current_value == series[i]);
            CHECK(ns.stddev >= 1.0);
            CHECK(ns.stddev <= 50.0);
            CHECK(ds.objects[i].cost >= 1.0);
            CHECK(ds.objects[i].cost <= 100.0);
        }
    }

    SECTION("zero stddev bound gives point masses") {
        Dataset ds = adoptions_like(5, 0, 10, 8);
        for (auto& o : ds.objects) CHECK(is_point_mass(o.dist));
    }
}

TEST_CASE("fixed-mean normal family centers at the current value") {
    Dataset ds = generate({Family::NormalMeanFixed, 15, 21, CostModel::uniform(1, 10)});
    for (auto& o : ds.objects) {
        auto& ns = std::get<NormalSpec>(o.dist);
        CHECK(ns.mean == o.current_value);
        CHECK(ns.stddev >= 1.0);
        CHECK(ns.stddev <= 10.0);
    }
}
