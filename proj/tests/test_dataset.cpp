#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "cvlab/dataset.hpp"
#include "cvlab/error.hpp"
#include "cvlab/rng.hpp"
#include "support.hpp"

using namespace cvlab;

TEST_CASE("rng streams are pure functions of the seed") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
    }
    CHECK(derive_seed(1, "data", 3) == derive_seed(1, "data", 3));
    CHECK(derive_seed(1, "data", 3) != derive_seed(1, "data", 4));
    CHECK(derive_seed(1, "data", 3) != derive_seed(1, "plan", 3));
    CHECK(derive_seed(1, "x", 0, 1) != derive_seed(1, "x", 1, 0));
}

TEST_CASE("rng uniform draws respect their ranges and moments") {
    Rng r(7);
    double sum = 0.0, sum_sq = 0.0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) {
        const double u = r.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / N - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / N));
    sum = 0.0;
    for (int i = 0; i < N; ++i) {
        const double z = r.normal();
        sum += z;
        sum_sq += z * z;
    }
    CHECK(std::abs(sum / N) < 4.0 / std::sqrt(N));
    CHECK(std::abs(sum_sq / N - 1.0) < 4.0 * std::sqrt(2.0 / N));

    std::vector<std::size_t> counts(6, 0);
    for (int i = 0; i < 60000; ++i) ++counts[r.uniform_index(6)];
    CHECK(testing::chi_square_uniform(counts) < testing::chi2_critical_999(5));
}

TEST_CASE("dataset construction enforces its invariants") {
    CHECK_THROWS_AS(Dataset::regression(1, {}, {}), ShapeError);
    CHECK_THROWS_AS(Dataset::regression(2, {1.0, 2.0, 3.0}, {1.0, 2.0}), ShapeError);
    CHECK_THROWS_AS(Dataset::density(0, {}), ShapeError);
    CHECK_THROWS_AS(Dataset::classification(0, {}, {0, -1}), ShapeError);

    const auto ds = Dataset::classification(0, {}, {0, 1, 1});
    CHECK(ds.size() == 3);
    CHECK(ds.dim() == 0);
    CHECK(ds.num_classes() == 2);
    CHECK(ds.label(2) == 1);

    const auto one_class = Dataset::classification(0, {}, {0, 0});
    CHECK(one_class.num_classes() == 2);

    const auto dens = Dataset::density(1, {0.1, 0.2});
    CHECK_FALSE(dens.has_response());
}

TEST_CASE("generator validation") {
    CHECK_THROWS_AS(validate(PiecewiseConstantDensity{{0.0, 0.5, 1.0}, {1.0, 0.5}}), ConfigError);
    CHECK_THROWS_AS(validate(PiecewiseConstantDensity{{0.0, 0.5}, {2.0}}), ConfigError);
    CHECK_THROWS_AS(validate(BernoulliLabels{1.0}), ConfigError);
    CHECK_THROWS_AS(validate(BernoulliLabels{0.0}), ConfigError);
    CHECK_THROWS_AS(validate(LinearModel{{1.0}, -0.1}), ConfigError);
    CHECK_NOTHROW(validate(PiecewiseConstantDensity{{0.0, 0.3, 1.0}, {2.0, 4.0 / 7.0}}));
    CHECK_THROWS_AS(generate(BernoulliLabels{1.5}, 3, 0), ConfigError);
    CHECK_THROWS_AS(generate(BernoulliLabels{0.5}, 0, 0), BoundsError);
}

TEST_CASE("generate: uniform density points lie in [0,1]") {
    const auto ds = generate(PiecewiseConstantDensity::uniform(), 5, 7);
    CHECK(ds.kind() == TaskKind::Density);
    REQUIRE(ds.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(ds.feature(i, 0) >= 0.0);
        CHECK(ds.feature(i, 0) <= 1.0);
    }
}

TEST_CASE("generate: noiseless linear model returns y = x") {
    const auto ds = generate(LinearModel{{1.0}, 0.0, FeatureLaw::Uniform}, 3, 0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(ds.response(i) == ds.feature(i, 0));
}

TEST_CASE("generate: Bernoulli label frequency") {
    // Binomial stderr at n = 10^4, p = 0.9 is 0.003, so 0.01 is above 3 stderr.
    const auto ds = generate(BernoulliLabels{0.9}, 10000, 1);
    CHECK(ds.dim() == 0);
    double ones = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) ones += ds.label(i);
    CHECK(std::abs(ones / 10000.0 - 0.9) < 0.01);
}

TEST_CASE("generate: piecewise-constant density cell frequencies") {
    const PiecewiseConstantDensity d{{0.0, 0.3, 1.0}, {2.0, 4.0 / 7.0}};
    const auto ds = generate(d, 20000, 5);
    double left = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) left += ds.feature(i, 0) < 0.3;
    const double se = std::sqrt(0.6 * 0.4 / 20000.0);
    CHECK(std::abs(left / 20000.0 - 0.6) < 4 * se);
}

TEST_CASE("generate is bitwise reproducible") {
    const DataGenerator gens[] = {LinearModel{{1.0, -2.0}, 0.3, FeatureLaw::StandardNormal},
                                  PiecewiseConstantDensity{{0.0, 0.5, 1.0}, {1.5, 0.5}}, BernoulliLabels{0.3}};
    for (const auto& g : gens) {
        CHECK(generate(g, 50, 11) == generate(g, 50, 11));
        CHECK_FALSE(generate(g, 50, 11) == generate(g, 50, 12));
    }
}

TEST_CASE("generate: normal features have unit variance") {
    const auto ds = generate(LinearModel{{0.0, 0.0}, 1.0, FeatureLaw::StandardNormal}, 20000, 3);
    double s = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) s += ds.feature(i, 1) * ds.feature(i, 1);
    CHECK(std::abs(s / 20000.0 - 1.0) < 4 * std::sqrt(2.0 / 20000.0));
}

TEST_CASE("permute: singleton dataset is unchanged") {
    const auto ds = Dataset::regression(1, {0.5}, {2.0});
    CHECK(permute(ds, 99) == ds);
}

TEST_CASE("permute preserves the multiset of rows") {
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
        x.push_back(i);
        y.push_back(i * i);
    }
    const auto ds = Dataset::regression(1, x, y);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = permute(ds, seed);
        std::multiset<std::pair<double, double>> a, b;
        for (std::size_t i = 0; i < 20; ++i) {
            a.insert({ds.feature(i, 0), ds.response(i)});
            b.insert({p.feature(i, 0), p.response(i)});
        }
        CHECK(a == b);
    }
}

TEST_CASE("permute: the 6 orders of 3 rows are equally likely") {
    const auto ds = Dataset::density(1, {0.0, 1.0, 2.0});
    std::map<std::vector<double>, std::size_t> freq;
    for (std::uint64_t seed = 0; seed < 60000; ++seed) {
        const auto p = permute(ds, seed);
        ++freq[p.features()];
    }
    REQUIRE(freq.size() == 6);
    std::vector<std::size_t> counts;
    for (const auto& [k, c] : freq) counts.push_back(c);
    CHECK(testing::chi_square_uniform(counts) < testing::chi2_critical_999(5));
}

TEST_CASE("csv round trip") {
    const auto ds = Dataset::regression(2, {0.1, 1.0 / 3.0, -2.5e-17, 4.0, 1e300, -0.0}, {1.0 / 7.0, 2.0, 3.25});
    const auto path = std::filesystem::temp_directory_path() / "cvlab_roundtrip.csv";
    save_csv(ds, path);
    CHECK(load_csv(path) == ds);
    std::filesystem::remove(path);

    const auto cls = Dataset::classification(1, {0.5, 0.25}, {0, 2});
    CHECK(parse_csv(format_csv(cls)) == cls);
    const auto labels_only = Dataset::classification(0, {}, {1, 0, 1});
    CHECK(parse_csv(format_csv(labels_only)) == labels_only);
}

TEST_CASE("csv: density file with one column") {
    const auto ds = parse_csv("#kind=density,d=1\nx1\n0.25\n0.5\n0.75\n");
    CHECK(ds.kind() == TaskKind::Density);
    CHECK(ds.dim() == 1);
    CHECK(ds.size() == 3);
    CHECK(ds.feature(1, 0) == 0.5);
}

TEST_CASE("csv errors name the row") {
    const std::string ragged = "#kind=regression,d=1\nx1,y\n1,2\n3\n";
    try {
        parse_csv(ragged);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("row 4") != std::string::npos);
    }
    try {
        parse_csv("#kind=regression,d=1\nx1,y\n1,abc\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_csv("#kind=survival,d=1\nx1,y\n1,2\n"), ParseError);
    CHECK_THROWS_AS(parse_csv("x1,y\n1,2\n"), ParseError);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), ParseError);
}
