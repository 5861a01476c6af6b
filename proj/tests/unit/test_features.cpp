#include "helpers.hpp"

#include "ngrc/error.hpp"
#include "ngrc/features.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace ngrc;

namespace {

// X_{i - j s} read straight off the series, concatenated tap by tap.
Eigen::VectorXd linear_oracle(const TimeSeries& series, int k, int s, Eigen::Index i) {
    const Eigen::Index d = series.components();
    Eigen::VectorXd out(d * k);
    for (int j = 0; j < k; ++j) {
        for (Eigen::Index c = 0; c < d; ++c) {
            out(j * d + c) = series.values(i - j * s, c);
        }
    }
    return out;
}

// Every ordered index tuple, sorted and deduplicated.
std::vector<std::vector<int>> brute_force_table(int n, int p) {
    std::set<std::vector<int>> unique;
    std::vector<int> idx(static_cast<std::size_t>(p), 0);
    while (true) {
        std::vector<int> sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        unique.insert(sorted);
        int pos = p - 1;
        while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == n) {
            idx[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) {
            break;
        }
    }
    return {unique.begin(), unique.end()};
}

// Full outer-product tensors of the linear block; keeps entries whose index
// tuple is non-decreasing, scanned in row-major order.
Eigen::VectorXd outer_product_oracle(const Eigen::VectorXd& lin, const std::vector<int>& degrees,
                                     bool constant) {
    std::vector<double> out;
    if (constant) {
        out.push_back(1.0);
    }
    for (Eigen::Index i = 0; i < lin.size(); ++i) {
        out.push_back(lin(i));
    }
    const Eigen::Index n = lin.size();
    for (int p : degrees) {
        if (p == 2) {
            const Eigen::MatrixXd outer = lin * lin.transpose();
            for (Eigen::Index a = 0; a < n; ++a) {
                for (Eigen::Index b = a; b < n; ++b) {
                    out.push_back(outer(a, b));
                }
            }
        } else if (p == 3) {
            for (Eigen::Index a = 0; a < n; ++a) {
                const Eigen::MatrixXd slab = lin(a) * (lin * lin.transpose());
                for (Eigen::Index b = a; b < n; ++b) {
                    for (Eigen::Index c = b; c < n; ++c) {
                        out.push_back(slab(b, c));
                    }
                }
            }
        }
    }
    return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

TimeSeries column_series(std::vector<double> v) {
    Eigen::MatrixXd m = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    return TimeSeries(1.0, 0.0, m);
}

}  // namespace

TEST_CASE("feature counts of the three benchmark specs") {
    CHECK(feature_length(FeatureSpec(3, 2, 1, {2}, true)) == 28);
    CHECK(feature_length(FeatureSpec(3, 2, 1, {3}, false)) == 62);
    CHECK(feature_length(FeatureSpec(2, 4, 5, {2}, true)) == 45);
    CHECK(feature_length(FeatureSpec(1, 1, 1, {}, true)) == 2);
}

TEST_CASE("block lengths follow combinations with repetition") {
    for (int n = 1; n <= 12; ++n) {
        CHECK(monomial_count(n, 2) == static_cast<std::size_t>(n * (n + 1) / 2));
        CHECK(monomial_count(n, 3) == static_cast<std::size_t>(n * (n + 1) * (n + 2) / 6));
    }
}

TEST_CASE("invalid specs are rejected") {
    CHECK_THROWS_AS(FeatureSpec(0, 2, 1, {2}, true), InvalidArgument);
    CHECK_THROWS_AS(FeatureSpec(3, 0, 1, {2}, true), InvalidArgument);
    CHECK_THROWS_AS(FeatureSpec(3, 2, 0, {2}, true), InvalidArgument);
    CHECK_THROWS_AS(FeatureSpec(3, 2, 1, {1}, true), InvalidArgument);
}

TEST_CASE("linear features read the delay taps") {
    const TimeSeries s = column_series({1, 2, 3});
    const FeatureSpec k2s1(1, 2, 1, {}, false);
    const FeatureSpec k2s2(1, 2, 2, {}, false);
    CHECK(linear_features(s, k2s1, 1) == Eigen::Vector2d(2, 1));
    CHECK(linear_features(s, k2s2, 2) == Eigen::Vector2d(3, 1));

    std::mt19937_64 rng(11);
    const TimeSeries r(0.1, 0.0, testing::random_matrix(5, 3, rng));
    const FeatureSpec spec(3, 3, 2, {2}, true);
    CHECK(linear_features(r, spec, 4) == linear_oracle(r, 3, 2, 4));
}

TEST_CASE("warm-up error fires exactly before (k-1)s") {
    std::mt19937_64 rng(3);
    const TimeSeries r(0.1, 0.0, testing::random_matrix(20, 2, rng));
    for (int k = 1; k <= 4; ++k) {
        for (int s = 1; s <= 3; ++s) {
            const FeatureSpec spec(2, k, s, {2}, true);
            const Eigen::Index first = (k - 1) * s;
            for (Eigen::Index i = 0; i < 12; ++i) {
                if (i < first) {
                    CHECK_THROWS_AS(linear_features(r, spec, i), WarmupError);
                } else {
                    CHECK(linear_features(r, spec, i) == linear_oracle(r, k, s, i));
                }
            }
        }
    }
}

TEST_CASE("monomial tables") {
    using T = std::vector<std::vector<int>>;
    CHECK(monomial_exponent_table(2, 2) == T{{0, 0}, {0, 1}, {1, 1}});
    CHECK(monomial_exponent_table(2, 3) == T{{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}});
    CHECK(monomial_exponent_table(6, 2).size() == 21);
    for (int n = 1; n <= 12; ++n) {
        CAPTURE(n);
        CHECK(monomial_exponent_table(n, 2) == brute_force_table(n, 2));
        CHECK(monomial_exponent_table(n, 3) == brute_force_table(n, 3));
    }
}

TEST_CASE("total features: hand examples") {
    const FeatureSpec lorenz(3, 2, 1, {2}, true);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(28);
    expected(0) = 1.0;
    CHECK(total_features(DelayWindow::Zero(2, 3), lorenz) == expected);

    const FeatureSpec scalar(1, 2, 1, {2}, false);
    DelayWindow w(2, 1);
    w << 2, 3;
    Eigen::VectorXd hand(5);
    hand << 2, 3, 4, 6, 9;
    CHECK(total_features(w, scalar) == hand);

    const FeatureSpec shifted(1, 1, 1, {}, true, 2.5);
    CHECK(total_features(DelayWindow::Constant(1, 1, 7.0), shifted) == Eigen::Vector2d(2.5, 7.0));
}

TEST_CASE("total features match the outer-product oracle") {
    std::mt19937_64 rng(5);
    for (const auto& degrees : {std::vector<int>{2}, std::vector<int>{3}, std::vector<int>{2, 3}}) {
        for (bool constant : {true, false}) {
            const FeatureSpec spec(3, 2, 1, degrees, constant);
            const DelayWindow w = testing::random_matrix(2, 3, rng);
            Eigen::VectorXd lin(6);
            lin << w.row(0).transpose(), w.row(1).transpose();
            const Eigen::VectorXd got = total_features(w, spec);
            CHECK(static_cast<std::size_t>(got.size()) == feature_length(spec));
            CHECK(got == outer_product_oracle(lin, degrees, constant));
        }
    }
}

TEST_CASE("each monomial is the product of its table entries") {
    std::mt19937_64 rng(9);
    for (int d = 1; d <= 4; ++d) {
        for (int k = 1; d * k <= 8; ++k) {
            const FeatureSpec spec(d, k, 1, {2, 3}, false);
            const FeatureMap map(spec);
            const Eigen::VectorXd lin = testing::random_vector(d * k, rng);
            const Eigen::VectorXd f = map.evaluate(lin);
            Eigen::Index pos = d * k;
            for (int p : {2, 3}) {
                for (const auto& idx : monomial_exponent_table(d * k, p)) {
                    double prod = 1.0;
                    for (int a : idx) {
                        prod *= lin(a);
                    }
                    CHECK(f(pos++) == doctest::Approx(prod).epsilon(1e-15));
                }
            }
            CHECK(pos == f.size());
        }
    }
}

TEST_CASE("length property over many specs") {
    std::mt19937_64 rng(1);
    for (int d = 1; d <= 3; ++d) {
        for (int k = 1; k <= 4; ++k) {
            for (const auto& degrees :
                 {std::vector<int>{}, std::vector<int>{2}, std::vector<int>{3}, std::vector<int>{2, 3}}) {
                for (bool c : {true, false}) {
                    const FeatureSpec spec(d, k, 2, degrees, c);
                    const DelayWindow w = testing::random_matrix(k, d, rng);
                    CHECK(static_cast<std::size_t>(total_features(w, spec).size()) ==
                          feature_length(spec));
                }
            }
        }
    }
}

TEST_CASE("odd feature sets are odd functions") {
    std::mt19937_64 rng(21);
    const FeatureSpec odd(3, 2, 1, {3}, false);
    REQUIRE(odd.is_odd());
    CHECK_FALSE(FeatureSpec(3, 2, 1, {3}, true).is_odd());
    CHECK_FALSE(FeatureSpec(3, 2, 1, {2, 3}, false).is_odd());
    for (int trial = 0; trial < 20; ++trial) {
        const DelayWindow w = testing::random_matrix(2, 3, rng, -5, 5);
        CHECK(total_features(-w, odd) == -total_features(w, odd));
    }
}

TEST_CASE("degenerate single-variable quadratic") {
    const FeatureSpec spec(1, 1, 1, {2}, false);
    CHECK(feature_length(spec) == 2);
    CHECK(total_features(DelayWindow::Constant(1, 1, -3.0), spec) == Eigen::Vector2d(-3, 9));
}

TEST_CASE("feature block columns equal per-sample features") {
    std::mt19937_64 rng(4);
    const TimeSeries r(0.1, 0.0, testing::random_matrix(30, 2, rng));
    const FeatureSpec spec(2, 3, 2, {2, 3}, true);
    const FeatureMap map(spec);
    const Eigen::MatrixXd block = map.feature_block(r, 4, 29);
    REQUIRE(block.cols() == 26);
    for (Eigen::Index i = 4; i <= 29; ++i) {
        CHECK(block.col(i - 4) == total_features(delay_window(r, spec, i), spec));
    }
}

TEST_CASE("feature Jacobian agrees with central differences") {
    std::mt19937_64 rng(17);
    const FeatureSpec spec(3, 2, 1, {2, 3}, true);
    const FeatureMap map(spec);
    const Eigen::VectorXd lin = testing::random_vector(6, rng);
    const Eigen::MatrixXd jac = map.jacobian(lin);
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < lin.size(); ++j) {
        Eigen::VectorXd up = lin, down = lin;
        up(j) += h;
        down(j) -= h;
        const Eigen::VectorXd fd = (map.evaluate(up) - map.evaluate(down)) / (2 * h);
        CHECK((jac.col(j) - fd).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("labels name every feature") {
    const FeatureMap map(FeatureSpec(3, 2, 1, {2}, true));
    const auto labels = map.labels({"x", "y", "z"});
    REQUIRE(labels.size() == 28);
    CHECK(labels.front() == "c");
    CHECK(std::set<std::string>(labels.begin(), labels.end()).size() == 28);
}
