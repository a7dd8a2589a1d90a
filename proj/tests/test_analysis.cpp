#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ervmix/analysis.hpp"
#include "test_support.hpp"

using namespace ervmix;

namespace {

MatrixD planted_clusters(std::mt19937_64& rng, std::size_t m, std::size_t n_per) {
    MatrixD pts(m, 2 * n_per);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> profile_a(m), profile_b(m);
    for (std::size_t i = 0; i < m; ++i) {
        profile_a[i] = unit(rng) < 0.5 ? 0.9 : 0.1;
        profile_b[i] = unit(rng) < 0.5 ? 0.9 : 0.1;
    }
    for (std::size_t j = 0; j < 2 * n_per; ++j)
        for (std::size_t i = 0; i < m; ++i)
            pts(i, j) = (j < n_per ? profile_a[i] : profile_b[i]) + noise(rng);
    return pts;
}

}  // namespace

TEST_CASE("pca separates planted clusters and respects the sign convention") {
    std::mt19937_64 rng(2);
    const std::size_t n_per = 8;
    const MatrixD pts = planted_clusters(rng, 60, n_per);
    const PcaResult res = pca_scores(pts);
    REQUIRE(res.scores.rows() == 2 * n_per);
    // first component separates the groups exactly
    const double sign0 = res.scores(0, 0) > 0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < n_per; ++j) CHECK(res.scores(j, 0) * sign0 > 0.0);
    for (std::size_t j = n_per; j < 2 * n_per; ++j) CHECK(res.scores(j, 0) * sign0 < 0.0);
    CHECK(res.explained_variance[0] >= res.explained_variance[1]);
    CHECK(res.explained_variance[1] > 0.0);
}

TEST_CASE("duplicated columns land on the same score point") {
    std::mt19937_64 rng(3);
    MatrixD pts = planted_clusters(rng, 30, 4);
    MatrixD ext(30, 9);
    for (std::size_t i = 0; i < 30; ++i) {
        for (std::size_t j = 0; j < 8; ++j) ext(i, j) = pts(i, j);
        ext(i, 8) = pts(i, 2);
    }
    const PcaResult res = pca_scores(ext);
    CHECK(res.scores(8, 0) == doctest::Approx(res.scores(2, 0)).epsilon(1e-9));
    CHECK(res.scores(8, 1) == doctest::Approx(res.scores(2, 1)).epsilon(1e-9));
}

TEST_CASE("explained variance matches a dense eigensolve of the column covariance") {
    std::mt19937_64 rng(4);
    for (int it = 0; it < 10; ++it) {
        const std::size_t m = 6 + rng() % 6, n = 4 + rng() % 5;
        MatrixD pts(m, n);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (auto& v : pts.data()) v = unit(rng);
        const PcaResult res = pca_scores(pts);

        // dense m x m covariance of the columns-as-points sample
        std::vector<double> mean(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) mean[i] += pts(i, j);
            mean[i] /= static_cast<double>(n);
        }
        std::vector<std::vector<double>> cov(m, std::vector<double>(m, 0.0));
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) {
                for (std::size_t j = 0; j < n; ++j)
                    cov[a][b] += (pts(a, j) - mean[a]) * (pts(b, j) - mean[b]);
                cov[a][b] /= static_cast<double>(n - 1);
            }
        const auto ev = testsup::jacobi_eigenvalues(cov);
        CHECK(res.explained_variance[0] == doctest::Approx(ev[0]).epsilon(1e-8));
        CHECK(res.explained_variance[1] == doctest::Approx(ev[1]).epsilon(1e-8));
    }
}

TEST_CASE("pca scores are invariant to virus-row reordering") {
    std::mt19937_64 rng(5);
    MatrixD pts = planted_clusters(rng, 40, 5);
    const PcaResult base = pca_scores(pts);
    MatrixD shuffled(40, 10);
    std::vector<std::size_t> order(40);
    for (std::size_t i = 0; i < 40; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 10; ++j) shuffled(i, j) = pts(order[i], j);
    const PcaResult perm = pca_scores(shuffled);
    for (std::size_t j = 0; j < 10; ++j)
        for (int c = 0; c < 2; ++c)
            CHECK(std::abs(perm.scores(j, c)) ==
                  doctest::Approx(std::abs(base.scores(j, c))).epsilon(1e-8));
}

TEST_CASE("pca input validation") {
    MatrixD two(4, 2, 1.0);
    CHECK_THROWS_AS(pca_scores(two), ValidationError);
    MatrixD flat(4, 5, 0.25);
    CHECK_THROWS_AS(pca_scores(flat), ValidationError);
}

TEST_CASE("procrustes alignment") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unit(-3.0, 3.0);
    MatrixD geo(7, 2);
    for (auto& v : geo.data()) v = unit(rng);

    SUBCASE("already aligned input has zero residual") {
        double rss = 1.0;
        const MatrixD out = align_to_geography(geo, geo, &rss);
        CHECK(rss == doctest::Approx(0.0).epsilon(1e-12));
        for (std::size_t k = 0; k < geo.size(); ++k)
            CHECK(out.data()[k] == doctest::Approx(geo.data()[k]).epsilon(1e-9));
    }
    SUBCASE("a rotated and scaled copy is recovered exactly") {
        const double ang = M_PI / 2.0;
        MatrixD scores(7, 2);
        for (std::size_t j = 0; j < 7; ++j) {
            scores(j, 0) = 2.0 * (std::cos(ang) * geo(j, 0) - std::sin(ang) * geo(j, 1));
            scores(j, 1) = 2.0 * (std::sin(ang) * geo(j, 0) + std::cos(ang) * geo(j, 1));
        }
        double rss = 1.0;
        const MatrixD out = align_to_geography(scores, geo, &rss);
        CHECK(rss == doctest::Approx(0.0).epsilon(1e-10));
        for (std::size_t k = 0; k < geo.size(); ++k)
            CHECK(out.data()[k] == doctest::Approx(geo.data()[k]).epsilon(1e-8));
    }
    SUBCASE("reflections are allowed") {
        MatrixD scores(7, 2);
        for (std::size_t j = 0; j < 7; ++j) {
            scores(j, 0) = -geo(j, 0);
            scores(j, 1) = geo(j, 1);
        }
        double rss = 1.0;
        align_to_geography(scores, geo, &rss);
        CHECK(rss == doctest::Approx(0.0).epsilon(1e-10));
    }
    SUBCASE("no random similarity transform does better") {
        MatrixD scores(7, 2);
        for (auto& v : scores.data()) v = unit(rng);
        double best = 0.0;
        align_to_geography(scores, geo, &best);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
        std::uniform_real_distribution<double> scale(0.1, 5.0);
        for (int it = 0; it < 1000; ++it) {
            const double a = angle(rng), s = scale(rng);
            const double tx = unit(rng), ty = unit(rng);
            const double refl = it % 2 == 0 ? 1.0 : -1.0;
            double rss = 0.0;
            for (std::size_t j = 0; j < 7; ++j) {
                const double x = refl * scores(j, 0), y = scores(j, 1);
                const double u = s * (std::cos(a) * x - std::sin(a) * y) + tx;
                const double v = s * (std::sin(a) * x + std::cos(a) * y) + ty;
                rss += (u - geo(j, 0)) * (u - geo(j, 0)) + (v - geo(j, 1)) * (v - geo(j, 1));
            }
            CHECK(best <= rss + 1e-9);
        }
    }
    SUBCASE("residual is invariant to similarity transforms of the input") {
        MatrixD scores(7, 2);
        for (auto& v : scores.data()) v = unit(rng);
        double base = 0.0;
        align_to_geography(scores, geo, &base);
        MatrixD moved(7, 2);
        const double a = 1.1, s = 3.0;
        for (std::size_t j = 0; j < 7; ++j) {
            moved(j, 0) = s * (std::cos(a) * scores(j, 0) - std::sin(a) * scores(j, 1)) + 5.0;
            moved(j, 1) = s * (std::sin(a) * scores(j, 0) + std::cos(a) * scores(j, 1)) - 2.0;
        }
        double rss = 0.0;
        align_to_geography(moved, geo, &rss);
        CHECK(rss == doctest::Approx(base).epsilon(1e-8));
    }
}

TEST_CASE("fit summary tables") {
    const auto cm = testsup::make_counts({{0, 7, 0}, {4, 0, 0}});
    const auto meta = CohortMetadata::build({"A", "B", "C"}, {"E1", "E1", "E2"});
    FitResult fr;
    fr.params.pi_model = PiModel::PerVirus;
    fr.params.pi = {0.5, 0.5};
    fr.params.alpha = {0.2, 0.4};
    fr.params.r = {3.0, 6.0, 9.0};
    fr.params.p = {0.9, 0.95};
    fr.posterior.z = MatrixD(2, 3, 0.0);
    fr.posterior.z(0, 1) = 1.0;
    fr.posterior.z(1, 0) = 1.0;

    const FitSummaryTables tables = fit_summary_tables(cm, meta, fr);
    SUBCASE("single nonzero cell per row means the row mean is that cell") {
        CHECK(tables.per_virus[0].mean_nonzero == doctest::Approx(7.0));
        CHECK(tables.per_virus[1].mean_nonzero == doctest::Approx(4.0));
        CHECK(tables.per_virus[0].log_alpha == doctest::Approx(std::log(0.2)));
        CHECK(tables.per_column[2].nonzero_cells == 0);
        CHECK(tables.per_column[2].mean_nonzero == doctest::Approx(0.0));
        CHECK(tables.per_column[1].log_r == doctest::Approx(std::log(6.0)));
    }
    SUBCASE("hard posteriors leave the histogram empty") {
        std::size_t total = 0;
        for (const auto c : tables.zhat_histogram.bin_counts) total += c;
        CHECK(total == 0);
        CHECK(tables.zhat_histogram.fraction_below + tables.zhat_histogram.fraction_above ==
              doctest::Approx(1.0));
    }
    SUBCASE("posterior means stratify by experiment and count") {
        REQUIRE(tables.count_posterior.size() == 2);
        // experiment E1 holds both nonzero counts (columns 0 and 1)
        for (const auto& row : tables.count_posterior) {
            CHECK(row.experiment == 0);
            CHECK(row.mean_z == doctest::Approx(1.0));
            CHECK(row.cells == 1);
        }
    }
}
