#include "shotclust/basis.hpp"

#include "shotclust/rng.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace shotclust;

namespace {

// 2D Simpson quadrature of the raw (unnormalized) kernel sum over the court
double kernel_mass_quadrature(const std::vector<ShotRecord>& records, const CourtGrid& grid,
                              double h, int cells_per_block = 8)
{
    const int nx = grid.nx * cells_per_block;
    const int ny = grid.ny * cells_per_block;
    const double dx = grid.width() / nx;
    const double dy = grid.height() / ny;
    const double inv2h2 = 1.0 / (2.0 * h * h);

    auto f = [&](double x, double y) {
        double v = 0.0;
        for (const ShotRecord& rec : records) {
            const double ddx = x - rec.x;
            const double ddy = y - rec.y;
            v += std::exp(-(ddx * ddx + ddy * ddy) * inv2h2);
        }
        return v;
    };

    // midpoint rule on a fine grid is plenty below 1e-6 relative here
    double total = 0.0;
    for (int ix = 0; ix < nx; ++ix)
        for (int iy = 0; iy < ny; ++iy)
            total += f((ix + 0.5) * dx, (iy + 0.5) * dy);
    return total * dx * dy;
}

} // namespace

TEST_CASE("kde peaks at the block holding the only shot")
{
    const CourtGrid grid;
    const int j_target = 7 * grid.nx + 20;
    const ShotRecord rec{"p", grid.centroid_x(j_target), grid.centroid_y(j_target), {}};
    const Vec row = kde_grid({rec}, grid, 0.8);

    Index argmax = 0;
    row.maxCoeff(&argmax);
    CHECK(static_cast<int>(argmax) == j_target);
    CHECK(row.minCoeff() > 0.0);
}

TEST_CASE("kde block-area-weighted sum equals the record count")
{
    const CourtGrid grid;
    Rng rng(23);
    std::vector<ShotRecord> records;
    for (int r = 0; r < 40; ++r)
        records.push_back({"p", rng.uniform(0.0, 47.0), rng.uniform(0.0, 50.0), {}});

    const double h = 2.5;
    const Vec row = kde_grid(records, grid, h);
    const double area = grid.block_len_x * grid.block_len_y;
    CHECK(row.sum() * area == doctest::Approx(40.0).epsilon(1e-10));

    // the rescaling divisor is a genuine quadrature of the kernel mass:
    // centroid sums agree with an independent fine-grid quadrature
    const double quad = kernel_mass_quadrature(records, grid, h);
    double centroid_mass = 0.0;
    const double inv2h2 = 1.0 / (2.0 * h * h);
    for (int j = 0; j < grid.blocks(); ++j) {
        double v = 0.0;
        for (const ShotRecord& rec : records) {
            const double dx = grid.centroid_x(j) - rec.x;
            const double dy = grid.centroid_y(j) - rec.y;
            v += std::exp(-(dx * dx + dy * dy) * inv2h2);
        }
        centroid_mass += v * area;
    }
    CHECK(centroid_mass == doctest::Approx(quad).epsilon(2e-3));
}

TEST_CASE("kde determinism and error paths")
{
    const CourtGrid grid;
    std::vector<ShotRecord> records{{"p", 3.0, 4.0, {}}, {"p", 30.0, 20.0, {}}};
    const Vec a = kde_grid(records, grid, 2.5);
    const Vec b = kde_grid(records, grid, 2.5);
    CHECK((a - b).norm() == doctest::Approx(0.0));

    std::swap(records[0], records[1]);
    const Vec c = kde_grid(records, grid, 2.5);
    CHECK((a - c).norm() == doctest::Approx(0.0));

    CHECK_THROWS_AS(kde_grid({}, grid, 2.5), param_error);
    CHECK_THROWS_AS(kde_grid(records, grid, 0.0), param_error);
}

TEST_CASE("nmf recovers an exactly factorizable matrix")
{
    Rng rng(31);
    const int N = 12, J = 30;
    Vec w(N), b(J);
    for (int i = 0; i < N; ++i)
        w[i] = 0.2 + rng.uniform();
    for (int j = 0; j < J; ++j)
        b[j] = 0.2 + rng.uniform();
    IntensityMatrix Lambda;
    Lambda.Lambda = w * b.transpose();

    NmfOptions opts;
    opts.max_iter = 4000;
    opts.tol = 1e-14;
    const NmfFactors f = nmf(Lambda, 1, opts);
    CHECK(f.objective() < 1e-8);
}

TEST_CASE("nmf objective trace is monotone non-increasing and factors stay nonnegative")
{
    Rng rng(37);
    IntensityMatrix Lambda;
    Lambda.Lambda = Mat(20, 50);
    for (Index i = 0; i < 20; ++i)
        for (Index j = 0; j < 50; ++j)
            Lambda.Lambda(i, j) = 0.05 + 4.0 * rng.uniform();

    NmfOptions opts;
    opts.restarts = 2;
    const NmfFactors f = nmf(Lambda, 3, opts);
    REQUIRE(f.objective_trace.size() > 3);
    for (std::size_t s = 1; s < f.objective_trace.size(); ++s)
        CHECK(f.objective_trace[s] <= f.objective_trace[s - 1] * (1.0 + 1e-12) + 1e-12);
    CHECK(f.W.minCoeff() >= 1e-12);
    CHECK(f.B.minCoeff() >= 1e-12);
}

TEST_CASE("nmf input validation")
{
    IntensityMatrix Lambda;
    Lambda.Lambda = Mat::Ones(4, 6);
    CHECK_THROWS_AS(nmf(Lambda, 5, {}), param_error);
    CHECK_THROWS_AS(nmf(Lambda, 0, {}), param_error);
    Lambda.Lambda(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(nmf(Lambda, 2, {}), param_error);
}

TEST_CASE("build_design invariants")
{
    Rng rng(41);
    const int K = 4, J = 200;
    Mat B(K, J);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j)
            B(k, j) = std::exp(rng.normal(0.0, 1.3));

    const DesignMatrix design = build_design(B);
    REQUIRE(design.X.cols() == K + 1);
    CHECK((design.X.col(0).array() == 1.0).all());
    for (int k = 1; k <= K; ++k) {
        const Vec col = design.X.col(k);
        CHECK(std::abs(col.mean()) < 1e-10);
        const double sd = std::sqrt(col.squaredNorm() / (J - 1));
        CHECK(std::abs(sd - 1.0) < 1e-10);
    }
}

TEST_CASE("build_design round trip of a standardized draw")
{
    Rng rng(43);
    const int J = 500;
    Vec g(J);
    for (int j = 0; j < J; ++j)
        g[j] = rng.normal();
    Vec centered = g.array() - g.mean();
    const Vec standardized = centered / std::sqrt(centered.squaredNorm() / (J - 1));

    Mat B = g.transpose().array().exp().matrix();
    const DesignMatrix design = build_design(B);
    CHECK((design.X.col(1) - standardized).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("build_design is invariant to rescaling a basis row")
{
    Rng rng(47);
    Mat B(3, 80);
    for (Index k = 0; k < 3; ++k)
        for (Index j = 0; j < 80; ++j)
            B(k, j) = 0.1 + rng.uniform();

    const DesignMatrix base = build_design(B);
    Mat scaled = B;
    scaled.row(1) *= 137.5;
    const DesignMatrix after = build_design(scaled);
    CHECK((base.X - after.X).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("build_design rejects degenerate input")
{
    Mat constant_row = Mat::Ones(2, 60);
    CHECK_THROWS_AS(build_design(constant_row), param_error);

    Mat with_zero = Mat::Ones(2, 60);
    with_zero(0, 5) = 0.0;
    CHECK_THROWS_AS(build_design(with_zero), param_error);
}
