#include "shotclust/basis.hpp"

#include <cmath>

namespace shotclust {

Vec kde_grid(const std::vector<ShotRecord>& records, const CourtGrid& grid, double bandwidth)
{
    if (records.empty())
        throw param_error("kde_grid requires at least one record");
    if (!(bandwidth > 0.0))
        throw param_error("kde_grid bandwidth must be positive");

    const int J = grid.blocks();
    const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);

    Vec row = Vec::Zero(J);
    for (const ShotRecord& rec : records) {
        if (!grid.contains(rec.x, rec.y))
            throw param_error("kde_grid record outside the court domain");
        for (int j = 0; j < J; ++j) {
            const double dx = grid.centroid_x(j) - rec.x;
            const double dy = grid.centroid_y(j) - rec.y;
            row[j] += std::exp(-(dx * dx + dy * dy) * inv2h2);
        }
    }

    // Strict positivity for the later log transform; the floor is far below
    // any kernel value that matters.
    row = row.cwiseMax(1e-200);

    const double area = grid.block_len_x * grid.block_len_y;
    const double mass = row.sum() * area;
    row *= static_cast<double>(records.size()) / mass;
    return row;
}

namespace {

double kl_divergence(const Mat& Lambda, const Mat& WB)
{
    double d = 0.0;
    for (Index i = 0; i < Lambda.rows(); ++i) {
        for (Index j = 0; j < Lambda.cols(); ++j) {
            const double lam = Lambda(i, j);
            const double hat = WB(i, j);
            if (lam > 0.0)
                d += lam * std::log(lam / hat) - lam + hat;
            else
                d += hat;
        }
    }
    return d;
}

NmfFactors nmf_single(const Mat& Lambda, int K, const NmfOptions& opts, Rng& rng)
{
    const Index N = Lambda.rows();
    const Index J = Lambda.cols();

    // Uniform (0,1] init scaled so E[WB] matches the data mean.
    const double scale = std::sqrt(Lambda.mean() / (0.25 * K));
    Mat W(N, K), B(K, J);
    for (Index i = 0; i < N; ++i)
        for (int k = 0; k < K; ++k)
            W(i, k) = scale * (1.0 - rng.uniform());
    for (int k = 0; k < K; ++k)
        for (Index j = 0; j < J; ++j)
            B(k, j) = scale * (1.0 - rng.uniform());

    NmfFactors out;
    Mat WB = W * B;
    out.objective_trace.push_back(kl_divergence(Lambda, WB));

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        // W update
        Mat R = Lambda.array() / WB.array();
        Vec bsum = B.rowwise().sum();
        W = (W.array() * (R * B.transpose()).array()).matrix() *
            bsum.cwiseInverse().asDiagonal();
        W = W.cwiseMax(opts.floor);
        WB = W * B;

        // B update
        R = Lambda.array() / WB.array();
        Vec wsum = W.colwise().sum();
        B = wsum.cwiseInverse().asDiagonal() *
            (B.array() * (W.transpose() * R).array()).matrix();
        B = B.cwiseMax(opts.floor);
        WB = W * B;

        const double obj = kl_divergence(Lambda, WB);
        const double prev = out.objective_trace.back();
        out.objective_trace.push_back(obj);
        if (std::abs(prev - obj) < opts.tol * std::abs(prev))
            break;
    }

    out.W = std::move(W);
    out.B = std::move(B);
    return out;
}

} // namespace

NmfFactors nmf(const IntensityMatrix& Lambda, int K, const NmfOptions& opts)
{
    const Mat& L = Lambda.Lambda;
    if (K < 1 || K > std::min(L.rows(), L.cols()))
        throw param_error("NMF rank must satisfy 1 <= K <= min(N, J)");
    if (!L.allFinite() || L.minCoeff() < 0.0)
        throw param_error("NMF input must be finite and nonnegative");

    Rng master(opts.seed);
    NmfFactors best;
    for (int r = 0; r < std::max(1, opts.restarts); ++r) {
        Rng rng = master.split(r);
        NmfFactors cand = nmf_single(L, K, opts, rng);
        if (best.objective_trace.empty() || cand.objective() < best.objective())
            best = std::move(cand);
    }
    return best;
}

DesignMatrix build_design(const Mat& B)
{
    const Index K = B.rows();
    const Index J = B.cols();
    if (J < 2)
        throw param_error("design needs at least two blocks");
    if (B.minCoeff() <= 0.0)
        throw param_error("basis matrix must be strictly positive before the log transform");

    DesignMatrix design;
    design.X = Mat::Ones(J, K + 1);
    for (Index k = 0; k < K; ++k) {
        Vec col = B.row(k).transpose().array().log().matrix();
        const double mean = col.mean();
        col.array() -= mean;
        const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(J - 1));
        if (!(sd > 0.0))
            throw param_error("basis row " + std::to_string(k) +
                              " is constant and cannot be standardized");
        design.X.col(k + 1) = col / sd;
    }
    return design;
}

} // namespace shotclust
