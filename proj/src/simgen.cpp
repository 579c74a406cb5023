#include "shotclust/simgen.hpp"

#include "shotclust/zip.hpp"

#include <algorithm>
#include <numeric>

namespace shotclust {

namespace {

Mat standardize_columns(Mat X)
{
    const Index J = X.rows();
    for (Index c = 1; c < X.cols(); ++c) {
        Vec col = X.col(c);
        col.array() -= col.mean();
        const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(J - 1));
        if (!(sd > 0.0))
            throw param_error("design column with zero variance");
        X.col(c) = col / sd;
    }
    return X;
}

std::vector<Vec> paper_betas()
{
    std::vector<Vec> betas(3, Vec(6));
    betas[0] << -1.0, 1.2, 0.95, 1.1, 1.0, 0.8;
    betas[1] << -0.4, 0.6, 0.7, 0.5, 0.8, 0.3;
    betas[2] << -0.9, 0.2, 0.1, 0.3, 0.2, 0.4;
    return betas;
}

} // namespace

DesignMatrix synthetic_design(int J, int K, std::uint64_t seed)
{
    if (J < 2 || K < 1)
        throw param_error("synthetic design needs J >= 2 and K >= 1");
    Rng rng(seed);
    Mat X = Mat::Ones(J, K + 1);
    for (int c = 1; c <= K; ++c)
        for (int j = 0; j < J; ++j)
            X(j, c) = rng.normal();
    DesignMatrix out;
    out.X = standardize_columns(std::move(X));
    return out;
}

DesignMatrix subsample_design(const DesignMatrix& X, int J_sub, std::uint64_t seed)
{
    const int J = X.J();
    if (J_sub < 2 || J_sub > J)
        throw param_error("subsample size out of range");
    std::vector<int> idx(J);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (int i = J - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.integer(i + 1)]);
    idx.resize(J_sub);
    std::sort(idx.begin(), idx.end());

    Mat sub(J_sub, X.X.cols());
    for (int r = 0; r < J_sub; ++r)
        sub.row(r) = X.X.row(idx[r]);
    DesignMatrix out;
    out.X = standardize_columns(std::move(sub));
    return out;
}

SimDesign paper_design(DesignType type, const DesignMatrix& X, std::uint64_t seed)
{
    if (X.p() != 5)
        throw param_error("paper design expects 5 basis covariates");
    SimDesign d;
    d.group_sizes = type == DesignType::balanced ? std::vector<int>{25, 25, 25}
                                                 : std::vector<int>{10, 35, 30};
    d.true_betas = paper_betas();
    d.true_rhos = {0.1, 0.3, 0.4};
    d.design = X;
    d.seed = seed;
    return d;
}

SimDesign desk_design(DesignType type, const DesignMatrix& X, std::uint64_t seed)
{
    SimDesign d = paper_design(type, X, seed);
    d.group_sizes = type == DesignType::balanced ? std::vector<int>{10, 10, 10}
                                                 : std::vector<int>{4, 14, 12};
    return d;
}

std::pair<CountMatrix, std::vector<int>> generate(const SimDesign& design, Rng& rng)
{
    const int n = design.n();
    const int J = design.design.J();
    const int k0 = design.k0();
    if (static_cast<int>(design.true_betas.size()) != k0 ||
        static_cast<int>(design.true_rhos.size()) != k0)
        throw param_error("group sizes, betas and rhos must share one length");

    CountMatrix counts;
    counts.y = IMat::Zero(n, J);
    counts.player_ids.resize(n);
    std::vector<int> labels(n);

    int i = 0;
    for (int g = 0; g < k0; ++g) {
        const Vec mu = (design.design.X * design.true_betas[g])
                           .unaryExpr([](double lp) { return std::exp(clamp_lp(lp)); });
        for (int r = 0; r < design.group_sizes[g]; ++r, ++i) {
            labels[i] = g;
            counts.player_ids[i] = "sim_" + std::to_string(i + 1);
            for (int j = 0; j < J; ++j) {
                const long draw = zip_sample(ZipParams{mu[j], design.true_rhos[g]}, rng);
                if (draw > std::numeric_limits<int>::max())
                    throw numeric_error("simulated count overflows int");
                counts.y(i, j) = static_cast<int>(draw);
            }
        }
    }
    return {std::move(counts), std::move(labels)};
}

} // namespace shotclust
