#include "shotclust/baselines.hpp"

#include "shotclust/rng.hpp"
#include "shotclust/zip.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace shotclust {

double rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b)
{
    const std::size_t n = labels_a.size();
    if (labels_b.size() != n)
        throw param_error("rand_index label lengths differ");
    if (n < 2)
        throw param_error("rand_index needs at least two objects");

    // pair counts via the contingency table
    std::map<int, double> ca, cb;
    std::map<std::pair<int, int>, double> cab;
    for (std::size_t i = 0; i < n; ++i) {
        ca[labels_a[i]] += 1.0;
        cb[labels_b[i]] += 1.0;
        cab[{labels_a[i], labels_b[i]}] += 1.0;
    }
    auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
    double sum_ab = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, m] : cab)
        sum_ab += choose2(m);
    for (const auto& [key, m] : ca)
        sum_a += choose2(m);
    for (const auto& [key, m] : cb)
        sum_b += choose2(m);

    const double pairs = choose2(static_cast<double>(n));
    const double agree = pairs + 2.0 * sum_ab - sum_a - sum_b; // together-together + apart-apart
    return agree / pairs;
}

namespace {

double sq_dist(const Mat& F, int i, const Vec& center)
{
    return (F.row(i).transpose() - center).squaredNorm();
}

KmeansResult kmeans_single(const Mat& F, int k, Rng& rng)
{
    const int n = static_cast<int>(F.rows());
    const int d = static_cast<int>(F.cols());

    // k-means++ seeding
    Mat centers(k, d);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    centers.row(0) = F.row(static_cast<int>(rng.integer(n)));
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            min_d2[i] = std::min(min_d2[i], sq_dist(F, i, centers.row(c - 1).transpose()));
            total += min_d2[i];
        }
        int pick = n - 1;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            for (int i = 0; i < n; ++i) {
                u -= min_d2[i];
                if (u < 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<int>(rng.integer(n));
        }
        centers.row(c) = F.row(pick);
    }

    KmeansResult res;
    res.labels.assign(n, 0);
    for (int iter = 0; iter < 1000; ++iter) {
        bool changed = false;
        double wcss = 0.0;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double dd = sq_dist(F, i, centers.row(c).transpose());
                if (dd < bd) {
                    bd = dd;
                    best = c;
                }
            }
            wcss += bd;
            if (res.labels[i] != best) {
                res.labels[i] = best;
                changed = true;
            }
        }
        res.objective_trace.push_back(wcss);

        Mat sums = Mat::Zero(k, d);
        std::vector<int> cnt(k, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(res.labels[i]) += F.row(i);
            cnt[res.labels[i]] += 1;
        }
        for (int c = 0; c < k; ++c)
            if (cnt[c] > 0)
                centers.row(c) = sums.row(c) / cnt[c];

        if (!changed && iter > 0)
            break;
    }
    res.centers = centers;
    res.objective = res.objective_trace.back();
    return res;
}

} // namespace

KmeansResult kmeans(const Mat& features, int k, int restarts, std::uint64_t seed)
{
    const int n = static_cast<int>(features.rows());
    if (k < 1 || k > n)
        throw param_error("kmeans requires 1 <= k <= n");
    Rng master(seed);
    KmeansResult best;
    best.objective = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, restarts); ++r) {
        Rng rng = master.split(r);
        KmeansResult cand = kmeans_single(features, k, rng);
        if (cand.objective < best.objective)
            best = std::move(cand);
    }
    return best;
}

double silverman_bandwidth(const Vec& column, int d)
{
    const Index n = column.size();
    const double mean = column.mean();
    const double sd = std::sqrt((column.array() - mean).square().sum() /
                                std::max<Index>(1, n - 1));
    const double dd = static_cast<double>(std::max(1, d));
    const double h = sd * std::pow(4.0 / ((dd + 2.0) * n), 1.0 / (dd + 4.0));
    return h > 0.0 ? h : 1e-3;
}

std::vector<int> mean_shift(const Mat& features, const MeanShiftOptions& opts)
{
    const int n = static_cast<int>(features.rows());
    const int d = static_cast<int>(features.cols());
    if (n < 1)
        throw param_error("mean_shift needs data");

    // scale coordinates so a unit isotropic kernel matches the per-dimension
    // bandwidths (Silverman default)
    Mat F = features;
    double bw = 1.0;
    if (opts.bandwidth > 0.0) {
        bw = opts.bandwidth;
    } else {
        for (int c = 0; c < d; ++c) {
            const double h = silverman_bandwidth(features.col(c), d);
            F.col(c) /= h;
        }
    }
    const double inv2h2 = 1.0 / (2.0 * bw * bw);

    Mat modes(n, d);
    for (int i = 0; i < n; ++i) {
        Vec x = F.row(i).transpose();
        for (int iter = 0; iter < opts.max_iter; ++iter) {
            Vec num = Vec::Zero(d);
            double den = 0.0;
            for (int m = 0; m < n; ++m) {
                const double wgt =
                    std::exp(-(F.row(m).transpose() - x).squaredNorm() * inv2h2);
                num += wgt * F.row(m).transpose();
                den += wgt;
            }
            Vec next = num / den;
            const double step = (next - x).norm();
            x = next;
            if (step < opts.step_tol)
                break;
        }
        modes.row(i) = x.transpose();
    }

    // merge modes within bandwidth/2
    std::vector<int> labels(n, -1);
    int next_label = 0;
    for (int i = 0; i < n; ++i) {
        for (int m = 0; m < i; ++m) {
            if (labels[m] >= 0 &&
                (modes.row(i) - modes.row(m)).norm() < bw / 2.0) {
                labels[i] = labels[m];
                break;
            }
        }
        if (labels[i] < 0)
            labels[i] = next_label++;
    }
    return labels;
}

Vec nnls(const Mat& BT, const Vec& y, int max_iter, double tol)
{
    const Index K = BT.cols();
    Vec w = Vec::Zero(K);
    Vec col_norms(K);
    for (Index k = 0; k < K; ++k)
        col_norms[k] = BT.col(k).squaredNorm();

    Vec resid = y; // y - BT * w
    for (int iter = 0; iter < max_iter; ++iter) {
        double max_change = 0.0;
        for (Index k = 0; k < K; ++k) {
            if (col_norms[k] <= 0.0)
                continue;
            const double grad = BT.col(k).dot(resid);
            const double cand = std::max(0.0, w[k] + grad / col_norms[k]);
            const double delta = cand - w[k];
            if (delta != 0.0) {
                resid -= delta * BT.col(k);
                w[k] = cand;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        if (max_change < tol)
            break;
    }
    return w;
}

FeatureMatrix build_features(const CountMatrix& counts, const DesignMatrix& X, FeatureKind kind,
                             const Mat* basis)
{
    FeatureMatrix out;
    out.kind = kind;
    const int n = counts.n();
    out.degenerate.assign(n, false);

    if (kind == FeatureKind::zip_mle) {
        const int p1 = static_cast<int>(X.X.cols());
        out.F = Mat::Zero(n, p1 + 1);
        for (int i = 0; i < n; ++i) {
            const ZipMleFit fit = fit_zip_mle(counts.y.row(i).transpose(), X.X);
            out.F.row(i).head(p1) = fit.beta.transpose();
            out.F(i, p1) = fit.rho;
            out.degenerate[i] = fit.degenerate;
        }
        return out;
    }

    if (basis == nullptr)
        throw param_error("nmf_weights features need the basis matrix");
    const Mat BT = basis->transpose(); // J x K
    if (BT.rows() != counts.J())
        throw param_error("basis block count does not match counts");
    out.F = Mat::Zero(n, BT.cols());
    for (int i = 0; i < n; ++i)
        out.F.row(i) = nnls(BT, counts.y.row(i).cast<double>().transpose()).transpose();
    return out;
}

} // namespace shotclust
