#pragma once

#include "shotclust/basis.hpp"
#include "shotclust/court.hpp"
#include "shotclust/rng.hpp"

#include <cstdint>
#include <vector>

namespace shotclust {

enum class DesignType { balanced, imbalanced };
enum class SimScale { paper, desk };

/// Ground truth for one synthetic study: group sizes, per-group regression
/// coefficients and extra-zero probabilities, and the covariates.
struct SimDesign {
    std::vector<int> group_sizes;
    std::vector<Vec> true_betas;
    std::vector<double> true_rhos;
    DesignMatrix design;
    std::uint64_t seed = 1;

    int n() const
    {
        int total = 0;
        for (int g : group_sizes)
            total += g;
        return total;
    }
    int k0() const { return static_cast<int>(group_sizes.size()); }
};

/// A design matrix with standard-normal columns standardized to mean 0 /
/// sample sd 1 (plus the intercept), for self-contained simulations.
DesignMatrix synthetic_design(int J, int K, std::uint64_t seed);

/// Uniformly subsample `J_sub` rows (blocks) of a design matrix,
/// re-standardizing the non-intercept columns.
DesignMatrix subsample_design(const DesignMatrix& X, int J_sub, std::uint64_t seed);

/// The two simulation studies: three groups with
///   beta_1 = (-1, 1.2, 0.95, 1.1, 1, 0.8),  rho_1 = 0.1
///   beta_2 = (-0.4, 0.6, 0.7, 0.5, 0.8, 0.3), rho_2 = 0.3
///   beta_3 = (-0.9, 0.2, 0.1, 0.3, 0.2, 0.4), rho_3 = 0.4
/// Sizes are (25, 25, 25) balanced / (10, 35, 30) imbalanced at paper scale
/// and (10, 10, 10) / (4, 14, 12) at desk scale.
SimDesign paper_design(DesignType type, const DesignMatrix& X, std::uint64_t seed = 1);
SimDesign desk_design(DesignType type, const DesignMatrix& X, std::uint64_t seed = 1);

/// Draw y_ij ~ ZIP(exp(x_j . beta_g(i)), rho_g(i)) and return the counts with
/// the ground-truth group labels (0-based).
std::pair<CountMatrix, std::vector<int>> generate(const SimDesign& design, Rng& rng);

} // namespace shotclust
