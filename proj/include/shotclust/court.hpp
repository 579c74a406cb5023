#pragma once

#include "shotclust/common.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace shotclust {

/// One field goal attempt on the offensive half court D = [0,47] x [0,50].
struct ShotRecord {
    std::string player_id;
    double x = 0.0; // feet along the baseline-to-midcourt axis, [0, 47]
    double y = 0.0; // feet along the sideline axis, [0, 50]
    std::optional<bool> made; // kept for provenance, not modeled
};

/// Fixed partition of the half court into 1 ft x 2 ft blocks.
///
/// Block (row, col) covers [col, col+1) x [2*row, 2*row+2), half-open except
/// that the last block in each axis includes its upper edge, so every point
/// of D maps to exactly one block. Flat index j = row * nx + col, j in
/// [0, J). Centroid of block j is ((col + 0.5) * 1, (row + 0.5) * 2).
struct CourtGrid {
    double block_len_x = 1.0;
    double block_len_y = 2.0;
    int nx = 47;
    int ny = 25;

    int blocks() const { return nx * ny; }
    double width() const { return nx * block_len_x; }
    double height() const { return ny * block_len_y; }

    int col_of(double x) const
    {
        int c = static_cast<int>(x / block_len_x);
        return c >= nx ? nx - 1 : c;
    }
    int row_of(double y) const
    {
        int r = static_cast<int>(y / block_len_y);
        return r >= ny ? ny - 1 : r;
    }
    int block_of(double x, double y) const { return row_of(y) * nx + col_of(x); }

    double centroid_x(int j) const { return (j % nx + 0.5) * block_len_x; }
    double centroid_y(int j) const { return (j / nx + 0.5) * block_len_y; }

    bool contains(double x, double y) const
    {
        return x >= 0.0 && x <= width() && y >= 0.0 && y <= height();
    }
};

/// Per-player block counts y_ij (n players x J blocks).
struct CountMatrix {
    IMat y; // n x J
    std::vector<std::string> player_ids;

    int n() const { return static_cast<int>(y.rows()); }
    int J() const { return static_cast<int>(y.cols()); }
};

/// Bin shot records into per-player block counts. Player order is determined
/// by `player_ids`; every record's player must appear there.
/// Throws param_error naming the record index for out-of-domain coordinates
/// or unknown players.
CountMatrix bin_shots(const std::vector<ShotRecord>& records,
                      const CourtGrid& grid,
                      const std::vector<std::string>& player_ids);

/// Convenience overload: players taken in order of first appearance.
CountMatrix bin_shots(const std::vector<ShotRecord>& records, const CourtGrid& grid);

/// Reflect full-court coordinates (x in (half, 2*half]) onto the offensive
/// half court by rotating 180 degrees about the court center.
ShotRecord reflect_to_half_court(const ShotRecord& rec, const CourtGrid& grid);

/// Blocks-per-shot-count summary for one player: keys 0..5 and 6 meaning
/// "6 or more". Values sum to J.
std::map<int, int> count_histogram(const CountMatrix& counts, int player);

} // namespace shotclust
