#pragma once

#include "shotclust/basis.hpp"
#include "shotclust/court.hpp"
#include "shotclust/sampler.hpp"

#include <string>
#include <vector>

namespace shotclust {

/// Shortest round-trip decimal rendering of a double.
std::string fmt_double(double v);

/// Shot CSV: header `player_id,x,y[,made]`, UTF-8, `.` decimals. Rows failing
/// the domain check throw with the offending line number unless `reflect`
/// maps them back onto the half court first.
std::vector<ShotRecord> read_shots_csv(const std::string& path, const CourtGrid& grid,
                                       bool reflect = false);

/// Counts as CSV (`player_id,b1..bJ`) or the compact binary cache, chosen by
/// a `.bin` extension.
void write_counts(const std::string& path, const CountMatrix& counts);
CountMatrix read_counts(const std::string& path);

/// Design matrix CSV, header `intercept,b1..bK`.
void write_design_csv(const std::string& path, const DesignMatrix& X);
DesignMatrix read_design_csv(const std::string& path);

/// Generic numeric matrix CSV with a caller-supplied header.
void write_matrix_csv(const std::string& path, const Mat& m,
                      const std::vector<std::string>& header);
Mat read_matrix_csv(const std::string& path);

/// Partition CSV `player_id,cluster` with 1-based cluster labels.
void write_partition_csv(const std::string& path, const std::vector<std::string>& player_ids,
                         const std::vector<int>& labels);
std::vector<int> read_partition_csv(const std::string& path,
                                    std::vector<std::string>* player_ids = nullptr);

/// Retained draws as newline-delimited JSON, one record per draw.
void write_trace_ndjson(const std::string& path, const MCMCTrace& trace);
MCMCTrace read_trace_ndjson(const std::string& path);

} // namespace shotclust
