#include "shotclust/court.hpp"

#include <sstream>
#include <unordered_map>

namespace shotclust {

CountMatrix bin_shots(const std::vector<ShotRecord>& records,
                      const CourtGrid& grid,
                      const std::vector<std::string>& player_ids)
{
    std::unordered_map<std::string, int> row_of;
    row_of.reserve(player_ids.size());
    for (std::size_t i = 0; i < player_ids.size(); ++i) {
        if (!row_of.emplace(player_ids[i], static_cast<int>(i)).second)
            throw param_error("duplicate player id '" + player_ids[i] + "'");
    }

    CountMatrix out;
    out.player_ids = player_ids;
    out.y = IMat::Zero(static_cast<Index>(player_ids.size()), grid.blocks());

    for (std::size_t r = 0; r < records.size(); ++r) {
        const ShotRecord& rec = records[r];
        if (!grid.contains(rec.x, rec.y)) {
            std::ostringstream msg;
            msg << "record " << r << " for player '" << rec.player_id
                << "' is outside the court domain: (" << rec.x << ", " << rec.y << ")";
            throw param_error(msg.str());
        }
        auto it = row_of.find(rec.player_id);
        if (it == row_of.end())
            throw param_error("record " + std::to_string(r) + " references unknown player '" +
                              rec.player_id + "'");
        out.y(it->second, grid.block_of(rec.x, rec.y)) += 1;
    }
    return out;
}

CountMatrix bin_shots(const std::vector<ShotRecord>& records, const CourtGrid& grid)
{
    std::vector<std::string> ids;
    std::unordered_map<std::string, int> seen;
    for (const ShotRecord& rec : records) {
        if (seen.emplace(rec.player_id, 1).second)
            ids.push_back(rec.player_id);
    }
    return bin_shots(records, grid, ids);
}

ShotRecord reflect_to_half_court(const ShotRecord& rec, const CourtGrid& grid)
{
    ShotRecord out = rec;
    const double half = grid.width();
    if (rec.x > half && rec.x <= 2.0 * half) {
        out.x = 2.0 * half - rec.x;
        out.y = grid.height() - rec.y;
    }
    return out;
}

std::map<int, int> count_histogram(const CountMatrix& counts, int player)
{
    if (player < 0 || player >= counts.n())
        throw param_error("player index " + std::to_string(player) + " out of range [0, " +
                          std::to_string(counts.n()) + ")");
    std::map<int, int> hist;
    for (int b = 0; b <= 6; ++b)
        hist[b] = 0;
    for (int j = 0; j < counts.J(); ++j) {
        const int c = counts.y(player, j);
        hist[c >= 6 ? 6 : c] += 1;
    }
    return hist;
}

} // namespace shotclust
