#include "shotclust/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace shotclust {

namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& path, std::size_t lineno)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw io_error(path + ":" + std::to_string(lineno) + ": bad numeric field '" + s + "'");
    return v;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path, std::ios_base::openmode mode = std::ios_base::out)
{
    std::ofstream out(path, mode);
    if (!out)
        throw io_error("cannot open '" + path + "' for writing");
    return out;
}

bool has_suffix(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

std::string fmt_double(double v)
{
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<ShotRecord> read_shots_csv(const std::string& path, const CourtGrid& grid,
                                       bool reflect)
{
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw io_error(path + ": empty file, expected a header");
    const auto header = split_line(line);
    if (header.size() < 3 || header[0] != "player_id" || header[1] != "x" || header[2] != "y")
        throw io_error(path + ": expected header 'player_id,x,y[,made]'");
    const bool has_made = header.size() > 3 && header[3] == "made";

    std::vector<ShotRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto fields = split_line(line);
        if (fields.size() < 3)
            throw io_error(path + ":" + std::to_string(lineno) + ": expected at least 3 fields");
        ShotRecord rec;
        rec.player_id = fields[0];
        rec.x = parse_double(fields[1], path, lineno);
        rec.y = parse_double(fields[2], path, lineno);
        if (has_made && fields.size() > 3 && !fields[3].empty())
            rec.made = fields[3] == "1" || fields[3] == "true";
        if (reflect)
            rec = reflect_to_half_court(rec, grid);
        if (!grid.contains(rec.x, rec.y))
            throw io_error(path + ":" + std::to_string(lineno) +
                           ": shot outside the court domain (record " +
                           std::to_string(records.size()) + ")");
        records.push_back(std::move(rec));
    }
    return records;
}

namespace {

constexpr char kCountsMagic[4] = {'S', 'C', 'N', 'T'};

void write_counts_bin(const std::string& path, const CountMatrix& counts)
{
    std::ofstream out = open_out(path, std::ios_base::binary);
    out.write(kCountsMagic, 4);
    const std::uint32_t version = 1;
    const std::uint32_t n = counts.n();
    const std::uint32_t J = counts.J();
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&J), 4);
    for (const std::string& id : counts.player_ids) {
        const std::uint32_t len = static_cast<std::uint32_t>(id.size());
        out.write(reinterpret_cast<const char*>(&len), 4);
        out.write(id.data(), len);
    }
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < J; ++j) {
            const std::int32_t v = counts.y(i, j);
            out.write(reinterpret_cast<const char*>(&v), 4);
        }
}

CountMatrix read_counts_bin(const std::string& path)
{
    std::ifstream in(path, std::ios_base::binary);
    if (!in)
        throw io_error("cannot open '" + path + "' for reading");
    char magic[4];
    std::uint32_t version = 0, n = 0, J = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&J), 4);
    if (!in || std::memcmp(magic, kCountsMagic, 4) != 0 || version != 1)
        throw io_error(path + ": not a counts cache file");
    CountMatrix counts;
    counts.player_ids.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::uint32_t len = 0;
        in.read(reinterpret_cast<char*>(&len), 4);
        counts.player_ids[i].resize(len);
        in.read(counts.player_ids[i].data(), len);
    }
    counts.y.resize(n, J);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < J; ++j) {
            std::int32_t v = 0;
            in.read(reinterpret_cast<char*>(&v), 4);
            counts.y(i, j) = v;
        }
    if (!in)
        throw io_error(path + ": truncated counts cache");
    return counts;
}

} // namespace

void write_counts(const std::string& path, const CountMatrix& counts)
{
    if (has_suffix(path, ".bin")) {
        write_counts_bin(path, counts);
        return;
    }
    std::ofstream out = open_out(path);
    out << "player_id";
    for (int j = 1; j <= counts.J(); ++j)
        out << ",b" << j;
    out << '\n';
    for (int i = 0; i < counts.n(); ++i) {
        out << counts.player_ids[i];
        for (int j = 0; j < counts.J(); ++j)
            out << ',' << counts.y(i, j);
        out << '\n';
    }
}

CountMatrix read_counts(const std::string& path)
{
    if (has_suffix(path, ".bin"))
        return read_counts_bin(path);

    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw io_error(path + ": empty counts file");
    const auto header = split_line(line);
    if (header.size() < 2 || header[0] != "player_id")
        throw io_error(path + ": expected 'player_id,b1,...' header");
    const int J = static_cast<int>(header.size()) - 1;

    std::vector<std::string> ids;
    std::vector<std::vector<int>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto fields = split_line(line);
        if (static_cast<int>(fields.size()) != J + 1)
            throw io_error(path + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(J + 1) + " fields");
        ids.push_back(fields[0]);
        std::vector<int> row(J);
        for (int j = 0; j < J; ++j)
            row[j] = static_cast<int>(parse_double(fields[j + 1], path, lineno));
        rows.push_back(std::move(row));
    }
    CountMatrix counts;
    counts.player_ids = std::move(ids);
    counts.y.resize(static_cast<Index>(rows.size()), J);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < J; ++j)
            counts.y(static_cast<Index>(i), j) = rows[i][j];
    return counts;
}

void write_matrix_csv(const std::string& path, const Mat& m,
                      const std::vector<std::string>& header)
{
    std::ofstream out = open_out(path);
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << header[c];
    out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j)
            out << (j ? "," : "") << fmt_double(m(i, j));
        out << '\n';
    }
}

Mat read_matrix_csv(const std::string& path)
{
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw io_error(path + ": empty matrix file");
    const int cols = static_cast<int>(split_line(line).size());

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto fields = split_line(line);
        if (static_cast<int>(fields.size()) != cols)
            throw io_error(path + ":" + std::to_string(lineno) + ": ragged row");
        std::vector<double> row(cols);
        for (int j = 0; j < cols; ++j)
            row[j] = parse_double(fields[j], path, lineno);
        rows.push_back(std::move(row));
    }
    Mat m(static_cast<Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < cols; ++j)
            m(static_cast<Index>(i), j) = rows[i][j];
    return m;
}

void write_design_csv(const std::string& path, const DesignMatrix& X)
{
    std::vector<std::string> header{"intercept"};
    for (int k = 1; k <= X.p(); ++k)
        header.push_back("b" + std::to_string(k));
    write_matrix_csv(path, X.X, header);
}

DesignMatrix read_design_csv(const std::string& path)
{
    DesignMatrix X;
    X.X = read_matrix_csv(path);
    if (X.X.cols() < 1 || (X.X.col(0).array() != 1.0).any())
        throw io_error(path + ": first design column must be the intercept (all ones)");
    return X;
}

void write_partition_csv(const std::string& path, const std::vector<std::string>& player_ids,
                         const std::vector<int>& labels)
{
    if (player_ids.size() != labels.size())
        throw param_error("player id / label length mismatch");
    std::ofstream out = open_out(path);
    out << "player_id,cluster\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
        out << player_ids[i] << ',' << labels[i] + 1 << '\n';
}

std::vector<int> read_partition_csv(const std::string& path, std::vector<std::string>* player_ids)
{
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw io_error(path + ": empty partition file");
    std::vector<int> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        const auto fields = split_line(line);
        if (fields.size() != 2)
            throw io_error(path + ":" + std::to_string(lineno) + ": expected 'player_id,cluster'");
        if (player_ids)
            player_ids->push_back(fields[0]);
        labels.push_back(static_cast<int>(parse_double(fields[1], path, lineno)) - 1);
    }
    return labels;
}

void write_trace_ndjson(const std::string& path, const MCMCTrace& trace)
{
    std::ofstream out = open_out(path);
    for (const TraceDraw& draw : trace.draws) {
        json rec;
        rec["iter"] = draw.iter;
        rec["k"] = draw.k();
        rec["psi"] = draw.psi;
        rec["log_post"] = draw.log_post;
        json z = json::array();
        for (int zi : draw.z)
            z.push_back(zi + 1);
        rec["z"] = std::move(z);
        json betas = json::array();
        json rhos = json::array();
        for (const ClusterParams& th : draw.theta) {
            json b = json::array();
            for (Index c = 0; c < th.beta.size(); ++c)
                b.push_back(th.beta[c]);
            betas.push_back(std::move(b));
            rhos.push_back(th.rho);
        }
        rec["beta"] = std::move(betas);
        rec["rho"] = std::move(rhos);
        out << rec.dump() << '\n';
    }
}

MCMCTrace read_trace_ndjson(const std::string& path)
{
    std::ifstream in = open_in(path);
    MCMCTrace trace;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw io_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        TraceDraw draw;
        draw.iter = rec.at("iter").get<int>();
        draw.psi = rec.at("psi").get<double>();
        draw.log_post = rec.at("log_post").get<double>();
        for (const auto& zi : rec.at("z"))
            draw.z.push_back(zi.get<int>() - 1);
        const auto& betas = rec.at("beta");
        const auto& rhos = rec.at("rho");
        for (std::size_t h = 0; h < betas.size(); ++h) {
            ClusterParams th;
            th.beta = Vec(betas[h].size());
            for (std::size_t c = 0; c < betas[h].size(); ++c)
                th.beta[static_cast<Index>(c)] = betas[h][c].get<double>();
            th.rho = rhos[h].get<double>();
            draw.theta.push_back(std::move(th));
        }
        trace.draws.push_back(std::move(draw));
    }
    if (trace.draws.empty())
        throw io_error(path + ": trace has no draws");
    trace.n = static_cast<int>(trace.draws[0].z.size());
    trace.p = static_cast<int>(trace.draws[0].theta[0].beta.size()) - 1;
    return trace;
}

} // namespace shotclust
