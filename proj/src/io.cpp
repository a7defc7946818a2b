#include "mvldp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mvldp/errors.hpp"

#ifndef MVLDP_VERSION
#define MVLDP_VERSION "unknown"
#endif

namespace mvldp {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

double parse_double(std::string_view text, const std::string& where) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    if (text == "inf" || text == "+inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
    double v = 0.0;
    const char* first = text.data();
    if (!text.empty() && text.front() == '+') ++first;
    const auto res = std::from_chars(first, text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ValidationError(where + ": expected a real number, got '" + std::string(text) + "'");
    return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

namespace {

void write_header(std::ostream& os, std::size_t dim) {
    for (std::size_t i = 0; i < dim; ++i) os << ",coord_" << i;
    os << '\n';
}

void write_rows(std::ostream& os, const Path& path, const std::string& prefix) {
    for (std::size_t k = 0; k < path.time_grid.size(); ++k) {
        os << prefix << format_double(path.time_grid[k]);
        const auto x = path.state(k);
        for (Eigen::Index i = 0; i < x.size(); ++i) os << ',' << format_double(x[i]);
        os << '\n';
    }
}

}  // namespace

void write_path_csv(std::ostream& os, const Path& path) {
    os << 't';
    write_header(os, path.dim());
    write_rows(os, path, "");
}

void write_paths_csv(std::ostream& os, const std::vector<Path>& paths) {
    os << "replica,t";
    write_header(os, paths.empty() ? 0 : paths.front().dim());
    for (std::size_t r = 0; r < paths.size(); ++r) write_rows(os, paths[r], std::to_string(r) + ",");
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot open " + file.string() + " for writing");
    out << text;
    if (!out) throw RuntimeFailure("write failed: " + file.string());
}

std::string_view version_string() { return MVLDP_VERSION; }

}  // namespace mvldp
