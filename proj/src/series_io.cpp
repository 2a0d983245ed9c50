#include "cbias/series_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cbias::io {

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    if (v == 0.0) return "0";  // no "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

namespace {
std::string field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}
}  // namespace

void write_csv(std::ostream& out, const sums::CheckpointSeries& series) {
    out << field(series.x_label);
    for (const auto& c : series.columns) out << ',' << field(c.name);
    out << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << series.grid.points[i];
        for (const auto& c : series.columns) out << ',' << format_number(c.values[i]);
        out << '\n';
    }
}

std::string to_csv(const sums::CheckpointSeries& series) {
    std::ostringstream os;
    write_csv(os, series);
    return os.str();
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return fnv1a64(os.str());
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t write_file(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
    return fnv1a64(bytes);
}

}  // namespace cbias::io
