#include "magconv/artifacts.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include "magconv/config.hpp"
#include "magconv/error.hpp"

namespace magconv {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void malformed(std::string_view what) { fail(ErrorCode::Io, "malformed map file: " + std::string(what)); }

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos)
            return out;
        pos = next + 1;
    }
}

std::vector<std::string_view> lines_of(std::string_view text)
{
    std::vector<std::string_view> out;
    for (std::string_view l : split(text, '\n')) {
        if (!l.empty() && l.back() == '\r')
            l.remove_suffix(1);
        out.push_back(l);
    }
    if (!out.empty() && out.back().empty())
        out.pop_back();
    return out;
}

std::optional<double> number(std::string_view s)
{
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        return std::nullopt;
    return v;
}

template <class Int>
std::optional<Int> integer(std::string_view s)
{
    Int v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        return std::nullopt;
    return v;
}

std::string cell(double v) { return std::isnan(v) ? std::string(na_token) : format_double(v); }

std::string axis_line(const SweepAxis& a, std::string_view unit)
{
    return a.name + " " + std::string(unit) + " " + format_double(a.start) + " " + format_double(a.stop) + " " +
           std::to_string(a.points) + " " + (a.spacing == AxisSpacing::Log ? "log" : "linear");
}

SweepAxis parse_axis(std::string_view s, std::string_view unit)
{
    const auto f = split(s, ' ');
    if (f.size() != 6 || f[1] != unit)
        malformed("axis line '" + std::string(s) + "'");
    SweepAxis a;
    a.name = std::string(f[0]);
    const auto start = number(f[2]), stop = number(f[3]);
    const auto points = integer<int>(f[4]);
    if (!start || !stop || !points || (f[5] != "linear" && f[5] != "log"))
        malformed("axis line '" + std::string(s) + "'");
    a.start = *start;
    a.stop = *stop;
    a.points = *points;
    a.spacing = f[5] == "log" ? AxisSpacing::Log : AxisSpacing::Linear;
    try {
        validate(a);
    } catch (const Error& e) {
        malformed(e.what());
    }
    return a;
}

// "# key = value" header lines up to the column header.
std::map<std::string, std::string, std::less<>> read_header(const std::vector<std::string_view>& lines,
                                                            std::size_t& pos)
{
    std::map<std::string, std::string, std::less<>> h;
    for (; pos < lines.size() && lines[pos].starts_with("#"); ++pos) {
        std::string_view l = lines[pos].substr(1);
        const std::size_t eq = l.find(" = ");
        if (eq == std::string_view::npos)
            continue;
        std::string_view key = l.substr(0, eq);
        while (!key.empty() && key.front() == ' ')
            key.remove_prefix(1);
        h[std::string(key)] = std::string(l.substr(eq + 3));
    }
    return h;
}

const std::string& header_value(const std::map<std::string, std::string, std::less<>>& h, std::string_view key)
{
    const auto it = h.find(key);
    if (it == h.end())
        malformed("missing header '" + std::string(key) + "'");
    return it->second;
}

void write_file(const fs::path& path, std::string_view contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.close();
    if (!out)
        fail(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

} // namespace

fs::path mask_path(const fs::path& map_file)
{
    fs::path p = map_file;
    p.replace_extension(".mask.csv");
    return p;
}

std::string map_text(const SpectrumMap& map, std::string_view mask_name)
{
    const bool complex_cells = map.kind == MapKind::Reflection;
    std::string out;
    out += "# schema_version = " + std::to_string(config_schema_version) + "\n";
    out += "# kind = " + std::string(to_string(map.kind)) + "\n";
    out += "# x_axis = " + axis_line(map.x_axis, "T") + "\n";
    out += "# y_axis = " + axis_line(map.y_axis, "Hz") + "\n";
    out += "# cells = " + std::to_string(map.values.size()) + "\n";
    out += "# invalid_cells = " + std::to_string(map.invalid_count()) + "\n";
    out += "# mask = " + std::string(mask_name) + "\n";
    out += complex_cells ? "field_t,freq_hz,re,im\n" : "field_t,freq_hz,efficiency\n";
    for (int ix = 0; ix < map.x_axis.points; ++ix) {
        const std::string x = format_double(map.x_axis.value(ix));
        for (int iy = 0; iy < map.y_axis.points; ++iy) {
            const std::size_t i = map.index(ix, iy);
            out += x;
            out += ',';
            out += format_double(map.y_axis.value(iy));
            if (!map.valid[i]) {
                out += complex_cells ? ",NA,NA\n" : ",NA\n";
                continue;
            }
            out += ',';
            out += cell(map.values[i].real());
            if (complex_cells) {
                out += ',';
                out += cell(map.values[i].imag());
            }
            out += '\n';
        }
    }
    return out;
}

std::string mask_text(const SpectrumMap& map, std::string_view map_name)
{
    std::string out;
    out += "# schema_version = " + std::to_string(config_schema_version) + "\n";
    out += "# map = " + std::string(map_name) + "\n";
    out += "# invalid_cells = " + std::to_string(map.invalid_count()) + "\n";
    out += "ix,iy\n";
    for (int ix = 0; ix < map.x_axis.points; ++ix)
        for (int iy = 0; iy < map.y_axis.points; ++iy)
            if (!map.valid[map.index(ix, iy)])
                out += std::to_string(ix) + "," + std::to_string(iy) + "\n";
    return out;
}

void serialize_map(const SpectrumMap& map, const fs::path& path)
{
    ArtifactSet set(path.has_parent_path() ? path.parent_path() : fs::path("."));
    const std::string name = path.filename().string();
    const std::string mask_name = mask_path(path).filename().string();
    if (map.invalid_count() > 0) {
        set.add(name, map_text(map, mask_name));
        set.add(mask_name, mask_text(map, name));
    } else {
        set.add(name, map_text(map));
        set.remove_stale(mask_name);
    }
    set.commit();
}

SpectrumMap parse_map_text(std::string_view text, std::optional<std::string_view> mask)
{
    const auto lines = lines_of(text);
    std::size_t pos = 0;
    const auto h = read_header(lines, pos);
    if (header_value(h, "schema_version") != std::to_string(config_schema_version))
        malformed("unsupported schema_version");
    SpectrumMap map;
    const auto kind = parse_map_kind(header_value(h, "kind"));
    if (!kind)
        malformed("unknown kind");
    map.kind = *kind;
    map.x_axis = parse_axis(header_value(h, "x_axis"), "T");
    map.y_axis = parse_axis(header_value(h, "y_axis"), "Hz");
    const std::size_t cells = static_cast<std::size_t>(map.x_axis.points) * static_cast<std::size_t>(map.y_axis.points);
    const auto declared_cells = integer<std::size_t>(header_value(h, "cells"));
    const auto declared_invalid = integer<std::size_t>(header_value(h, "invalid_cells"));
    if (!declared_cells || *declared_cells != cells || !declared_invalid)
        malformed("cell counts");

    const bool complex_cells = map.kind == MapKind::Reflection;
    const std::string_view columns = complex_cells ? "field_t,freq_hz,re,im" : "field_t,freq_hz,efficiency";
    if (pos >= lines.size() || lines[pos] != columns)
        malformed("column header");
    ++pos;
    if (lines.size() - pos != cells)
        malformed("expected " + std::to_string(cells) + " data rows");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    map.values.assign(cells, cplx(nan, nan));
    map.valid.assign(cells, 1);
    std::set<std::size_t> na_cells;
    for (int ix = 0; ix < map.x_axis.points; ++ix) {
        const double x = map.x_axis.value(ix);
        for (int iy = 0; iy < map.y_axis.points; ++iy) {
            const std::size_t i = map.index(ix, iy);
            const std::string_view row = lines[pos + i];
            const auto f = split(row, ',');
            if (f.size() != (complex_cells ? 4u : 3u))
                malformed("row " + std::to_string(i));
            const auto fx = number(f[0]), fy = number(f[1]);
            if (!fx || !fy || *fx != x || *fy != map.y_axis.value(iy))
                malformed("coordinates of row " + std::to_string(i));
            if (f[2] == na_token) {
                na_cells.insert(i);
                map.valid[i] = 0;
                continue;
            }
            const auto re = number(f[2]);
            const auto im = complex_cells ? number(f[3]) : std::optional(0.0);
            if (!re || !im)
                malformed("value in row " + std::to_string(i));
            map.values[i] = cplx(*re, *im);
        }
    }
    if (na_cells.size() != *declared_invalid)
        malformed("invalid_cells does not match the NA rows");

    std::set<std::size_t> masked;
    if (mask) {
        const auto mlines = lines_of(*mask);
        std::size_t mpos = 0;
        read_header(mlines, mpos);
        if (mpos >= mlines.size() || mlines[mpos] != "ix,iy")
            malformed("mask column header");
        for (++mpos; mpos < mlines.size(); ++mpos) {
            const auto f = split(mlines[mpos], ',');
            const auto ix = f.size() == 2 ? integer<int>(f[0]) : std::nullopt;
            const auto iy = f.size() == 2 ? integer<int>(f[1]) : std::nullopt;
            if (!ix || !iy || *ix < 0 || *iy < 0 || *ix >= map.x_axis.points || *iy >= map.y_axis.points)
                malformed("mask row '" + std::string(mlines[mpos]) + "'");
            masked.insert(map.index(*ix, *iy));
        }
    }
    if (masked != na_cells)
        malformed("validity mask disagrees with the NA cells");
    return map;
}

SpectrumMap parse_map(const fs::path& path)
{
    const std::string text = read_text(path);
    const auto lines = lines_of(text);
    std::size_t pos = 0;
    const auto h = read_header(lines, pos);
    const auto it = h.find("mask");
    if (it == h.end() || it->second == "none")
        return parse_map_text(text);
    const fs::path sidecar = (path.has_parent_path() ? path.parent_path() : fs::path(".")) / it->second;
    return parse_map_text(text, read_text(sidecar));
}

std::vector<std::pair<double, double>> read_xy_csv(const fs::path& path)
{
    const std::string text = read_text(path);
    std::vector<std::pair<double, double>> out;
    bool header_seen = false;
    int line_no = 0;
    for (std::string_view l : lines_of(text)) {
        ++line_no;
        if (l.empty() || l.starts_with("#"))
            continue;
        const auto f = split(l, ',');
        const auto x = f.size() >= 2 ? number(f[0]) : std::nullopt;
        const auto y = f.size() >= 2 ? number(f[1]) : std::nullopt;
        if (f.size() != 2 || !x || !y) {
            if (!header_seen && out.empty()) {
                header_seen = true;
                continue;
            }
            fail(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": expected two numeric columns");
        }
        out.emplace_back(*x, *y);
    }
    return out;
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void ArtifactSet::add(std::string name, std::string contents) { files_.emplace_back(std::move(name), std::move(contents)); }

void ArtifactSet::remove_stale(std::string name) { stale_.push_back(std::move(name)); }

std::vector<fs::path> ArtifactSet::commit()
{
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec)
        fail(ErrorCode::Io, "cannot create '" + dir_.string() + "': " + ec.message());

    std::vector<fs::path> temps, published;
    auto cleanup = [&] {
        std::error_code ignore;
        for (const fs::path& p : temps)
            fs::remove(p, ignore);
        for (const fs::path& p : published)
            fs::remove(p, ignore);
    };
    try {
        for (const auto& [name, contents] : files_) {
            temps.push_back(dir_ / ("." + name + ".tmp"));
            write_file(temps.back(), contents);
        }
        for (std::size_t i = 0; i < files_.size(); ++i) {
            const fs::path target = dir_ / files_[i].first;
            fs::rename(temps[i], target, ec);
            if (ec)
                fail(ErrorCode::Io, "cannot publish '" + target.string() + "': " + ec.message());
            published.push_back(target);
        }
    } catch (...) {
        cleanup();
        throw;
    }
    for (const std::string& name : stale_)
        fs::remove(dir_ / name, ec);
    return published;
}

} // namespace magconv
