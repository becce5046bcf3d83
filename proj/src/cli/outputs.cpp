#include "tdlab/cli/outputs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tdlab {

std::string OutputStamp::header_line() const {
    return "# scenario=" + scenario_hash + " seed=" + std::to_string(seed);
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: '\n' endings everywhere
    if (!out) throw IoError("cannot open output file: " + path);
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

void write_map_csv(const std::string& path, const ImagingMap& map, const OutputStamp& stamp) {
    std::ofstream out = open_out(path);
    out << stamp.header_line() << '\n';
    out << "x,y,z,value\n";
    for (std::size_t flat = 0; flat < map.values.size(); ++flat) {
        const Vec3 p = map.grid.point(flat);
        out << format_g17(p.x) << ',' << format_g17(p.y) << ',' << format_g17(p.z) << ','
            << format_g17(map.values[flat]) << '\n';
    }
    finish(out, path);
}

void write_heatmap_pgm(const std::string& path, const ImagingMap& map, int slice_axis,
                       const OutputStamp& stamp) {
    if (slice_axis < 0 || slice_axis > 2 || map.grid.dims[slice_axis] != 1)
        throw std::invalid_argument("write_heatmap_pgm: slice_axis must name a unit dimension");
    const int a = slice_axis == 0 ? 1 : 0;           // horizontal axis
    const int b = slice_axis == 2 ? 1 : 2;           // vertical axis
    const std::size_t w = map.grid.dims[a];
    const std::size_t h = map.grid.dims[b];

    const auto [lo_it, hi_it] = std::minmax_element(map.values.begin(), map.values.end());
    const double lo = *lo_it, hi = *hi_it;
    const double span = hi - lo;

    std::ofstream out = open_out(path);
    out << "P2\n" << stamp.header_line() << '\n' << w << ' ' << h << "\n255\n";
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (std::size_t row = 0; row < h; ++row) {
        idx[b] = h - 1 - row;  // top row of the image is the largest coordinate
        for (std::size_t col = 0; col < w; ++col) {
            idx[a] = col;
            const std::size_t flat = idx[0] + map.grid.dims[0] * (idx[1] + map.grid.dims[1] * idx[2]);
            int pixel = 0;
            if (span > 0.0)
                pixel = static_cast<int>(std::lround(255.0 * (map.values[flat] - lo) / span));
            pixel = std::clamp(pixel, 0, 255);
            out << pixel << (col + 1 == w ? '\n' : ' ');
        }
    }
    finish(out, path);

    std::ofstream side = open_out(path + ".minmax");
    side << stamp.header_line() << '\n';
    side << "min=" << format_g17(lo) << '\n';
    side << "max=" << format_g17(hi) << '\n';
    finish(side, path + ".minmax");
}

void write_text_report(const std::string& path, const std::vector<std::string>& lines,
                       const OutputStamp& stamp) {
    std::ofstream out = open_out(path);
    out << stamp.header_line() << '\n';
    for (const std::string& line : lines) out << line << '\n';
    finish(out, path);
}

}  // namespace tdlab
