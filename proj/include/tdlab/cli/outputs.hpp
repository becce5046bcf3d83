#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tdlab/cli/scenario.hpp"
#include "tdlab/imaging/imaging.hpp"

namespace tdlab {

// Stamp written as the first comment line of every output file, so any file
// can be traced to the exact scenario text and seed that produced it.
struct OutputStamp {
    std::string scenario_hash;
    std::uint64_t seed = 0;

    std::string header_line() const;  // "# scenario=<hash> seed=<seed>"
};

// Formats a double with 17 significant digits, '.' decimal separator.
std::string format_g17(double v);

// map.csv: header comment, then "x,y,z,value" rows in grid order
// (x fastest), '\n' line endings.  Throws IoError on write failure.
void write_map_csv(const std::string& path, const ImagingMap& map, const OutputStamp& stamp);

// 8-bit P2 greyscale of the grid slice orthogonal to `slice_axis` (whose
// dimension must be 1), linearly scaled between the map minimum and maximum.
// A sidecar file `path + ".minmax"` records the min/max used.  A constant map
// renders as all zeros.
void write_heatmap_pgm(const std::string& path, const ImagingMap& map, int slice_axis,
                       const OutputStamp& stamp);

// Generic stamped text report: header comment then the given lines.
void write_text_report(const std::string& path, const std::vector<std::string>& lines,
                       const OutputStamp& stamp);

}  // namespace tdlab
