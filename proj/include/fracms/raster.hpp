#pragma once

// Plain-text cell rasters: a first line "nx ny", then nx*ny values in
// row-major order with x varying fastest. Values are written in the
// shortest form that reads back to the same double.

#include <iosfwd>
#include <string>
#include <vector>

namespace fracms {

struct Raster {
    int nx = 0;
    int ny = 0;
    std::vector<double> values;  // size nx * ny

    double at(int ix, int iy) const { return values[static_cast<std::size_t>(ix + iy * nx)]; }
};

/// Throws ParseError (with a 1-based line number) on malformed input.
Raster read_raster(std::istream& in);
Raster read_raster_file(const std::string& path);

void write_raster(std::ostream& out, const Raster& r);
void write_raster_file(const std::string& path, const Raster& r);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace fracms
