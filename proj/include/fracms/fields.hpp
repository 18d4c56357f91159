#pragma once

// Permeability and forcing generators for the experiments.

#include <cstdint>
#include <string>
#include <vector>

#include "fracms/assembly.hpp"
#include "fracms/raster.hpp"
#include "fracms/schemes.hpp"

namespace fracms {

/// Axis-aligned rectangle in unit coordinates; a fine cell belongs to it
/// when its center does.
struct Rect {
    double x0, x1, y0, y1;
    bool contains(double x, double y) const noexcept { return x0 <= x && x <= x1 && y0 <= y && y <= y1; }
};

enum class FieldKind { channels, inclusions, file };

struct FieldSpec {
    FieldKind kind = FieldKind::channels;
    double contrast = 1e5;
    int preset = 1;           // channels: bundled geometry 1 or 2 (ignored if rects given)
    std::vector<Rect> rects;  // channels: explicit geometry
    std::uint64_t seed = 1;   // inclusions
    int count = 20;           // inclusions: number of squares
    int size = 0;             // inclusions: side in fine cells, 0 = n / 20
    std::string path;         // file
};

/// Channel geometries used by the bundled experiment fields.
std::vector<Rect> channel_preset(int which);

/// Cells inside any rectangle get 1, others 0.
std::vector<double> rect_mask(int n, const std::vector<Rect>& rects);
/// Seeded random square inclusions (0/1 per cell).
std::vector<double> inclusion_mask(int n, std::uint64_t seed, int count, int size);

/// Background 1 and value `contrast` on the features; `n` fine cells per side.
PermeabilityField gen_field(const FieldSpec& spec, int n);

enum class ForcingKind { smooth, discontinuous, custom };

struct ForcingSpec {
    ForcingKind kind = ForcingKind::smooth;
    // discontinuous: `inside` on the rectangle, `outside` elsewhere.
    Rect region{0.3, 0.7, 0.3, 0.7};
    double inside = 1.0;
    double outside = 0.0;
    // custom: per-cell rasters; level i applies from times[i] on (the first
    // level also before times[0]). One file means time-independent.
    std::vector<std::string> files;
    std::vector<double> times;
};

/// Space-time forcing, either a closed-form function (interpolated at the
/// fine nodes) or per-cell constant rasters (integrated exactly).
class Forcing {
public:
    Forcing() = default;
    static Forcing function(SpaceTimeFunction f, bool time_independent);
    static Forcing cells(std::vector<Raster> levels, std::vector<double> times);

    bool is_function() const noexcept { return static_cast<bool>(fn_); }
    bool time_independent() const noexcept { return time_independent_; }
    double operator()(double x, double y, double t) const;
    /// Per-cell values at time t (raster forcings only).
    const std::vector<double>& cell_values(double t) const;
    FineLoad load(const GridHierarchy& grid) const;

private:
    SpaceTimeFunction fn_;
    std::vector<Raster> levels_;
    std::vector<double> times_;
    bool time_independent_ = true;
};

/// 2 pi^2 sin(pi x) sin(pi y).
double smooth_forcing(double x, double y);

/// Builds the forcing; `n` is the number of fine cells per side (rasters are
/// checked against it).
Forcing gen_forcing(const ForcingSpec& spec, int n);

}  // namespace fracms
