#include "fracms/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fracms/error.hpp"

namespace fracms {

std::vector<Rect> channel_preset(int which) {
    switch (which) {
        case 1:
            return {{0.05, 0.95, 0.13, 0.17}, {0.10, 0.90, 0.43, 0.47}, {0.05, 0.80, 0.73, 0.77},
                    {0.33, 0.37, 0.20, 0.40}, {0.63, 0.67, 0.50, 0.95}, {0.55, 0.60, 0.20, 0.30},
                    {0.15, 0.20, 0.55, 0.60}, {0.85, 0.90, 0.55, 0.65}};
        case 2:
            return {{0.05, 0.95, 0.23, 0.27}, {0.05, 0.90, 0.63, 0.67}, {0.23, 0.27, 0.30, 0.60},
                    {0.73, 0.77, 0.05, 0.55}, {0.45, 0.50, 0.75, 0.95}, {0.10, 0.15, 0.75, 0.80},
                    {0.55, 0.60, 0.35, 0.45}, {0.85, 0.90, 0.80, 0.90}};
        default:
            throw InvalidArgument("unknown channel preset " + std::to_string(which) + " (expected 1 or 2)");
    }
}

std::vector<double> rect_mask(int n, const std::vector<Rect>& rects) {
    if (n <= 0) throw InvalidArgument("field size must be positive");
    std::vector<double> mask(static_cast<std::size_t>(n) * n, 0.0);
    for (int cy = 0; cy < n; ++cy)
        for (int cx = 0; cx < n; ++cx) {
            const double x = (cx + 0.5) / n, y = (cy + 0.5) / n;
            for (const Rect& r : rects)
                if (r.contains(x, y)) {
                    mask[cx + static_cast<std::size_t>(cy) * n] = 1.0;
                    break;
                }
        }
    return mask;
}

std::vector<double> inclusion_mask(int n, std::uint64_t seed, int count, int size) {
    if (n <= 0) throw InvalidArgument("field size must be positive");
    if (count < 0) throw InvalidArgument("inclusion count must be >= 0");
    if (size <= 0) size = std::max(1, n / 20);
    if (size > n) throw InvalidArgument("inclusion size exceeds the field");
    std::mt19937_64 rng(seed);
    std::vector<double> mask(static_cast<std::size_t>(n) * n, 0.0);
    for (int k = 0; k < count; ++k) {
        const int x0 = static_cast<int>(rng() % static_cast<std::uint64_t>(n - size + 1));
        const int y0 = static_cast<int>(rng() % static_cast<std::uint64_t>(n - size + 1));
        for (int y = y0; y < y0 + size; ++y)
            for (int x = x0; x < x0 + size; ++x) mask[x + static_cast<std::size_t>(y) * n] = 1.0;
    }
    return mask;
}

PermeabilityField gen_field(const FieldSpec& spec, int n) {
    if (spec.kind == FieldKind::file) {
        PermeabilityField f = PermeabilityField::from_raster(read_raster_file(spec.path));
        if (f.n() != n)
            throw InvalidArgument("field file '" + spec.path + "' has " + std::to_string(f.n()) + " cells per side, grid needs " +
                                  std::to_string(n));
        return f;
    }
    if (!(spec.contrast > 0.0)) throw InvalidArgument("contrast must be positive");
    const std::vector<double> mask = spec.kind == FieldKind::channels
                                         ? rect_mask(n, spec.rects.empty() ? channel_preset(spec.preset) : spec.rects)
                                         : inclusion_mask(n, spec.seed, spec.count, spec.size);
    std::vector<double> v(mask.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = mask[i] != 0.0 ? spec.contrast : 1.0;
    return PermeabilityField(n, std::move(v));
}

// --- Forcing ----------------------------------------------------------------

double smooth_forcing(double x, double y) {
    constexpr double pi = std::numbers::pi;
    return 2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
}

Forcing Forcing::function(SpaceTimeFunction f, bool time_independent) {
    Forcing out;
    out.fn_ = std::move(f);
    out.time_independent_ = time_independent;
    return out;
}

Forcing Forcing::cells(std::vector<Raster> levels, std::vector<double> times) {
    if (levels.empty()) throw InvalidArgument("forcing needs at least one raster");
    if (levels.size() > 1 && times.size() != levels.size())
        throw InvalidArgument("forcing: one start time per raster level required");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw InvalidArgument("forcing: level times must increase");
    for (const Raster& r : levels)
        if (r.nx != levels.front().nx || r.ny != levels.front().ny)
            throw InvalidArgument("forcing: raster levels differ in size");
    Forcing out;
    out.levels_ = std::move(levels);
    out.times_ = std::move(times);
    out.time_independent_ = out.levels_.size() == 1;
    return out;
}

const std::vector<double>& Forcing::cell_values(double t) const {
    if (levels_.empty()) throw InvalidArgument("forcing has no raster levels");
    std::size_t level = 0;
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (t >= times_[i]) level = i;
    return levels_[level].values;
}

double Forcing::operator()(double x, double y, double t) const {
    if (fn_) return fn_(x, y, t);
    const Raster& r = levels_.front();
    const int cx = std::clamp(static_cast<int>(x * r.nx), 0, r.nx - 1);
    const int cy = std::clamp(static_cast<int>(y * r.ny), 0, r.ny - 1);
    return cell_values(t)[cx + static_cast<std::size_t>(cy) * r.nx];
}

FineLoad Forcing::load(const GridHierarchy& grid) const {
    if (!fn_) {
        const Raster& r = levels_.front();
        if (r.nx != grid.fine_n() || r.ny != grid.fine_n())
            throw InvalidArgument("forcing raster is " + std::to_string(r.nx) + "x" + std::to_string(r.ny) +
                                  ", fine grid has " + std::to_string(grid.fine_n()) + " cells per side");
    }
    const Forcing self = *this;
    const GridHierarchy g = grid;
    return FineLoad{[self, g](double t) {
                        return self.fn_ ? load_vector(g, self.fn_, t) : load_vector_cells(g, self.cell_values(t));
                    },
                    time_independent_};
}

Forcing gen_forcing(const ForcingSpec& spec, int n) {
    switch (spec.kind) {
        case ForcingKind::smooth:
            return Forcing::function([](double x, double y, double) { return smooth_forcing(x, y); }, true);
        case ForcingKind::discontinuous: {
            const std::vector<double> mask = rect_mask(n, {spec.region});
            Raster r{n, n, std::vector<double>(mask.size())};
            for (std::size_t i = 0; i < mask.size(); ++i) r.values[i] = mask[i] != 0.0 ? spec.inside : spec.outside;
            return Forcing::cells({std::move(r)}, {});
        }
        case ForcingKind::custom: {
            std::vector<Raster> levels;
            for (const std::string& f : spec.files) {
                levels.push_back(read_raster_file(f));
                if (levels.back().nx != n || levels.back().ny != n)
                    throw InvalidArgument("forcing raster '" + f + "' does not match the fine grid (" + std::to_string(n) +
                                          " cells per side)");
            }
            return Forcing::cells(std::move(levels), spec.times);
        }
    }
    throw InvalidArgument("unknown forcing kind");
}

}  // namespace fracms
