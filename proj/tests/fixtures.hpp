#pragma once

// Small multiscale problems shared by several test files.

#include "fracms/assembly.hpp"
#include "fracms/fields.hpp"
#include "fracms/grid.hpp"
#include "fracms/spaces.hpp"

namespace fixture {

struct Problem {
    fracms::GridHierarchy grid;
    fracms::PermeabilityField kappa;
    fracms::FineOperators ops;
    fracms::MultiscaleSpaces spaces;
};

/// Channel field (bundled geometry `preset`) on a coarse_n x coarse_n grid.
inline Problem channels(int coarse_n, int refine, double contrast, fracms::SpaceParams params, int preset = 1) {
    fracms::GridHierarchy grid = fracms::build_grids(coarse_n, refine);
    fracms::FieldSpec spec;
    spec.kind = fracms::FieldKind::channels;
    spec.contrast = contrast;
    spec.preset = preset;
    fracms::PermeabilityField kappa = fracms::gen_field(spec, grid.fine_n());
    fracms::FineOperators ops = fracms::assemble_fine(grid, kappa);
    fracms::MultiscaleSpaces spaces = fracms::build_spaces(grid, kappa, ops, params);
    return {std::move(grid), std::move(kappa), std::move(ops), std::move(spaces)};
}

}  // namespace fixture
