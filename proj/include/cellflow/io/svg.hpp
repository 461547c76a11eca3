#pragma once

#include "cellflow/numerics/types.hpp"

#include <string>
#include <vector>

namespace cellflow::io {

struct PlotOptions {
    int width = 640;
    int height = 480;
    double point_radius = 2.5;
    std::string title;
};

/// Scatter of the first two latent columns colored by timepoint, with one
/// polyline per path on top. Numbers are printed with fixed precision, so
/// equal inputs give equal bytes.
std::string render_svg(const Matrix& points, const std::vector<Index>& timepoints,
                       const std::vector<Matrix>& paths, const PlotOptions& opt = {});

}  // namespace cellflow::io
