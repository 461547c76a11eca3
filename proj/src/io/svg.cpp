#include "cellflow/io/svg.hpp"

#include "cellflow/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace cellflow::io {

namespace {

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// viridis stops
std::string color(double f) {
    static constexpr std::array<std::array<int, 3>, 5> stops{
        {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    f = std::clamp(f, 0.0, 1.0) * 4.0;
    const int i = std::min(static_cast<int>(f), 3);
    const double w = f - i;
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround((1 - w) * stops[i][c] + w * stops[i + 1][c]));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

double coord(const Matrix& m, Index i, Index c) { return c < m.cols() ? m(i, c) : 0.0; }

}  // namespace

std::string render_svg(const Matrix& points, const std::vector<Index>& timepoints, const std::vector<Matrix>& paths,
                       const PlotOptions& opt) {
    if (static_cast<Index>(timepoints.size()) != points.rows())
        fail(ErrorCode::ShapeMismatch, "render_svg: one timepoint per point");
    require(opt.width > 80 && opt.height > 80, "render_svg: canvas too small");

    double lo[2] = {INFINITY, INFINITY}, hi[2] = {-INFINITY, -INFINITY};
    auto grow = [&](const Matrix& m) {
        for (Index i = 0; i < m.rows(); ++i)
            for (Index c = 0; c < 2; ++c) {
                const double v = coord(m, i, c);
                if (!std::isfinite(v)) fail(ErrorCode::Numeric, "render_svg: non-finite coordinate");
                lo[c] = std::min(lo[c], v);
                hi[c] = std::max(hi[c], v);
            }
    };
    grow(points);
    for (const Matrix& p : paths) grow(p);
    if (!std::isfinite(lo[0])) lo[0] = lo[1] = 0.0, hi[0] = hi[1] = 1.0;
    for (int c = 0; c < 2; ++c)
        if (hi[c] - lo[c] < 1e-12) lo[c] -= 0.5, hi[c] += 0.5;

    const double margin = 30.0;
    const double sx = (opt.width - 2 * margin) / (hi[0] - lo[0]);
    const double sy = (opt.height - 2 * margin) / (hi[1] - lo[1]);
    auto px = [&](double x) { return fixed(margin + (x - lo[0]) * sx); };
    auto py = [&](double y) { return fixed(opt.height - margin - (y - lo[1]) * sy); };

    Index tmax = 0;
    for (Index t : timepoints) tmax = std::max(tmax, t);

    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opt.width) + "\" height=\"" +
         std::to_string(opt.height) + "\" viewBox=\"0 0 " + std::to_string(opt.width) + " " +
         std::to_string(opt.height) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opt.title.empty())
        s += "<text x=\"" + fixed(margin) + "\" y=\"20.00\" font-family=\"sans-serif\" font-size=\"14\">" +
             escape(opt.title) + "</text>\n";
    s += "<g id=\"points\">\n";
    for (Index i = 0; i < points.rows(); ++i) {
        const double f = tmax > 0 ? static_cast<double>(timepoints[i]) / static_cast<double>(tmax) : 0.0;
        s += "<circle cx=\"" + px(coord(points, i, 0)) + "\" cy=\"" + py(coord(points, i, 1)) + "\" r=\"" +
             fixed(opt.point_radius) + "\" fill=\"" + color(f) + "\" fill-opacity=\"0.7\"/>\n";
    }
    s += "</g>\n<g id=\"trajectories\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1\" stroke-opacity=\"0.6\">\n";
    for (const Matrix& p : paths) {
        s += "<polyline points=\"";
        for (Index k = 0; k < p.rows(); ++k) s += (k ? " " : "") + px(coord(p, k, 0)) + "," + py(coord(p, k, 1));
        s += "\"/>\n";
    }
    s += "</g>\n</svg>\n";
    return s;
}

}  // namespace cellflow::io
