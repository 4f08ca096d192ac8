#pragma once
// Plots of two-objective upper sets. Each set is clipped exactly to the view box
// and drawn as a polygon; vertices are drawn as dots. Output depends only on
// the input, so identical inputs give identical bytes.

#include "flexrec/polyhedron.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace flexrec {

struct SvgView
{
    bool negate_axis_1 = true; ///< show objective 1 as gain = -loss
    /// Clip box in stored (minimization) coordinates {lo1, lo2, hi1, hi2}; derived from the vertices when absent.
    std::optional<std::array<Rational, 4>> clip;
    int width = 640;
    int height = 480;
};

namespace detail {

inline std::string svg_num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00")
        s = "0.00";
    return s;
}

inline std::string svg_escape(const std::string& s)
{
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

/** Vertices of a convex polygon in counter-clockwise order (monotone chain, exact). */
inline std::vector<RatVector> convex_order(std::vector<RatVector> pts)
{
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3)
        return pts;
    auto cross = [](const RatVector& o, const RatVector& a, const RatVector& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<RatVector> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]).sign() <= 0)
            --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]).sign() <= 0)
            --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

} // namespace detail

/** Renders the sets back to front in list order. */
inline std::string export_svg(const std::vector<std::pair<std::string, UpperSet>>& sets, const SvgView& view = {})
{
    if (sets.empty())
        throw PreconditionError("SVG export needs at least one set");
    for (const auto& [label, s] : sets)
        if (s.dim() != 2)
            throw PreconditionError("SVG export requires two objectives");

    std::array<Rational, 4> box;
    if (view.clip) {
        box = *view.clip;
    } else {
        std::optional<RatVector> lo, hi;
        for (const auto& [label, s] : sets)
            if (!s.is_empty())
                for (const auto& v : s.vertices()) {
                    if (!lo) {
                        lo = hi = v;
                        continue;
                    }
                    for (std::size_t i = 0; i < 2; ++i) {
                        (*lo)[i] = std::min((*lo)[i], v[i]);
                        (*hi)[i] = std::max((*hi)[i], v[i]);
                    }
                }
        if (!lo)
            lo = hi = RatVector{0, 0};
        for (std::size_t i = 0; i < 2; ++i) {
            Rational margin = ((*hi)[i] - (*lo)[i]) / 10;
            if (margin.is_zero())
                margin = 1;
            box[i] = (*lo)[i] - margin;
            box[2 + i] = (*hi)[i] + 2 * margin;
        }
    }
    if (box[0] >= box[2] || box[1] >= box[3])
        throw PreconditionError("SVG clip box is empty");

    HRep clip;
    clip.dim = 2;
    clip.add(RatVector{1, 0}, box[0]);
    clip.add(RatVector{0, 1}, box[1]);
    clip.add(RatVector{-1, 0}, -box[2]);
    clip.add(RatVector{0, -1}, -box[3]);
    const Polyhedron clip_box = Polyhedron::from_h(clip);

    const double margin_l = 70, margin_r = 20, margin_t = 20, margin_b = 50;
    const double plot_w = view.width - margin_l - margin_r, plot_h = view.height - margin_t - margin_b;
    // horizontal axis runs over the displayed first coordinate (negated when showing gain)
    const double x_lo = view.negate_axis_1 ? -box[2].to_double() : box[0].to_double();
    const double x_hi = view.negate_axis_1 ? -box[0].to_double() : box[2].to_double();
    const double y_lo = box[1].to_double(), y_hi = box[3].to_double();
    auto px = [&](const Rational& v1) {
        double x = view.negate_axis_1 ? -v1.to_double() : v1.to_double();
        return margin_l + (x - x_lo) / (x_hi - x_lo) * plot_w;
    };
    auto py = [&](const Rational& v2) { return margin_t + (y_hi - v2.to_double()) / (y_hi - y_lo) * plot_h; };

    static const char* const fills[] = {"#b0b0b0", "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"};
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << view.width << "\" height=\""
       << view.height << "\" viewBox=\"0 0 " << view.width << " " << view.height << "\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"" << view.width << "\" height=\"" << view.height << "\" fill=\"white\"/>\n";

    for (std::size_t k = 0; k < sets.size(); ++k) {
        const auto& [label, s] = sets[k];
        const char* fill = fills[k % (sizeof fills / sizeof *fills)];
        os << "<g id=\"set-" << k << "\">\n<title>" << detail::svg_escape(label) << "</title>\n";
        if (!s.is_empty()) {
            Polyhedron clipped = intersect(s.polyhedron(), clip_box);
            if (!clipped.is_empty()) {
                os << "<polygon fill=\"" << fill << "\" fill-opacity=\"" << (k == 0 ? "0.8" : "0.5")
                   << "\" stroke=\"" << fill << "\" stroke-width=\"1\" points=\"";
                bool first = true;
                for (const auto& v : detail::convex_order(clipped.vertices())) {
                    os << (first ? "" : " ") << detail::svg_num(px(v[0])) << "," << detail::svg_num(py(v[1]));
                    first = false;
                }
                os << "\"/>\n";
            }
            for (const auto& v : s.vertices())
                if (contains_point(clip_box, v))
                    os << "<circle cx=\"" << detail::svg_num(px(v[0])) << "\" cy=\"" << detail::svg_num(py(v[1]))
                       << "\" r=\"3\" fill=\"black\"/>\n";
        }
        os << "</g>\n";
    }

    // axes, ticks and labels
    const double x0 = margin_l, y0 = margin_t + plot_h;
    os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n"
       << "<line x1=\"" << detail::svg_num(x0) << "\" y1=\"" << detail::svg_num(y0) << "\" x2=\""
       << detail::svg_num(x0 + plot_w) << "\" y2=\"" << detail::svg_num(y0) << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << detail::svg_num(x0) << "\" y1=\"" << detail::svg_num(margin_t) << "\" x2=\""
       << detail::svg_num(x0) << "\" y2=\"" << detail::svg_num(y0) << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        double fx = x_lo + (x_hi - x_lo) * t / 4, fy = y_lo + (y_hi - y_lo) * t / 4;
        double sx = x0 + plot_w * t / 4, sy = y0 - plot_h * t / 4;
        os << "<text x=\"" << detail::svg_num(sx) << "\" y=\"" << detail::svg_num(y0 + 15)
           << "\" text-anchor=\"middle\">" << detail::svg_num(fx) << "</text>\n"
           << "<text x=\"" << detail::svg_num(x0 - 5) << "\" y=\"" << detail::svg_num(sy + 4)
           << "\" text-anchor=\"end\">" << detail::svg_num(fy) << "</text>\n";
    }
    os << "<text x=\"" << detail::svg_num(x0 + plot_w / 2) << "\" y=\"" << detail::svg_num(view.height - 8)
       << "\" text-anchor=\"middle\">" << (view.negate_axis_1 ? "gain (€)" : "objective 1") << "</text>\n"
       << "<text x=\"14\" y=\"" << detail::svg_num(margin_t + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
       << detail::svg_num(margin_t + plot_h / 2) << ")\">" << (view.negate_axis_1 ? "work time (minutes)" : "objective 2")
       << "</text>\n";
    for (std::size_t k = 0; k < sets.size(); ++k) {
        double ly = margin_t + 12 + 16 * static_cast<double>(k);
        os << "<rect x=\"" << detail::svg_num(x0 + plot_w - 150) << "\" y=\"" << detail::svg_num(ly - 9)
           << "\" width=\"10\" height=\"10\" fill=\"" << fills[k % (sizeof fills / sizeof *fills)] << "\"/>\n"
           << "<text x=\"" << detail::svg_num(x0 + plot_w - 135) << "\" y=\"" << detail::svg_num(ly) << "\">"
           << detail::svg_escape(sets[k].first) << (sets[k].second.is_empty() ? " (empty)" : "") << "</text>\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

} // namespace flexrec
