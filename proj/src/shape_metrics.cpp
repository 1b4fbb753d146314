#include "morphprof/descriptors.hpp"
#include "morphprof/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace morphprof {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) return std::hypot(p.x - a.x, p.y - a.y);
    const double t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
    return std::hypot(p.x - a.x - t * dx, p.y - a.y - t * dy);
}

void douglas_peucker(const std::vector<Point2>& pts, std::size_t first, std::size_t last, double tol,
                     std::vector<bool>& keep) {
    std::vector<std::pair<std::size_t, std::size_t>> stack{{first, last}};
    while (!stack.empty()) {
        auto [lo, hi] = stack.back();
        stack.pop_back();
        if (hi <= lo + 1) continue;
        double worst = -1.0;
        std::size_t split = lo;
        for (std::size_t i = lo + 1; i < hi; ++i) {
            const double d = segment_distance(pts[i % pts.size()], pts[lo % pts.size()], pts[hi % pts.size()]);
            if (d > worst) {
                worst = d;
                split = i;
            }
        }
        if (worst > tol) {
            keep[split % pts.size()] = true;
            stack.emplace_back(lo, split);
            stack.emplace_back(split, hi);
        }
    }
}

}  // namespace

std::vector<Point2> simplify_closed(const std::vector<Point2>& points, double tolerance) {
    const std::size_t n = points.size();
    if (n < 4) return points;
    std::size_t far = 0;
    double best = -1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double d = std::hypot(points[i].x - points[0].x, points[i].y - points[0].y);
        if (d > best) {
            best = d;
            far = i;
        }
    }
    std::vector<bool> keep(n, false);
    keep[0] = keep[far] = true;
    douglas_peucker(points, 0, far, tolerance, keep);
    douglas_peucker(points, far, n, tolerance, keep);  // index n wraps to the start
    std::vector<Point2> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (keep[i]) out.push_back(points[i]);
    }
    return out;
}

std::pair<double, double> feret_diameters(const std::vector<Point2>& points) {
    const auto hull = convex_hull(points);
    if (hull.empty()) return {0.0, 0.0};
    double max_d = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        for (std::size_t j = i + 1; j < hull.size(); ++j) {
            max_d = std::max(max_d, std::hypot(hull[i].x - hull[j].x, hull[i].y - hull[j].y));
        }
    }
    if (hull.size() < 3) return {0.0, max_d};
    double min_w = INFINITY;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        double width = 0.0;
        for (const auto& p : hull) width = std::max(width, std::abs(cross(a, b, p)) / len);
        min_w = std::min(min_w, width);
    }
    return {min_w, max_d};
}

std::vector<Point2> pixel_corners(const Contour& contour) {
    std::vector<Point2> out;
    out.reserve(4 * contour.points.size());
    for (const auto& p : contour.points) {
        for (double dx : {-0.5, 0.5}) {
            for (double dy : {-0.5, 0.5}) out.push_back({p.x + dx, p.y + dy});
        }
    }
    return out;
}

ShapeMetrics shape_metrics(const BinaryMask& mask, const Contour& contour) {
    ShapeMetrics m;
    m.area = static_cast<double>(mask.count());
    const auto simplified = simplify_closed(contour.points, kPerimeterSimplifyTolerance);
    for (std::size_t i = 0; i < simplified.size(); ++i) {
        const auto& a = simplified[i];
        const auto& b = simplified[(i + 1) % simplified.size()];
        m.perimeter += std::hypot(b.x - a.x, b.y - a.y);
    }
    if (!(m.perimeter > 0.0)) throw InputError("contour degenerate");
    m.circularity = std::min(1.0, 4.0 * std::numbers::pi * m.area / (m.perimeter * m.perimeter));
    const auto [fmin, fmax] = feret_diameters(pixel_corners(contour));
    m.feret_min = fmin;
    m.feret_max = fmax;
    m.aspect_ratio = fmax > 0.0 ? fmin / fmax : 0.0;
    return m;
}

}  // namespace morphprof
