#include "morphprof/error.hpp"
#include "morphprof/funclust.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace morphprof {

namespace {

std::size_t find_span(const std::vector<double>& knots, int degree, double t) {
    const std::size_t n = knots.size() - static_cast<std::size_t>(degree) - 1;  // basis count
    if (t >= knots[n]) return n - 1;
    if (t <= knots[static_cast<std::size_t>(degree)]) return static_cast<std::size_t>(degree);
    const auto it = std::upper_bound(knots.begin() + degree, knots.begin() + static_cast<std::ptrdiff_t>(n) + 1, t);
    return static_cast<std::size_t>(it - knots.begin()) - 1;
}

// Nonzero basis values N_{span-degree..span}(t).
void nonzero_basis(const std::vector<double>& knots, int degree, std::size_t span, double t, std::vector<double>& out) {
    const auto p = static_cast<std::size_t>(degree);
    out.assign(p + 1, 0.0);
    std::vector<double> left(p + 1), right(p + 1);
    out[0] = 1.0;
    for (std::size_t j = 1; j <= p; ++j) {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        double saved = 0.0;
        for (std::size_t r = 0; r < j; ++r) {
            const double temp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
}

struct Projector {
    std::vector<double> grid;
    std::vector<double> knots;
    Eigen::MatrixXd map;  // n_basis x grid, least-squares solution operator
};

std::shared_ptr<const Projector> projector_for(std::size_t grid_size, int n_basis) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, int>, std::shared_ptr<const Projector>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{grid_size, n_basis}];
    if (slot) return slot;
    auto proj = std::make_shared<Projector>();
    proj->grid = angle_grid(grid_size);
    proj->knots = clamped_uniform_knots(n_basis, kSplineDegree, 0.0, 2.0 * std::numbers::pi);
    Eigen::MatrixXd design(static_cast<Eigen::Index>(grid_size), n_basis);
    for (std::size_t i = 0; i < grid_size; ++i) {
        const auto row = bspline_basis_values(proj->knots, kSplineDegree, proj->grid[i]);
        for (int j = 0; j < n_basis; ++j) design(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < n_basis) throw NumericError("spline design matrix is rank deficient");
    proj->map = qr.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(grid_size), static_cast<Eigen::Index>(grid_size)));
    slot = proj;
    return slot;
}

}  // namespace

std::vector<double> angle_grid(std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) g[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    return g;
}

double trapezoid(const std::vector<double>& grid, const std::vector<double>& f) {
    if (grid.size() != f.size()) throw ConfigError("grid mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) s += 0.5 * (grid[k + 1] - grid[k]) * (f[k] + f[k + 1]);
    return s;
}

std::vector<double> clamped_uniform_knots(int n_basis, int degree, double lo, double hi) {
    if (degree < 0 || n_basis < degree + 1) throw ConfigError("need at least degree+1 basis functions");
    if (!(hi > lo)) throw ConfigError("empty knot interval");
    std::vector<double> knots;
    knots.reserve(static_cast<std::size_t>(n_basis + degree + 1));
    for (int i = 0; i <= degree; ++i) knots.push_back(lo);
    const int segments = n_basis - degree;
    for (int i = 1; i < segments; ++i) knots.push_back(lo + (hi - lo) * i / segments);
    for (int i = 0; i <= degree; ++i) knots.push_back(hi);
    return knots;
}

std::vector<double> bspline_basis_values(const std::vector<double>& knots, int degree, double t) {
    const std::size_t n = knots.size() - static_cast<std::size_t>(degree) - 1;
    t = std::clamp(t, knots.front(), knots.back());
    const std::size_t span = find_span(knots, degree, t);
    std::vector<double> local;
    nonzero_basis(knots, degree, span, t, local);
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < local.size(); ++j) out[span - static_cast<std::size_t>(degree) + j] = local[j];
    return out;
}

double FunctionalCurve::evaluate(double t) const {
    t = std::clamp(t, knots.front(), knots.back());
    const std::size_t span = find_span(knots, degree, t);
    std::vector<double> local;
    nonzero_basis(knots, degree, span, t, local);
    double v = 0.0;
    for (std::size_t j = 0; j < local.size(); ++j) v += local[j] * coefficients[span - static_cast<std::size_t>(degree) + j];
    return v;
}

std::vector<double> FunctionalCurve::evaluate(const std::vector<double>& at) const {
    if (at == grid && grid_values.size() == grid.size()) return grid_values;
    std::vector<double> out(at.size());
    for (std::size_t i = 0; i < at.size(); ++i) out[i] = evaluate(at[i]);
    return out;
}

FunctionalCurve smooth_bspline(const std::vector<double>& values, int n_basis) {
    if (n_basis < kSplineDegree + 1) throw ConfigError("n_basis must be at least 4");
    if (values.size() < static_cast<std::size_t>(n_basis)) throw ConfigError("fewer samples than basis functions");
    const auto proj = projector_for(values.size(), n_basis);
    const Eigen::Map<const Eigen::VectorXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
    const Eigen::VectorXd c = proj->map * v;
    FunctionalCurve curve;
    curve.knots = proj->knots;
    curve.coefficients.assign(c.data(), c.data() + c.size());
    curve.grid = proj->grid;
    curve.grid_values.clear();
    curve.grid_values = curve.evaluate(curve.grid);
    return curve;
}

FunctionalCurve smooth_bspline(const RadialProfile& p, int n_basis) {
    if (p.size() != kFunctionalGridSize) throw ConfigError("profile must have 200 samples");
    return smooth_bspline(p.samples, n_basis);
}

}  // namespace morphprof
