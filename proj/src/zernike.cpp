#include "morphprof/descriptors.hpp"
#include "morphprof/error.hpp"

#include <cmath>
#include <numbers>

namespace morphprof {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

void check_order(int n, int m) {
    const int am = std::abs(m);
    if (n < 0 || am > n || (n - am) % 2 != 0) throw ConfigError("invalid (n,m)");
}

// Coefficients of r^(n-2s) in R_n^|m|, s = 0 .. (n-|m|)/2.
std::vector<double> radial_coefficients(int n, int m) {
    const int am = std::abs(m);
    std::vector<double> c;
    for (int s = 0; s <= (n - am) / 2; ++s) {
        const double sign = (s % 2 == 0) ? 1.0 : -1.0;
        c.push_back(sign * factorial(n - s) /
                    (factorial(s) * factorial((n + am) / 2 - s) * factorial((n - am) / 2 - s)));
    }
    return c;
}

}  // namespace

double zernike_radial(int n, int m, double r) {
    check_order(n, m);
    const auto c = radial_coefficients(n, m);
    double v = 0.0;
    for (std::size_t s = 0; s < c.size(); ++s) v += c[s] * std::pow(r, n - 2 * static_cast<int>(s));
    return v;
}

std::complex<double> zernike_basis(int n, int m, double x, double y) {
    const double r = std::hypot(x, y);
    const double theta = std::atan2(y, x);
    return zernike_radial(n, m, r) * std::polar(1.0, m * theta);
}

std::vector<std::pair<int, int>> zernike_indices(int n_max) {
    std::vector<std::pair<int, int>> out;
    for (int n = 0; n <= n_max; ++n) {
        for (int m = n % 2; m <= n; m += 2) out.emplace_back(n, m);
    }
    return out;
}

std::vector<std::complex<double>> zernike_moment_values(const BinaryMask& mask, int n_max) {
    if (n_max < 0) throw ConfigError("invalid (n,m)");
    const Centroid c = centroid_of(mask);
    double rho_max = 0.0;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (mask.foreground[static_cast<std::size_t>(y) * mask.width + x]) {
                rho_max = std::max(rho_max, std::hypot(x - c.x, y - c.y));
            }
        }
    }
    if (!(rho_max > 0.0)) throw InputError("mask too small for Zernike moments");

    const auto index = zernike_indices(n_max);
    std::vector<std::vector<double>> coeffs;
    coeffs.reserve(index.size());
    for (auto [n, m] : index) coeffs.push_back(radial_coefficients(n, m));

    std::vector<std::complex<double>> acc(index.size(), 0.0);
    std::vector<double> rpow(n_max + 1);
    std::vector<std::complex<double>> phase(n_max + 1);
    const double inv_rho = 1.0 / rho_max;
    for (int py = 0; py < mask.height; ++py) {
        for (int px = 0; px < mask.width; ++px) {
            if (!mask.foreground[static_cast<std::size_t>(py) * mask.width + px]) continue;
            const double x = (px - c.x) * inv_rho;
            const double y = (py - c.y) * inv_rho;
            // every foreground pixel lies within rho_max, so no r <= 1 test; one would only
            // drop the farthest pixel on rounding
            const double r = std::hypot(x, y);
            rpow[0] = 1.0;
            for (int i = 1; i <= n_max; ++i) rpow[i] = rpow[i - 1] * r;
            // conj(exp(i m theta)) = ((x - i y) / r)^m; at r = 0 only m = 0 survives
            const std::complex<double> unit = r > 0.0 ? std::complex<double>(x, -y) / r : std::complex<double>(0.0);
            phase[0] = 1.0;
            for (int i = 1; i <= n_max; ++i) phase[i] = phase[i - 1] * unit;
            for (std::size_t j = 0; j < index.size(); ++j) {
                const auto [n, m] = index[j];
                double radial = 0.0;
                for (std::size_t s = 0; s < coeffs[j].size(); ++s) radial += coeffs[j][s] * rpow[n - 2 * s];
                acc[j] += radial * phase[m];
            }
        }
    }
    const double area = inv_rho * inv_rho;
    for (std::size_t j = 0; j < index.size(); ++j) acc[j] *= (index[j].first + 1) / std::numbers::pi * area;
    return acc;
}

std::vector<double> zernike_moments(const BinaryMask& mask, int n_max) {
    const auto values = zernike_moment_values(mask, n_max);
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& v : values) out.push_back(std::abs(v));
    return out;
}

DescriptorVector zm_descriptor(const BinaryMask& mask) {
    return {DescriptorKind::ZM12, zernike_moments(mask, kZernikeOrder)};
}

}  // namespace morphprof
