#pragma once

#include "morphprof/mask.hpp"

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace morphprof {

// ---------------------------------------------------------------------------
// Centroid distance function
// ---------------------------------------------------------------------------

/// Centroid-to-boundary distance sampled at angles 2*pi*k/N.
struct RadialProfile {
    std::vector<double> samples;
    bool normalized = false;
    bool aligned = false;

    std::size_t size() const { return samples.size(); }
};

/// For each ray the largest r whose point falls on a foreground pixel: coarse
/// march at 0.25 px, then bisection down to 0.01 px.
RadialProfile radial_profile(const BinaryMask& mask, const Centroid& c, std::size_t n);

RadialProfile normalize_profile(const RadialProfile& p);

/// Cyclic rotation putting the global maximum at index 0. Among tied maxima the
/// one whose continuation is lexicographically largest wins, then the lowest
/// index, so the choice follows the shape under rotation.
RadialProfile align_profile(const RadialProfile& p);

/// Magnitudes |c_1| ... |c_k| of the DFT of a normalized profile.
std::vector<double> cdf_fourier_magnitudes(const RadialProfile& p, std::size_t k);

// ---------------------------------------------------------------------------
// Fourier descriptors of the boundary
// ---------------------------------------------------------------------------

/// DFT coefficients C_n = (1/N) sum z(t) exp(-i 2 pi n t / N), stored in FFT
/// order; use coefficient(n) for signed harmonic access.
struct ComplexSpectrum {
    std::vector<std::complex<double>> coeffs;

    std::size_t size() const { return coeffs.size(); }
    std::complex<double> coefficient(long n) const {
        const long sz = static_cast<long>(coeffs.size());
        return coeffs[static_cast<std::size_t>(((n % sz) + sz) % sz)];
    }
};

/// Rotates the contour so it starts at a vertex chosen from the cyclic
/// sequence of squared distances to the vertex mean (lexicographic maximum,
/// exact integer arithmetic). Quarter-turn rotations of a raster then yield
/// the same start vertex.
Contour canonical_start(const Contour& contour);

/// n points spaced uniformly by arclength along the closed polygon, starting at its first point.
std::vector<Point2> contour_resample(const Contour& contour, std::size_t n);

ComplexSpectrum fourier_spectrum(const std::vector<Point2>& points);

/// [F_-k .. F_-1, F_1 .. F_k] with C_0 removed and everything divided by |C_1|.
std::vector<double> fourier_descriptor(const ComplexSpectrum& spectrum, std::size_t k);

/// Inverse transform truncated to |n| <= k, evaluated at the N original parameters.
/// At k = N/2 - 1 the unpaired n = -N/2 term is included, so the input comes back exactly.
std::vector<Point2> reconstruct_contour(const ComplexSpectrum& spectrum, std::size_t k);

// ---------------------------------------------------------------------------
// Zernike moments
// ---------------------------------------------------------------------------

double zernike_radial(int n, int m, double r);

/// V_n^m(r, theta) = R_n^|m|(r) exp(i m theta) at Cartesian (x, y) on the unit disk.
std::complex<double> zernike_basis(int n, int m, double x, double y);

/// (n, m) pairs with m >= 0, n - m even, n <= n_max, ordered by (n, m).
std::vector<std::pair<int, int>> zernike_indices(int n_max);

/// Complex moments A_n^m for zernike_indices(n_max). The mask is centered on its
/// centroid and scaled by the largest centroid-to-pixel distance; each pixel
/// contributes its mapped area 1/rho_max^2.
std::vector<std::complex<double>> zernike_moment_values(const BinaryMask& mask, int n_max);

/// |A_n^m| for zernike_indices(n_max).
std::vector<double> zernike_moments(const BinaryMask& mask, int n_max);

// ---------------------------------------------------------------------------
// Scalar shape metrics
// ---------------------------------------------------------------------------

struct ShapeMetrics {
    double area = 0.0;
    double perimeter = 0.0;
    double circularity = 0.0;
    double aspect_ratio = 0.0;
    double feret_min = 0.0;
    double feret_max = 0.0;
};

/// Tolerance of the polygon simplification applied before measuring perimeter.
inline constexpr double kPerimeterSimplifyTolerance = 0.75;

/// Douglas-Peucker simplification of a closed contour.
std::vector<Point2> simplify_closed(const std::vector<Point2>& points, double tolerance);

/// Min and max caliper diameters of a point set.
std::pair<double, double> feret_diameters(const std::vector<Point2>& points);

/// Corners of the unit pixel squares around each contour point.
std::vector<Point2> pixel_corners(const Contour& contour);

/// area = pixel count; perimeter = length of the simplified contour polygon;
/// circularity = 4 pi area / perimeter^2 clamped to 1; aspect ratio = min/max
/// Feret over the pixel squares of the contour.
ShapeMetrics shape_metrics(const BinaryMask& mask, const Contour& contour);

// ---------------------------------------------------------------------------
// Fixed-length descriptor vectors
// ---------------------------------------------------------------------------

enum class DescriptorKind { CDF100, FD10, ZM12 };

std::string_view descriptor_name(DescriptorKind kind);
DescriptorKind parse_descriptor(std::string_view name);
std::size_t descriptor_length(DescriptorKind kind);
/// Column headers for CSV output, e.g. cdf_000, fd_m5, zm_4_2.
std::vector<std::string> descriptor_headers(DescriptorKind kind);

struct DescriptorVector {
    DescriptorKind kind = DescriptorKind::FD10;
    std::vector<double> values;
};

inline constexpr std::size_t kCdfSamples = 100;
inline constexpr std::size_t kFdHarmonics = 5;
inline constexpr std::size_t kContourSamples = 256;
inline constexpr int kZernikeOrder = 5;

DescriptorVector cdf_descriptor(const BinaryMask& mask, const Centroid& c);
DescriptorVector fd_descriptor(const Contour& contour);
DescriptorVector zm_descriptor(const BinaryMask& mask);

/// Runs the full chain for `kind` on a single-component mask.
DescriptorVector extract_descriptor(DescriptorKind kind, const BinaryMask& mask);

}  // namespace morphprof
