#pragma once

#include <complex>
#include <vector>

namespace morphprof::detail {

/// Unnormalized forward DFT, sum x[t] exp(-i 2 pi k t / N). Radix-2 for powers
/// of two, direct summation otherwise.
std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x);

}  // namespace morphprof::detail
