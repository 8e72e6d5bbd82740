#pragma once

#include <complex>
#include <span>
#include <vector>

namespace afe {

// Thin FFTW wrappers. Plans are built per call with FFTW_ESTIMATE; planner
// access is serialised internally so these are safe to call concurrently.

/// One-sided DFT of a real record: n/2+1 bins, unnormalised.
std::vector<std::complex<double>> rfft(std::span<const double> x);

/// Inverse of rfft for a record of length n, normalised (irfft(rfft(x)) == x).
std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n);

}  // namespace afe
