#ifndef BPR_FFT_HPP
#define BPR_FFT_HPP

#include <vector>

#include "bpr/grid.hpp"

namespace bpr {

/// Unitary centered 2-D DFT. DC sits at bin (ny/2, nz/2) in both domains and
/// both directions scale by 1/sqrt(ny*nz), so fft2 and ifft2 are exact mutual
/// inverses and Parseval holds: ||fft2(x)|| == ||x||.
ComplexGrid fft2(const ComplexGrid& img);

/// Inverse of fft2 under the same unitary centered convention.
ComplexGrid ifft2(const ComplexGrid& ksp);

/// Unitary centered 1-D transform of a single line (used for readout-axis
/// hybrid transforms). sign -1 = forward, +1 = inverse.
void fft1d(std::vector<cdouble>& line, int sign);

/// <a, b> = sum conj(a) * b — conjugate-linear in the first argument.
cdouble inner_product(const ComplexGrid& a, const ComplexGrid& b);
cdouble inner_product(const MultiCoilKSpace& a, const MultiCoilKSpace& b);
cdouble inner_product(const ImageSet& a, const ImageSet& b);

} // namespace bpr

#endif
