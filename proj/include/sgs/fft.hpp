#pragma once

#include <complex>
#include <vector>

namespace sgs::fft {

/// In-place 3D DFT of an n^3 row-major array, unnormalised (sum f e^{-ik.x}).
void forward(std::vector<std::complex<double>>& data, int n);
/// In-place inverse 3D DFT including the 1/n^3 factor.
void backward(std::vector<std::complex<double>>& data, int n);

}  // namespace sgs::fft
