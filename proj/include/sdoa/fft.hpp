#pragma once

#include <complex>
#include <span>
#include <vector>

namespace sdoa {

// In-place complex DFT of arbitrary length; inverse is unnormalized like the forward transform.
void fft_inplace(std::span<std::complex<double>> data, bool inverse = false);

inline std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x, bool inverse = false)
{
    std::vector<std::complex<double>> y(x.begin(), x.end());
    fft_inplace(y, inverse);
    return y;
}

} // namespace sdoa
