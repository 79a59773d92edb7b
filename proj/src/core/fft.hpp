#ifndef WIGSOLVE_CORE_FFT_HPP
#define WIGSOLVE_CORE_FFT_HPP

#include <complex>
#include <vector>

namespace wig {

/// In-place iterative radix-2 transform; n must be a power of two.
/// Forward uses kernel e^{-2 pi i jk/n}; inverse e^{+2 pi i jk/n} with the
/// 1/n factor applied (fft then ifft is the identity).
void fft(std::vector<std::complex<double>>& a);
void ifft(std::vector<std::complex<double>>& a);

bool is_power_of_two(std::size_t n);

} // namespace wig

#endif
