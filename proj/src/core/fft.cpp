#include "core/fft.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace wig {

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

namespace {

void transform(std::vector<std::complex<double>>& a, double sign) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n))
        throw NumericError("fft: length must be a power of two");
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const auto u = a[i + j];
                const auto v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

} // namespace

void fft(std::vector<std::complex<double>>& a) { transform(a, -1.0); }

void ifft(std::vector<std::complex<double>>& a) {
    transform(a, 1.0);
    const double inv = 1.0 / static_cast<double>(a.size());
    for (auto& x : a) x *= inv;
}

} // namespace wig
