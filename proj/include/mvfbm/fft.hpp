#pragma once

#include <complex>
#include <span>

namespace mvfbm::fft {

/// In-place radix-2 forward DFT, X[k] = sum_j x[j] exp(-2 pi i jk / n).
/// Twiddles are evaluated directly (no recurrence) so the result depends only
/// on the input, never on call history. Requires n to be a power of two.
void forward(std::span<std::complex<double>> data);

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

}  // namespace mvfbm::fft
