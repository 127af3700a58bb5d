#pragma once

// Dense linear convolution. Small products go through the direct O(n*m) loop;
// large ones through FFTW. Both paths are exercised against each other in the
// test suite.

#include <complex>
#include <cstddef>
#include <map>
#include <vector>

namespace rittlab {

// c[k] = sum_i a[i] b[k-i], size a.size()+b.size()-1
std::vector<double> conv_dense(const std::vector<double>& a, const std::vector<double>& b);

// Convolution against a fixed kernel, caching the kernel's spectrum per
// transform size so repeated applications cost one forward and one inverse
// transform each. Small products still take the direct loop.
class KernelConvolver {
  public:
    explicit KernelConvolver(std::vector<double> kernel);
    const std::vector<double>& kernel() const { return kernel_; }
    // full convolution, size in.size() + kernel.size() - 1
    std::vector<double> apply(const std::vector<double>& in) const;

  private:
    std::vector<double> kernel_;
    mutable std::map<std::size_t, std::vector<std::complex<double>>> spectra_;
};

std::vector<double> conv_dense_direct(const std::vector<double>& a,
                                      const std::vector<double>& b);
std::vector<double> conv_dense_fft(const std::vector<double>& a,
                                   const std::vector<double>& b);

// product size above which conv_dense switches to the FFT path
std::size_t conv_fft_threshold();

}  // namespace rittlab
