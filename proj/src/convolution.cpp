#include "rittlab/convolution.hpp"

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace rittlab {

namespace {

// The FFTW planner is a shared global; plan creation/destruction must be
// serialized even though execution on distinct plans is safe.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// FFTW plans are cached per transform size. Buffers live with the plan and
// inputs are copied in, which keeps alignment concerns away from callers.
struct FftSlot {
    std::size_t n = 0;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;

    explicit FftSlot(std::size_t size) : n(size) {
        real = fftw_alloc_real(n);
        spec = fftw_alloc_complex(n / 2 + 1);
        if (!real || !spec) throw std::bad_alloc();
        std::lock_guard<std::mutex> lk(planner_mutex());
        fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spec, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real, FFTW_ESTIMATE);
        if (!fwd || !inv) throw std::runtime_error("fftw plan creation failed");
    }
    ~FftSlot() {
        std::lock_guard<std::mutex> lk(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (inv) fftw_destroy_plan(inv);
        if (real) fftw_free(real);
        if (spec) fftw_free(spec);
    }
    FftSlot(const FftSlot&) = delete;
    FftSlot& operator=(const FftSlot&) = delete;
};

FftSlot& slot_for(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<FftSlot>> cache;
    auto& p = cache[n];
    if (!p) p = std::make_unique<FftSlot>(n);
    return *p;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

std::size_t conv_fft_threshold() { return std::size_t{1} << 22; }

std::vector<double> conv_dense_direct(const std::vector<double>& a,
                                      const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    // iterate the shorter operand on the outside
    const auto& s = a.size() <= b.size() ? a : b;
    const auto& l = a.size() <= b.size() ? b : a;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double w = s[i];
        if (w == 0.0) continue;
        for (std::size_t j = 0; j < l.size(); ++j) out[i + j] += w * l[j];
    }
    return out;
}

std::vector<double> conv_dense_fft(const std::vector<double>& a,
                                   const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    const std::size_t out_n = a.size() + b.size() - 1;
    const std::size_t n = next_pow2(out_n);
    FftSlot& slot = slot_for(n);
    const std::size_t nspec = n / 2 + 1;
    std::vector<std::complex<double>> fa(nspec);

    std::memset(slot.real, 0, n * sizeof(double));
    std::memcpy(slot.real, a.data(), a.size() * sizeof(double));
    fftw_execute(slot.fwd);
    std::memcpy(reinterpret_cast<double*>(fa.data()), slot.spec,
                nspec * sizeof(fftw_complex));

    std::memset(slot.real, 0, n * sizeof(double));
    std::memcpy(slot.real, b.data(), b.size() * sizeof(double));
    fftw_execute(slot.fwd);

    auto* sp = reinterpret_cast<std::complex<double>*>(slot.spec);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < nspec; ++i) sp[i] *= fa[i] * scale;
    fftw_execute(slot.inv);

    return std::vector<double>(slot.real, slot.real + out_n);
}

std::vector<double> conv_dense(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    if (a.size() * b.size() <= conv_fft_threshold()) return conv_dense_direct(a, b);
    return conv_dense_fft(a, b);
}

KernelConvolver::KernelConvolver(std::vector<double> kernel)
    : kernel_(std::move(kernel)) {
    if (kernel_.empty()) throw std::invalid_argument("KernelConvolver: empty kernel");
}

std::vector<double> KernelConvolver::apply(const std::vector<double>& in) const {
    if (in.empty()) return {};
    const std::size_t out_n = in.size() + kernel_.size() - 1;
    if (in.size() * kernel_.size() <= conv_fft_threshold())
        return conv_dense_direct(in, kernel_);

    const std::size_t n = next_pow2(out_n);
    FftSlot& slot = slot_for(n);
    const std::size_t nspec = n / 2 + 1;

    auto it = spectra_.find(n);
    if (it == spectra_.end()) {
        std::memset(slot.real, 0, n * sizeof(double));
        std::memcpy(slot.real, kernel_.data(), kernel_.size() * sizeof(double));
        fftw_execute(slot.fwd);
        std::vector<std::complex<double>> spec(nspec);
        std::memcpy(reinterpret_cast<double*>(spec.data()), slot.spec,
                    nspec * sizeof(fftw_complex));
        it = spectra_.emplace(n, std::move(spec)).first;
    }
    const std::vector<std::complex<double>>& kspec = it->second;

    std::memset(slot.real, 0, n * sizeof(double));
    std::memcpy(slot.real, in.data(), in.size() * sizeof(double));
    fftw_execute(slot.fwd);

    auto* sp = reinterpret_cast<std::complex<double>*>(slot.spec);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < nspec; ++i) sp[i] *= kspec[i] * scale;
    fftw_execute(slot.inv);

    return std::vector<double>(slot.real, slot.real + out_n);
}

}  // namespace rittlab
