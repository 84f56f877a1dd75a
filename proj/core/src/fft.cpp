#include "glodismo/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace glodismo {
namespace {

// FFTW's planner is not thread-safe; plans are created once per length
// under a lock and executed via the (thread-safe) array-execute API.
struct Plans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

std::mutex plan_mutex;
std::map<std::size_t, Plans>& plan_cache() {
    static std::map<std::size_t, Plans> cache;
    return cache;
}

Plans& plans_for(std::size_t n) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto& p = plan_cache()[n];
    if (!p.r2c) {
        std::vector<double> re(n);
        std::vector<fftw_complex> cx(n / 2 + 1);
        p.r2c = fftw_plan_dft_r2c_1d(static_cast<int>(n), re.data(), cx.data(),
                                     FFTW_ESTIMATE);
        p.c2r = fftw_plan_dft_c2r_1d(static_cast<int>(n), cx.data(), re.data(),
                                     FFTW_ESTIMATE);
    }
    return p;
}

}  // namespace

void fft_r2c(std::size_t n, const double* in, std::complex<double>* out) {
    auto& p = plans_for(n);
    // FFTW may not modify the input for r2c with array execute, but the API
    // takes non-const pointers; copy to a scratch buffer to be safe.
    std::vector<double> scratch(in, in + n);
    fftw_execute_dft_r2c(p.r2c, scratch.data(),
                         reinterpret_cast<fftw_complex*>(out));
}

void fft_c2r(std::size_t n, const std::complex<double>* in, double* out) {
    auto& p = plans_for(n);
    // c2r destroys its input, so the copy is required.
    std::vector<std::complex<double>> scratch(in, in + n / 2 + 1);
    fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(scratch.data()),
                         out);
    double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out[i] *= inv;
}

}  // namespace glodismo
