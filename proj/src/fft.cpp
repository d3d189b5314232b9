#include "sgs/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace sgs::fft {
namespace {

struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

// FFTW planning is not thread-safe; execution on distinct arrays is.
// FFTW_UNALIGNED keeps the chosen codelets independent of buffer alignment so
// repeated runs produce bit-identical transforms.
const Plans& plans_for(int n) {
    static std::mutex mutex;
    static std::map<int, Plans> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n) * n * n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Plans p;
    p.forward = fftw_plan_dft_3d(n, n, n, buf, buf, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft_3d(n, n, n, buf, buf, FFTW_BACKWARD, flags);
    if (!p.forward || !p.backward) throw std::runtime_error("FFTW planning failed");
    return cache.emplace(n, p).first->second;
}

void check(const std::vector<std::complex<double>>& data, int n) {
    if (data.size() != static_cast<std::size_t>(n) * n * n)
        throw std::invalid_argument("fft: array size does not match n^3");
}

}  // namespace

void forward(std::vector<std::complex<double>>& data, int n) {
    check(data, n);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plans_for(n).forward, buf, buf);
}

void backward(std::vector<std::complex<double>>& data, int n) {
    check(data, n);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plans_for(n).backward, buf, buf);
    const double scale = 1.0 / (static_cast<double>(n) * n * n);
    for (auto& v : data) v *= scale;
}

}  // namespace sgs::fft
