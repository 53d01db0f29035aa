#include "asympheat/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace asympheat {

namespace {

// FFTW planning is not thread safe; execution of independent plans is.
std::mutex plan_mutex;

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

// Plans are created with FFTW_ESTIMATE so results do not depend on measured
// timings, and cached per shape. In-place on a scratch buffer supplied by the
// caller each time (FFTW_ESTIMATE plans may be reused with new arrays of the
// same alignment via the new-array interface).
PlanPair& plans_for(const std::vector<int>& shape) {
    static std::map<std::vector<int>, PlanPair> cache;
    auto it = cache.find(shape);
    if (it != cache.end()) return it->second;

    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    fftw_complex* tmp = fftw_alloc_complex(n);
    // FFTW_UNALIGNED: plans must accept std::vector storage of any alignment
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair pp;
    pp.fwd = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), tmp, tmp,
                           FFTW_FORWARD, flags);
    pp.bwd = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), tmp, tmp,
                           FFTW_BACKWARD, flags);
    fftw_free(tmp);
    return cache.emplace(shape, pp).first->second;
}

void execute(const std::vector<int>& shape, std::vector<cplx>& buf, bool forward) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    PlanPair& pp = plans_for(shape);
    fftw_complex* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_execute_dft(forward ? pp.fwd : pp.bwd, p, p);
}

} // namespace

void fft_forward(const std::vector<int>& shape, std::vector<cplx>& buf) { execute(shape, buf, true); }
void fft_inverse(const std::vector<int>& shape, std::vector<cplx>& buf) { execute(shape, buf, false); }

void fft_forward_1d(std::vector<cplx>& buf) {
    std::vector<int> shape{static_cast<int>(buf.size())};
    execute(shape, buf, true);
}
void fft_inverse_1d(std::vector<cplx>& buf) {
    std::vector<int> shape{static_cast<int>(buf.size())};
    execute(shape, buf, false);
}

static double freq(int i, int n, double h) {
    // for even n the Nyquist index n/2 carries m = -n/2
    int m = (i <= (n - 1) / 2) ? i : i - n;
    return 2.0 * M_PI * m / (n * h);
}

std::vector<double> xi_squared(const RemainderField& f) {
    std::vector<double> out(f.size(), 0.0);
    std::vector<std::vector<double>> per_axis(f.d);
    for (int a = 0; a < f.d; ++a) {
        per_axis[a].resize(f.shape[a]);
        for (int i = 0; i < f.shape[a]; ++i) {
            double xi = freq(i, f.shape[a], f.spacing);
            per_axis[a][i] = xi * xi;
        }
    }
    for_each_index(f.shape, [&](const std::vector<int>& idx, std::size_t flat) {
        double s = 0.0;
        for (int a = 0; a < f.d; ++a) s += per_axis[a][idx[a]];
        out[flat] = s;
    });
    return out;
}

std::vector<double> xi_component(const RemainderField& f, int a) {
    std::vector<double> out(f.size(), 0.0);
    for_each_index(f.shape, [&](const std::vector<int>& idx, std::size_t flat) {
        out[flat] = freq(idx[a], f.shape[a], f.spacing);
    });
    return out;
}

RemainderField apply_multiplier(const RemainderField& f,
                                const std::function<cplx(std::size_t)>& mult) {
    std::vector<cplx> buf(f.data.begin(), f.data.end());
    fft_forward(f.shape, buf);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= mult(i);
    fft_inverse(f.shape, buf);
    RemainderField out = f;
    const double scale = 1.0 / static_cast<double>(f.size());
    for (std::size_t i = 0; i < buf.size(); ++i) out.data[i] = buf[i].real() * scale;
    return out;
}

ComplexField apply_multiplier_complex(const RemainderField& f,
                                      const std::function<cplx(std::size_t)>& mult) {
    std::vector<cplx> buf(f.data.begin(), f.data.end());
    fft_forward(f.shape, buf);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= mult(i);
    fft_inverse(f.shape, buf);
    ComplexField out = make_complex_like(f);
    const double scale = 1.0 / static_cast<double>(f.size());
    for (std::size_t i = 0; i < buf.size(); ++i) out.data[i] = buf[i] * scale;
    return out;
}

RemainderField spectral_laplacian(const RemainderField& f) {
    std::vector<double> xs = xi_squared(f);
    return apply_multiplier(f, [&](std::size_t i) { return cplx(-xs[i], 0.0); });
}

RemainderField spectral_poisson(const RemainderField& f) {
    std::vector<double> xs = xi_squared(f);
    return apply_multiplier(f, [&](std::size_t i) {
        return xs[i] == 0.0 ? cplx(0.0, 0.0) : cplx(-1.0 / xs[i], 0.0);
    });
}

} // namespace asympheat
