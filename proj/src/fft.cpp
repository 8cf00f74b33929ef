#include "htpv/fft.hpp"

#include "htpv/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <mutex>

namespace htpv::fft {

namespace {

// The FFTW planner is not re-entrant; execution on a finished plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
std::unique_ptr<T[], FftwFree> fftw_buffer(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
    if (p == nullptr) throw Error(ErrorKind::io, "FFT buffer allocation failed");
    return std::unique_ptr<T[], FftwFree>(p);
}

class Plan {
public:
    explicit Plan(fftw_plan p) : plan_(p) {
        if (plan_ == nullptr) throw Error(ErrorKind::config, "FFTW could not create a plan");
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    ~Plan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

std::vector<Complex> complex_transform(std::span<const Complex> x, int sign) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    auto in = fftw_buffer<fftw_complex>(n);
    auto out = fftw_buffer<fftw_complex>(n);
    std::unique_ptr<Plan> plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = std::make_unique<Plan>(fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(), sign, FFTW_ESTIMATE));
    }
    for (std::size_t i = 0; i < n; ++i) {
        in[i][0] = x[i].real();
        in[i][1] = x[i].imag();
    }
    plan->execute();
    std::vector<Complex> result(n);
    for (std::size_t i = 0; i < n; ++i) result[i] = {out[i][0], out[i][1]};
    return result;
}

}  // namespace

std::vector<Complex> forward(std::span<const Complex> x) { return complex_transform(x, FFTW_FORWARD); }

std::vector<Complex> inverse(std::span<const Complex> X) {
    auto x = complex_transform(X, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(X.size());
    for (auto& v : x) v *= scale;
    return x;
}

std::vector<Complex> forward_real(std::span<const double> x, std::size_t length) {
    if (length < x.size()) throw Error(ErrorKind::config, "FFT length shorter than input");
    if (length == 0) return {};
    const std::size_t bins = length / 2 + 1;
    auto in = fftw_buffer<double>(length);
    auto out = fftw_buffer<fftw_complex>(bins);
    std::unique_ptr<Plan> plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = std::make_unique<Plan>(fftw_plan_dft_r2c_1d(static_cast<int>(length), in.get(), out.get(), FFTW_ESTIMATE));
    }
    std::copy(x.begin(), x.end(), in.get());
    std::fill(in.get() + x.size(), in.get() + length, 0.0);
    plan->execute();
    std::vector<Complex> result(bins);
    for (std::size_t i = 0; i < bins; ++i) result[i] = {out[i][0], out[i][1]};
    return result;
}

}  // namespace htpv::fft
