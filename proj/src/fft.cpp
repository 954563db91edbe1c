#include "sdoa/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace sdoa {

namespace {

// FFTW planning is not thread-safe; plans are created once per (length, direction) under a lock
// and executed through the new-array interface, which is.
class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

    fftw_plan get(int n, bool inverse)
    {
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(n, inverse);
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;
        auto* buf = fftw_alloc_complex(static_cast<std::size_t>(n));
        fftw_plan p = fftw_plan_dft_1d(n, buf, buf, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, bool>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache c;
    return c;
}

} // namespace

void fft_inplace(std::span<std::complex<double>> data, bool inverse)
{
    if (data.size() <= 1)
        return;
    const int n = static_cast<int>(data.size());
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(cache().get(n, inverse), p, p);
}

} // namespace sdoa
