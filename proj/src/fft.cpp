#include "bohmkit/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "bohmkit/error.hpp"

namespace bohmkit {

struct Fft::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  ~Plans();
};

namespace {
// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft::Plans::~Plans() {
  std::lock_guard lock(planner_mutex());
  if (fwd) fftw_destroy_plan(fwd);
  if (bwd) fftw_destroy_plan(bwd);
}

Fft::Fft(std::size_t n0, std::size_t n1) : n0_(n0), n1_(n1) {
  detail::require(n0 >= 1 && n1 >= 1, "FFT shape must be positive");
  static std::mutex cache_mutex;
  static std::map<std::pair<std::size_t, std::size_t>, std::weak_ptr<const Plans>> cache;
  std::lock_guard cache_lock(cache_mutex);
  auto& slot = cache[{n0, n1}];
  if (auto existing = slot.lock()) {
    plans_ = std::move(existing);
    return;
  }
  auto p = std::make_shared<Plans>();
  {
    std::lock_guard lock(planner_mutex());
    std::vector<std::complex<double>> scratch(n0 * n1);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (n1 == 1) {
      p->fwd = fftw_plan_dft_1d(int(n0), buf, buf, FFTW_FORWARD, flags);
      p->bwd = fftw_plan_dft_1d(int(n0), buf, buf, FFTW_BACKWARD, flags);
    } else {
      p->fwd = fftw_plan_dft_2d(int(n0), int(n1), buf, buf, FFTW_FORWARD, flags);
      p->bwd = fftw_plan_dft_2d(int(n0), int(n1), buf, buf, FFTW_BACKWARD, flags);
    }
  }
  if (!p->fwd || !p->bwd) throw Error("FFTW failed to create a plan");
  slot = p;
  plans_ = std::move(p);
}

void Fft::forward(std::span<std::complex<double>> data) const {
  detail::require(data.size() == size(), "FFT buffer size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->fwd, buf, buf);
}

void Fft::backward(std::span<std::complex<double>> data) const {
  detail::require(data.size() == size(), "FFT buffer size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->bwd, buf, buf);
}

}  // namespace bohmkit
