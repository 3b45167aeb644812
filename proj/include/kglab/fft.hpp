#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

namespace kglab::detail {

// Cached in-place FFTW plans, one pair per transform size.  The FFTW planner
// is not thread-safe, so plan creation is serialized; fftw_execute_dft on
// caller-owned buffers is safe to run concurrently.  Plans are created with
// FFTW_UNALIGNED so they apply to any std::vector storage.
class fft_plans {
 public:
  static fft_plans& instance() {
    static fft_plans plans;
    return plans;
  }

  void forward(std::complex<double>* data, int n) { run(n, data, true); }
  void backward(std::complex<double>* data, int n) { run(n, data, false); }

  fft_plans(const fft_plans&) = delete;
  fft_plans& operator=(const fft_plans&) = delete;

 private:
  struct plan_pair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
  };

  fft_plans() = default;
  ~fft_plans() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.fwd);
      fftw_destroy_plan(p.bwd);
    }
  }

  void run(int n, std::complex<double>* data, bool fwd) {
    const plan_pair& p = get(n);
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(fwd ? p.fwd : p.bwd, d, d);
  }

  const plan_pair& get(int n) {
    std::scoped_lock lock(mutex_);
    auto it = plans_.find(n);
    if (it == plans_.end()) {
      std::vector<std::complex<double>> scratch(n);
      auto* s = reinterpret_cast<fftw_complex*>(scratch.data());
      plan_pair p;
      p.fwd = fftw_plan_dft_1d(n, s, s, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
      p.bwd = fftw_plan_dft_1d(n, s, s, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
      it = plans_.emplace(n, p).first;
    }
    return it->second;
  }

  std::map<int, plan_pair> plans_;
  std::mutex mutex_;
};

inline void fft_forward(std::complex<double>* data, int n) { fft_plans::instance().forward(data, n); }
inline void fft_backward(std::complex<double>* data, int n) { fft_plans::instance().backward(data, n); }

}  // namespace kglab::detail
