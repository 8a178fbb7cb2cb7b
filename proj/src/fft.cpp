#include "afcmem/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace afcmem::fft {

namespace {

// The FFTW planner is not re-entrant; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Plan {
 public:
  Plan(cvec& data, int direction) {
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(data.size()), ptr, ptr, direction,
                             FFTW_ESTIMATE);
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

}  // namespace

void transform(cvec& data, Sign sign) {
  if (data.size() < 2) return;
  Plan plan(data, sign == Sign::negative ? FFTW_FORWARD : FFTW_BACKWARD);
  plan.execute();
}

void inverse(cvec& data) {
  transform(data, Sign::positive);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double bin_frequency(std::size_t k, std::size_t n, double dt) {
  const double df = 1.0 / (static_cast<double>(n) * dt);
  const auto signed_k = k <= n / 2 ? static_cast<double>(k)
                                   : static_cast<double>(k) - static_cast<double>(n);
  return signed_k * df;
}

}  // namespace afcmem::fft
