#include "kolmonet/common.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kolmo {

unsigned thread_count() {
  if (const char* env = std::getenv("KOLMO_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw >= 1 ? hw : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  unsigned workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  // Fixed chunk size independent of the worker count, so the index->chunk map
  // (and therefore every per-index result) never depends on parallelism.
  const std::size_t chunk = 64;
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto body = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= n_chunks || failed.load()) return;
      std::size_t lo = c * chunk;
      std::size_t hi = std::min(n, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(error_mu);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit out;
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw ShapeError("fit_line: need >= 2 paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw ShapeError("fit_line: degenerate fit, zero x variance");
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - (out.intercept + out.slope * x[i]);
    ss_res += r * r;
  }
  out.r2 = syy == 0 ? 1.0 : 1.0 - ss_res / syy;
  if (n >= 3) {
    double var = ss_res / static_cast<double>(n - 2);
    out.slope_se = std::sqrt(var / sxx);
  }
  return out;
}

void append_double(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

}  // namespace kolmo
