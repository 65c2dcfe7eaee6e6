#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kolmo {

// Shape/domain violations on networks, matrices or configs.
class ShapeError : public std::runtime_error {
public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// NaN/Inf encountered while evaluating or simulating.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// calibrate() ran out of budget; carries the best constants found.
class CalibrationError : public std::runtime_error {
public:
  CalibrationError(const std::string& what, long best_m, double best_delta,
                   double best_error)
      : std::runtime_error(what), best_M(best_m), best_delta(best_delta),
        best_error(best_error) {}
  long best_M;
  double best_delta;
  double best_error;
};

// Thread cap: KOLMO_THREADS if set, else hardware concurrency (>=1).
unsigned thread_count();

// Runs fn(i) for i in [0, n). Work is split into fixed-size chunks so results
// depend only on the index, never on the thread count. fn must write results
// into per-index slots owned by the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double slope_se = 0;
  double r2 = 0;
};

// Ordinary least squares of y on x. Requires >= 3 points for slope_se.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);
void append_double(std::string& out, double v);

}  // namespace kolmo
