#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace perspectra {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares `analytic` with central differences of `f` around `x`:
/// max_i |a_i - n_i| / max(1e-8, |a_i| + |n_i|). `x` is restored on return.
inline GradCheckResult grad_check(const std::function<double(std::span<const double>)>& f,
                                  std::vector<double>& x, std::span<const double> analytic, double h = 1e-5) {
  GradCheckResult out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double plus = f(x);
    x[i] = saved - h;
    const double minus = f(x);
    x[i] = saved;
    const double numeric = (plus - minus) / (2.0 * h);
    const double err = std::abs(analytic[i] - numeric) / std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
    if (err > out.max_rel_error) {
      out.max_rel_error = err;
      out.worst_index = i;
      out.worst_analytic = analytic[i];
      out.worst_numeric = numeric;
    }
  }
  return out;
}

}  // namespace perspectra
