#pragma once

// 4th-order first-derivative stencils on uniform 1D samples, with either
// one-sided closures at the ends or periodic wrap.

#include <cstddef>

namespace evb::detail {

// f: callable index -> value (double or complex). Returns df/dx at node i of
// n samples with spacing h. Periodic axes always use the central stencil.
template <class F>
auto deriv4(F&& f, int n, int i, double h, bool periodic) {
  using V = decltype(f(0));
  const auto at = [&](int j) -> V {
    if (periodic) {
      j %= n;
      if (j < 0) j += n;
    }
    return f(j);
  };
  if (periodic || (i >= 2 && i <= n - 3)) {
    return (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h);
  }
  if (i == 0)
    return (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) /
           (12.0 * h);
  if (i == 1)
    return (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) / (12.0 * h);
  if (i == n - 2)
    return (3.0 * at(n - 1) + 10.0 * at(n - 2) - 18.0 * at(n - 3) + 6.0 * at(n - 4) -
            at(n - 5)) /
           (12.0 * h);
  // i == n - 1
  return (25.0 * at(n - 1) - 48.0 * at(n - 2) + 36.0 * at(n - 3) - 16.0 * at(n - 4) +
          3.0 * at(n - 5)) /
         (12.0 * h);
}

}  // namespace evb::detail
