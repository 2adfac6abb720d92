// Test-only least-squares oracle, deliberately implemented on a different
// route than the production fit: raw normal equations solved by Cramer's rule
// in long double, no centering. Nothing here touches careloop internals.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

inline Line normal_equations_fit(const std::vector<std::pair<std::int64_t, double>>& points) {
  long double n = 0.0L;
  long double st = 0.0L;
  long double sv = 0.0L;
  long double stt = 0.0L;
  long double stv = 0.0L;
  for (const auto& [t, v] : points) {
    const long double tl = static_cast<long double>(t);
    const long double vl = static_cast<long double>(v);
    n += 1.0L;
    st += tl;
    sv += vl;
    stt += tl * tl;
    stv += tl * vl;
  }
  // | n   st  | |a|   |sv |
  // | st  stt | |b| = |stv|
  const long double det = n * stt - st * st;
  Line line;
  line.intercept = static_cast<double>((sv * stt - st * stv) / det);
  line.slope = static_cast<double>((n * stv - st * sv) / det);
  return line;
}

inline double forecast(const Line& line, std::int64_t t) {
  return static_cast<double>(static_cast<long double>(line.intercept) +
                             static_cast<long double>(line.slope) *
                                 static_cast<long double>(t));
}

inline bool close(double a, double b, double rel) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-30});
  return std::abs(a - b) <= rel * scale;
}

}  // namespace oracle
