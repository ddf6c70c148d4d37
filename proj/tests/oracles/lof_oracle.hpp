#pragma once

// Naive Local Outlier Factor, written directly from the definitions with no
// shared code: full sort per point, explicit neighbour lists.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using Point = std::vector<double>;

inline double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

struct NaiveLof {
  std::vector<Point> pts;
  int k;
  std::vector<double> kdist;
  std::vector<double> lrd;
  std::vector<double> lof;

  NaiveLof(std::vector<Point> points, int k_) : pts(std::move(points)), k(k_) {
    const std::size_t n = pts.size();
    kdist.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> d;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) d.push_back(distance(pts[i], pts[j]));
      }
      std::sort(d.begin(), d.end());
      kdist[i] = d[static_cast<std::size_t>(k) - 1];
    }
    lrd.resize(n);
    for (std::size_t i = 0; i < n; ++i) lrd[i] = density(pts[i], i);
    lof.resize(n);
    for (std::size_t i = 0; i < n; ++i) lof[i] = factor(pts[i], i, lrd[i]);
  }

  // Neighbours of p among training points, excluding index `self`.
  std::vector<std::size_t> neighbours(const Point& p, std::size_t self) const {
    std::vector<double> d;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != self) d.push_back(distance(p, pts[j]));
    }
    std::sort(d.begin(), d.end());
    const double kd = d[static_cast<std::size_t>(k) - 1];
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != self && distance(p, pts[j]) <= kd) out.push_back(j);
    }
    return out;
  }

  double density(const Point& p, std::size_t self) const {
    const auto nb = neighbours(p, self);
    double total = 0.0;
    for (std::size_t j : nb) total += std::max(kdist[j], distance(p, pts[j]));
    double mean = total / static_cast<double>(nb.size());
    if (mean == 0.0) mean = 1e-10;
    return 1.0 / mean;
  }

  double factor(const Point& p, std::size_t self, double lrd_p) const {
    const auto nb = neighbours(p, self);
    double total = 0.0;
    for (std::size_t j : nb) total += lrd[j] / lrd_p;
    return total / static_cast<double>(nb.size());
  }

  double query(const Point& q) const {
    const std::size_t none = pts.size();
    return factor(q, none, density(q, none));
  }
};

}  // namespace oracle
