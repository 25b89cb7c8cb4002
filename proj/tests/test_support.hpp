#pragma once

// Shared helpers for randomized test instances.

#include <vector>

#include "buavc/geometry.hpp"
#include "buavc/mathkit.hpp"

namespace testsupport {

inline buavc::Vec vec2(double x, double y) {
  buavc::Vec v(2);
  v << x, y;
  return v;
}

inline buavc::Vec vec3(double x, double y, double z) {
  buavc::Vec v(3);
  v << x, y, z;
  return v;
}

inline buavc::Vec random_unit(int d, buavc::Rng& rng) {
  buavc::Vec v(d);
  double n = 0.0;
  do {
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
    n = v.norm();
  } while (n < 1e-6);
  return buavc::Vec(v / n);
}

// Random SPD covariance with eigenvalues in [lo, hi].
inline buavc::Mat random_spd(int d, buavc::Rng& rng, double lo = 0.01,
                             double hi = 1.0) {
  buavc::Mat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(a),
                                        Eigen::ComputeFullU);
  Eigen::MatrixXd u = svd.matrixU();
  Eigen::VectorXd ev(d);
  for (int i = 0; i < d; ++i) ev[i] = rng.uniform(lo, hi);
  Eigen::MatrixXd s = u * ev.asDiagonal() * u.transpose();
  buavc::Mat out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(i, j) = 0.5 * (s(i, j) + s(j, i));
  return out;
}

// Random bounded polytope around the origin: k halfspaces with random unit
// normals at offsets in [0.3, 1.5], plus a bounding box.
inline buavc::HPolytope random_hpolytope(int d, int k, buavc::Rng& rng) {
  buavc::HPolytope p;
  for (int i = 0; i < k; ++i) {
    p.faces.push_back({random_unit(d, rng), rng.uniform(0.3, 1.5)});
  }
  buavc::Vec lo = buavc::Vec::Constant(d, -2.0), hi = buavc::Vec::Constant(d, 2.0);
  buavc::HPolytope box = buavc::box_faces(lo, hi);
  p.faces.insert(p.faces.end(), box.faces.begin(), box.faces.end());
  return p;
}

// Random convex polygon: hull of points drawn in a disk around a center.
inline buavc::VPolytope random_polygon(buavc::Rng& rng, const buavc::Vec& center,
                                       double scale, int npts = 8) {
  std::vector<buavc::Vec> pts;
  for (int i = 0; i < npts; ++i) {
    pts.push_back(buavc::Vec(center + scale * buavc::Vec(random_unit(2, rng)) *
                                          rng.uniform(0.4, 1.0)));
  }
  return buavc::make_polygon(pts);
}

// Uniform point inside a convex polytope via rejection from its bbox.
inline buavc::Vec sample_inside(const buavc::VPolytope& v, buavc::Rng& rng) {
  const int d = v.dim();
  buavc::Vec lo = v.vertices.front(), hi = v.vertices.front();
  for (const auto& p : v.vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  for (int it = 0; it < 10000; ++it) {
    buavc::Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.uniform(lo[i], hi[i]);
    if (buavc::vcontains(v, x, 1e-12)) return x;
  }
  return buavc::Vec(0.5 * (lo + hi));
}

// Same for an H-polytope known to sit inside [-2, 2]^d (the shape
// random_hpolytope produces); falls back to the Chebyshev center.
inline buavc::Vec sample_inside(const buavc::HPolytope& p, buavc::Rng& rng) {
  const int d = int(p.faces.front().normal.size());
  for (int it = 0; it < 10000; ++it) {
    buavc::Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.uniform(-2.0, 2.0);
    if (buavc::contains(p, x, 0.0)) return x;
  }
  return buavc::chebyshev_center(p).center;
}

}  // namespace testsupport
