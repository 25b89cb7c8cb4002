#include "buavc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace buavc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

VectorXd to_dyn(const Vec& v) {
  VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

// Least-squares solve that tolerates rank deficiency.
VectorXd lsq(const MatrixXd& m, const VectorXd& rhs) {
  return m.completeOrthogonalDecomposition().solve(rhs);
}

// One generic active-set pass shared by the projection QP and the
// Chebyshev LP: returns the step direction toward the equality-constrained
// optimum given the working set, then the callers do ratio tests and
// multiplier checks. Kept inline in each solver below for clarity since
// the two objectives differ in shape.

double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

// Order the vertex indices of a 3D face counter-clockwise when viewed
// along the outward normal.
void order_face(const std::vector<Vec>& verts, VPolytope::Face& f) {
  if (f.indices.size() < 3) return;
  Vec n = f.normal;
  // Build an in-plane basis.
  Vec e1(3);
  if (std::abs(n[0]) < 0.9) {
    e1 << 0.0, -n[2], n[1];
  } else {
    e1 << -n[2], 0.0, n[0];
  }
  e1 /= e1.norm();
  Vec e2(3);
  e2 << n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2],
      n[0] * e1[1] - n[1] * e1[0];
  Vec c = Vec::Zero(3);
  for (int idx : f.indices) c += verts[idx];
  c /= double(f.indices.size());
  std::sort(f.indices.begin(), f.indices.end(), [&](int i, int j) {
    const Vec di = verts[i] - c, dj = verts[j] - c;
    return std::atan2(e2.dot(di), e1.dot(di)) < std::atan2(e2.dot(dj), e1.dot(dj));
  });
}

VPolytope dilate2(const VPolytope& v, double r) {
  // Sanitize: drop duplicate and collinear vertices so each remaining
  // corner has a well-defined miter.
  std::vector<Vec> vs;
  for (const Vec& p : v.vertices) {
    if (vs.empty() || (p - vs.back()).norm() > 1e-12) vs.push_back(p);
  }
  while (vs.size() > 1 && (vs.front() - vs.back()).norm() <= 1e-12) vs.pop_back();
  std::vector<Vec> clean;
  const int m = int(vs.size());
  for (int i = 0; i < m; ++i) {
    const Vec& a = vs[(i + m - 1) % m];
    const Vec& b = vs[i];
    const Vec& c = vs[(i + 1) % m];
    if (std::abs(cross2(Vec(b - a), Vec(c - b))) > 1e-12) clean.push_back(b);
  }
  if (clean.size() < 3) {
    throw std::invalid_argument("dilate: polygon needs at least 3 corners");
  }
  const int n = int(clean.size());
  std::vector<Vec> normals(n);
  std::vector<double> offsets(n);
  for (int i = 0; i < n; ++i) {
    Vec t = clean[(i + 1) % n] - clean[i];
    Vec nn(2);
    nn << t[1], -t[0];
    nn /= nn.norm();
    normals[i] = nn;
    offsets[i] = nn.dot(clean[i]) + r;
  }
  VPolytope out;
  for (int i = 0; i < n; ++i) {
    const Vec& n0 = normals[(i + n - 1) % n];
    const Vec& n1 = normals[i];
    double det = cross2(n0, n1);
    double c0 = offsets[(i + n - 1) % n], c1 = offsets[i];
    Vec p(2);
    p << (c0 * n1[1] - c1 * n0[1]) / det, (c1 * n0[0] - c0 * n1[0]) / det;
    out.vertices.push_back(p);
  }
  return out;
}

VPolytope dilate3(const VPolytope& v, double r) {
  if (v.faces.empty()) {
    throw std::invalid_argument("dilate: 3D polytope needs face planes");
  }
  std::vector<Vec> normals;
  std::vector<double> offsets;
  for (const auto& f : v.faces) {
    Vec n = f.normal / f.normal.norm();
    normals.push_back(n);
    offsets.push_back(f.offset / f.normal.norm() + r);
  }
  const int nf = int(normals.size());
  std::vector<Vec> verts;
  for (int i = 0; i < nf; ++i) {
    for (int j = i + 1; j < nf; ++j) {
      for (int k = j + 1; k < nf; ++k) {
        Eigen::Matrix3d a;
        a.row(0) = Eigen::Vector3d(normals[i][0], normals[i][1], normals[i][2]);
        a.row(1) = Eigen::Vector3d(normals[j][0], normals[j][1], normals[j][2]);
        a.row(2) = Eigen::Vector3d(normals[k][0], normals[k][1], normals[k][2]);
        if (std::abs(a.determinant()) < 1e-10) continue;
        Eigen::Vector3d rhs(offsets[i], offsets[j], offsets[k]);
        Eigen::Vector3d x = a.partialPivLu().solve(rhs);
        Vec p(3);
        p << x[0], x[1], x[2];
        bool inside = true;
        for (int f = 0; f < nf && inside; ++f) {
          inside = normals[f].dot(p) <= offsets[f] + 1e-8;
        }
        if (!inside) continue;
        bool dup = false;
        for (const Vec& q : verts) {
          if ((q - p).norm() <= 1e-8) {
            dup = true;
            break;
          }
        }
        if (!dup) verts.push_back(p);
      }
    }
  }
  VPolytope out;
  out.vertices = verts;
  for (int f = 0; f < nf; ++f) {
    VPolytope::Face face;
    face.normal = normals[f];
    face.offset = offsets[f];
    for (int i = 0; i < int(verts.size()); ++i) {
      if (std::abs(normals[f].dot(verts[i]) - offsets[f]) <= 1e-7) {
        face.indices.push_back(i);
      }
    }
    if (face.indices.size() >= 3) {
      order_face(out.vertices, face);
      out.faces.push_back(face);
    }
  }
  return out;
}

}  // namespace

Hyperplane normalize(const Hyperplane& h) {
  double n = h.normal.norm();
  if (n <= 1e-12) throw std::invalid_argument("normalize: zero normal");
  return {Vec(h.normal / n), h.offset / n};
}

bool contains(const HPolytope& p, const Vec& x, double tol) {
  for (const auto& f : p.faces) {
    double scale = f.normal.norm();
    if (f.normal.dot(x) > f.offset + tol * std::max(scale, 1e-300)) return false;
  }
  return true;
}

ChebyshevResult chebyshev_center(const HPolytope& p) {
  const int nf = int(p.faces.size());
  if (nf == 0) return {Vec(), kInf, false};
  const int d = int(p.faces.front().normal.size());
  // Rows of the LP system over z = (c, r): (a_i, 1) . z <= b_i.
  MatrixXd rows(nf, d + 1);
  VectorXd rhs(nf);
  for (int i = 0; i < nf; ++i) {
    Hyperplane h = normalize(p.faces[i]);
    for (int k = 0; k < d; ++k) rows(i, k) = h.normal[k];
    rows(i, d) = 1.0;
    rhs[i] = h.offset;
  }
  VectorXd obj = VectorXd::Zero(d + 1);
  obj[d] = 1.0;  // maximize r

  VectorXd z = VectorXd::Zero(d + 1);
  z[d] = rhs.minCoeff();  // (0, min_i b_i) is always feasible
  std::vector<int> work;

  for (int iter = 0; iter < 1000; ++iter) {
    VectorXd dir;
    if (work.empty()) {
      dir = obj;
    } else {
      MatrixXd aw(int(work.size()), d + 1);
      for (int i = 0; i < int(work.size()); ++i) aw.row(i) = rows.row(work[i]);
      dir = obj - aw.transpose() * lsq(MatrixXd(aw * aw.transpose()), VectorXd(aw * obj));
    }
    if (dir.norm() <= 1e-11) {
      // Stationary: check multipliers of  obj = A_W^T lambda.
      MatrixXd awt(d + 1, int(work.size()));
      for (int i = 0; i < int(work.size()); ++i) awt.col(i) = rows.row(work[i]).transpose();
      VectorXd lam = lsq(awt, obj);
      int drop = -1;
      for (int i = 0; i < int(work.size()); ++i) {
        if (lam[i] < -1e-10 && (drop == -1 || work[i] < work[drop])) drop = i;
      }
      if (drop == -1) {
        Vec c(d);
        for (int k = 0; k < d; ++k) c[k] = z[k];
        return {c, z[d], true};
      }
      work.erase(work.begin() + drop);
      continue;
    }
    // Ratio test toward increasing r; Bland tie-break on the smallest face
    // index among blockers.
    double alpha = kInf;
    int blocker = -1;
    for (int j = 0; j < nf; ++j) {
      if (std::find(work.begin(), work.end(), j) != work.end()) continue;
      double den = rows.row(j).dot(dir);
      if (den <= 1e-14) continue;
      double t = std::max((rhs[j] - rows.row(j).dot(z)) / den, 0.0);
      if (t < alpha - 1e-12 || (t <= alpha + 1e-12 && (blocker == -1 || j < blocker))) {
        alpha = std::min(t, alpha);
        blocker = j;
      }
    }
    if (blocker == -1) {
      Vec c(d);
      for (int k = 0; k < d; ++k) c[k] = z[k];
      return {c, kInf, false};
    }
    z += alpha * dir;
    work.push_back(blocker);
    std::sort(work.begin(), work.end());
  }
  throw std::runtime_error("chebyshev_center: iteration cap exceeded");
}

Vec project_point(const HPolytope& p, const Vec& g) {
  if (p.faces.empty()) return g;
  if (contains(p, g, 1e-12)) return g;
  const int d = int(g.size());
  const int nf = int(p.faces.size());
  MatrixXd rows(nf, d);
  VectorXd rhs(nf);
  for (int i = 0; i < nf; ++i) {
    Hyperplane h = normalize(p.faces[i]);
    for (int k = 0; k < d; ++k) rows(i, k) = h.normal[k];
    rhs[i] = h.offset;
  }
  VectorXd gd = to_dyn(g);

  // Feasible start from the Chebyshev center; fall back to cyclic
  // projections when the polytope is unbounded (no inscribed-ball center).
  VectorXd x;
  ChebyshevResult ch = chebyshev_center(p);
  if (ch.bounded) {
    if (ch.radius < -1e-9) throw InfeasibleRegion("project_point: empty polytope");
    x = to_dyn(ch.center);
  } else {
    x = gd;
    for (int it = 0; it < 2000; ++it) {
      int worst = -1;
      double wv = 1e-12;
      for (int i = 0; i < nf; ++i) {
        double viol = rows.row(i).dot(x) - rhs[i];
        if (viol > wv) {
          wv = viol;
          worst = i;
        }
      }
      if (worst == -1) break;
      x -= wv * rows.row(worst).transpose();
    }
  }

  std::vector<int> work;
  for (int iter = 0; iter < 400; ++iter) {
    VectorXd target;
    VectorXd lam;
    if (work.empty()) {
      target = gd;
    } else {
      MatrixXd aw(int(work.size()), d);
      VectorXd bw(int(work.size()));
      for (int i = 0; i < int(work.size()); ++i) {
        aw.row(i) = rows.row(work[i]);
        bw[i] = rhs[work[i]];
      }
      lam = lsq(MatrixXd(aw * aw.transpose()), VectorXd(aw * gd - bw));
      target = gd - aw.transpose() * lam;
    }
    bool feasible = true;
    for (int j = 0; j < nf && feasible; ++j) {
      feasible = rows.row(j).dot(target) <= rhs[j] + 1e-9;
    }
    if (feasible) {
      int drop = -1;
      for (int i = 0; i < int(work.size()); ++i) {
        if (lam.size() && lam[i] < -1e-10 && (drop == -1 || work[i] < work[drop])) drop = i;
      }
      if (drop == -1) {
        Vec out(d);
        for (int k = 0; k < d; ++k) out[k] = target[k];
        return out;
      }
      work.erase(work.begin() + drop);
      continue;
    }
    VectorXd step = target - x;
    double alpha = 1.0;
    int blocker = -1;
    for (int j = 0; j < nf; ++j) {
      if (std::find(work.begin(), work.end(), j) != work.end()) continue;
      double den = rows.row(j).dot(step);
      if (den <= 1e-14) continue;
      double t = std::max((rhs[j] - rows.row(j).dot(x)) / den, 0.0);
      if (t < alpha - 1e-12 || (t <= alpha + 1e-12 && t < 1.0 && (blocker == -1 || j < blocker))) {
        alpha = std::min(alpha, t);
        blocker = j;
      }
    }
    x += alpha * step;
    if (blocker >= 0) {
      work.push_back(blocker);
      std::sort(work.begin(), work.end());
    } else {
      // Numerically stuck: accept the equality-constrained target.
      Vec out(d);
      for (int k = 0; k < d; ++k) out[k] = target[k];
      return out;
    }
  }
  throw std::runtime_error("project_point: iteration cap exceeded");
}

std::optional<Segment> clip_line(const HPolytope& p, const Vec& origin,
                                 const Vec& dir) {
  double t_lo = 0.0, t_hi = kInf;
  for (const auto& f : p.faces) {
    double den = f.normal.dot(dir);
    double num = f.offset - f.normal.dot(origin);
    if (std::abs(den) <= 1e-15 * std::max(1.0, f.normal.norm())) {
      if (num < -1e-12) return std::nullopt;  // parallel and outside
      continue;
    }
    double t = num / den;
    if (den > 0.0) {
      t_hi = std::min(t_hi, t);
    } else {
      t_lo = std::max(t_lo, t);
    }
  }
  if (t_hi == kInf) throw std::runtime_error("clip_line: polytope unbounded along direction");
  if (t_lo > t_hi + 1e-12) return std::nullopt;
  t_hi = std::max(t_hi, t_lo);
  return Segment{Vec(origin + t_lo * dir), Vec(origin + t_hi * dir)};
}

VPolytope make_box(const Vec& lo, const Vec& hi) {
  const int d = int(lo.size());
  VPolytope v;
  if (d == 2) {
    Vec a(2), b(2), c(2), e(2);
    a << lo[0], lo[1];
    b << hi[0], lo[1];
    c << hi[0], hi[1];
    e << lo[0], hi[1];
    v.vertices = {a, b, c, e};
    return v;
  }
  if (d != 3) throw std::invalid_argument("make_box: dimension must be 2 or 3");
  for (int i = 0; i < 8; ++i) {
    Vec p(3);
    p << (i & 1 ? hi[0] : lo[0]), (i & 2 ? hi[1] : lo[1]), (i & 4 ? hi[2] : lo[2]);
    v.vertices.push_back(p);
  }
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      VPolytope::Face f;
      f.normal = Vec::Zero(3);
      f.normal[axis] = side ? 1.0 : -1.0;
      f.offset = side ? hi[axis] : -lo[axis];
      for (int i = 0; i < 8; ++i) {
        bool high = (i >> axis) & 1;
        if (high == bool(side)) f.indices.push_back(i);
      }
      order_face(v.vertices, f);
      v.faces.push_back(f);
    }
  }
  return v;
}

VPolytope make_polygon(const std::vector<Vec>& points) {
  // Andrew's monotone chain; output CCW without the closing duplicate.
  std::vector<Vec> pts = points;
  std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec& a, const Vec& b) { return (a - b).norm() <= 1e-12; }),
            pts.end());
  if (pts.size() < 3) throw std::invalid_argument("make_polygon: need 3+ distinct points");
  auto build = [&](bool upper) {
    std::vector<Vec> h;
    for (size_t i = 0; i < pts.size(); ++i) {
      const Vec& p = upper ? pts[pts.size() - 1 - i] : pts[i];
      while (h.size() >= 2 &&
             cross2(Vec(h.back() - h[h.size() - 2]), Vec(p - h.back())) <= 1e-12) {
        h.pop_back();
      }
      h.push_back(p);
    }
    h.pop_back();
    return h;
  };
  std::vector<Vec> lower = build(false), upper = build(true);
  VPolytope v;
  v.vertices = lower;
  v.vertices.insert(v.vertices.end(), upper.begin(), upper.end());
  if (v.vertices.size() < 3) throw std::invalid_argument("make_polygon: degenerate hull");
  return v;
}

HPolytope box_faces(const Vec& lo, const Vec& hi) {
  const int d = int(lo.size());
  HPolytope p;
  for (int axis = 0; axis < d; ++axis) {
    Hyperplane plus, minus;
    plus.normal = Vec::Zero(d);
    plus.normal[axis] = 1.0;
    plus.offset = hi[axis];
    minus.normal = Vec::Zero(d);
    minus.normal[axis] = -1.0;
    minus.offset = -lo[axis];
    p.faces.push_back(plus);
    p.faces.push_back(minus);
  }
  return p;
}

VPolytope transform(const VPolytope& v, const Mat& w) {
  if (w.determinant() <= 0.0) {
    throw std::invalid_argument("transform: map must preserve orientation");
  }
  VPolytope out;
  for (const Vec& p : v.vertices) out.vertices.push_back(Vec(w * p));
  for (const auto& f : v.faces) {
    VPolytope::Face nf;
    nf.indices = f.indices;
    // Plane n.x = c maps to (w^-T n) . y = c; renormalize and re-anchor.
    Vec n = w.transpose().partialPivLu().solve(f.normal);
    n /= n.norm();
    nf.normal = n;
    nf.offset = n.dot(out.vertices[f.indices.front()]);
    out.faces.push_back(nf);
  }
  return out;
}

VPolytope dilate(const VPolytope& v, double r) {
  if (r < 0.0) throw std::invalid_argument("dilate: radius must be nonnegative");
  if (r == 0.0) return v;
  return v.dim() == 2 ? dilate2(v, r) : dilate3(v, r);
}

Vec closest_point(const VPolytope& v, const Vec& p) {
  const int k = int(v.vertices.size());
  if (k == 0) throw std::invalid_argument("closest_point: empty polytope");
  if (k == 1) return v.vertices.front();
  const int d = int(p.size());
  MatrixXd dmat(d, k);
  for (int j = 0; j < k; ++j) dmat.col(j) = to_dyn(Vec(v.vertices[j] - p));
  // Work at unit scale: callers pass whitened geometry whose coordinates can
  // be huge, and the KKT border of ones below would otherwise be truncated as
  // numerical noise next to the Gram block. The weights are scale-free.
  double sc2 = 0.0;
  for (int j = 0; j < k; ++j) sc2 = std::max(sc2, dmat.col(j).squaredNorm());
  if (sc2 > 0.0) dmat /= std::sqrt(sc2);
  MatrixXd gram = dmat.transpose() * dmat;

  // Wolfe min-norm-point over the simplex of vertex weights: keep a support
  // whose equality-constrained optimum is strictly positive, and grow it by
  // the steepest vertex until none improves. Finite and exact, unlike a
  // fixed-step projected gradient, whose iterates stall at a rounding floor
  // well above the support-detection threshold.
  auto affine_opt = [&](const std::vector<int>& sup) {
    const int m = int(sup.size());
    MatrixXd kkt = MatrixXd::Zero(m + 1, m + 1);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) kkt(i, j) = 2.0 * gram(sup[i], sup[j]);
      kkt(i, m) = 1.0;
      kkt(m, i) = 1.0;
    }
    VectorXd rhs = VectorXd::Zero(m + 1);
    rhs[m] = 1.0;
    return VectorXd(lsq(kkt, rhs).head(m));
  };

  VectorXd w = VectorXd::Zero(k);
  int j0 = 0;
  for (int j = 1; j < k; ++j) {
    if (gram(j, j) < gram(j0, j0)) j0 = j;
  }
  w[j0] = 1.0;
  std::vector<int> sup = {j0};

  for (int outer = 0; outer < 2 * k + 8; ++outer) {
    VectorXd grad = gram * w;
    const double fval = w.dot(grad);
    int jbest = -1;
    double gbest = fval - 1e-12 * std::max(1.0, fval);
    for (int j = 0; j < k; ++j) {
      if (grad[j] < gbest) {
        gbest = grad[j];
        jbest = j;
      }
    }
    if (jbest < 0) break;
    if (std::find(sup.begin(), sup.end(), jbest) == sup.end()) {
      sup.push_back(jbest);
    }

    for (int inner = 0; inner <= k; ++inner) {
      VectorXd sol = affine_opt(sup);
      double lo = 1e300;
      for (int i = 0; i < int(sup.size()); ++i) lo = std::min(lo, sol[i]);
      if (lo > 1e-12) {
        w.setZero();
        for (int i = 0; i < int(sup.size()); ++i) w[sup[i]] = sol[i];
        break;
      }
      // Step from w toward the affine optimum until the first weight hits
      // zero, then shed the vanished vertices and re-solve.
      double t = 1.0;
      for (int i = 0; i < int(sup.size()); ++i) {
        if (sol[i] <= 1e-12) {
          const double wi = w[sup[i]];
          if (wi - sol[i] > 1e-300) t = std::min(t, wi / (wi - sol[i]));
        }
      }
      std::vector<int> kept;
      for (int i = 0; i < int(sup.size()); ++i) {
        const double nw = (1.0 - t) * w[sup[i]] + t * sol[i];
        w[sup[i]] = nw;
        if (nw > 1e-12) {
          kept.push_back(sup[i]);
        } else {
          w[sup[i]] = 0.0;
        }
      }
      if (kept.empty()) kept.push_back(sup.front());
      if (int(kept.size()) == int(sup.size())) {
        sup = kept;
        break;
      }
      sup = kept;
    }
  }

  Vec out = p;
  for (int j = 0; j < k; ++j) out += w[j] * (v.vertices[j] - p);
  return out;
}

double distance(const VPolytope& v, const Vec& p) {
  return (closest_point(v, p) - p).norm();
}

bool vcontains(const VPolytope& v, const Vec& x, double tol) {
  if (v.dim() == 2) {
    const int n = int(v.vertices.size());
    for (int i = 0; i < n; ++i) {
      Vec e = v.vertices[(i + 1) % n] - v.vertices[i];
      if (cross2(e, Vec(x - v.vertices[i])) < -tol * e.norm()) return false;
    }
    return true;
  }
  for (const auto& f : v.faces) {
    if (f.normal.dot(x) > f.offset + tol * f.normal.norm()) return false;
  }
  return true;
}

Hyperplane max_margin_separator(const Vec& p, const VPolytope& v) {
  Vec q = closest_point(v, p);
  double dist = (q - p).norm();
  if (dist <= 1e-9) {
    throw PointInsidePolytope("max_margin_separator: point touches the polytope");
  }
  Vec a = (q - p) / dist;
  double b = kInf;
  for (const Vec& vert : v.vertices) b = std::min(b, a.dot(vert));
  return {a, b};
}

}  // namespace buavc
