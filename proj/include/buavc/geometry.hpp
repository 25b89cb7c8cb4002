#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "buavc/mathkit.hpp"

namespace buavc {

struct InfeasibleRegion : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PointInsidePolytope : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Closed halfspace normal . x <= offset.
struct Hyperplane {
  Vec normal;
  double offset = 0.0;
};

/// Rescale so the normal has unit length. Throws for a near-zero normal.
Hyperplane normalize(const Hyperplane& h);

/// Intersection of halfspaces. Faces need not be normalized unless an
/// operation says otherwise.
struct HPolytope {
  std::vector<Hyperplane> faces;
};

bool contains(const HPolytope& p, const Vec& x, double tol = 1e-9);

/// Euclidean projection of g onto the polytope, computed by a dense primal
/// active-set method (dimension <= 3, Bland's rule for anti-cycling).
/// Throws InfeasibleRegion when the face system is empty.
Vec project_point(const HPolytope& p, const Vec& g);

struct ChebyshevResult {
  Vec center;
  double radius = 0.0;  // negative when the polytope has empty interior
  bool bounded = true;  // false: radius unbounded above (+inf sentinel)
};

/// Largest inscribed ball, solved as the LP  max r  s.t.  a.c + r <= b
/// over normalized faces with the same dense active-set machinery.
/// Always feasible (r may be negative); an empty face list or an unbounded
/// polytope yields bounded = false with radius = +inf.
ChebyshevResult chebyshev_center(const HPolytope& p);

struct Segment {
  Vec a;
  Vec b;
};

/// Clip the ray origin + t * dir, t >= 0, against the polytope. Returns
/// nullopt when the intersection is empty. Throws when the polytope is
/// unbounded along dir (cells are always workspace-bounded).
std::optional<Segment> clip_line(const HPolytope& p, const Vec& origin,
                                 const Vec& dir);

/// Convex polytope in vertex form. 2D: vertices are the boundary in
/// counter-clockwise order. 3D: faces carry outward normals and the
/// indices of their vertices.
struct VPolytope {
  struct Face {
    Vec normal;            // unit outward
    double offset = 0.0;   // normal . x = offset on the face plane
    std::vector<int> indices;
  };
  std::vector<Vec> vertices;
  std::vector<Face> faces;  // populated for 3D

  int dim() const { return vertices.empty() ? 0 : int(vertices.front().size()); }
};

/// Axis-aligned box as a VPolytope (CCW rectangle in 2D, 8 vertices and
/// 6 faces in 3D).
VPolytope make_box(const Vec& lo, const Vec& hi);

/// Convex polygon from an unordered 2D point set: convex hull, CCW order.
VPolytope make_polygon(const std::vector<Vec>& points);

/// Workspace box as halfspaces with unit axis normals.
HPolytope box_faces(const Vec& lo, const Vec& hi);

/// Apply the linear map x -> w x to all vertices (and face planes in 3D).
/// Requires det(w) > 0 so boundary orientation is preserved.
VPolytope transform(const VPolytope& v, const Mat& w);

/// Conservative dilation by radius r: every face plane is pushed out by r
/// along its outward normal and the planes are re-intersected. The result
/// contains the Minkowski sum of the input with a ball of radius r
/// (corners become miters instead of arcs). r = 0 returns the input.
VPolytope dilate(const VPolytope& v, double r);

/// Closest point of the polytope to p: the simplex-constrained least
/// squares over vertex weights, solved by projected gradient with exact
/// line search and an active-support polish.
Vec closest_point(const VPolytope& v, const Vec& p);

double distance(const VPolytope& v, const Vec& p);

/// Point membership test working directly on the vertex form (2D edge
/// orientation test; 3D face-plane test).
bool vcontains(const VPolytope& v, const Vec& x, double tol = 1e-9);

/// Maximum-margin separating hyperplane between a point and a polytope,
/// shifted to touch the polytope: unit normal a with a.p < b and
/// a.x >= b for every polytope point, b = min_k a.vertex_k.
/// Throws PointInsidePolytope when p is within 1e-9 of the polytope.
Hyperplane max_margin_separator(const Vec& p, const VPolytope& v);

}  // namespace buavc
