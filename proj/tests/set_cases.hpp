#pragma once

// Every built-in projector paired with an input sampler and an independent
// feasible-point sampler.

#include "altproj/frames.hpp"
#include "altproj/projections.hpp"
#include "oracles.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cases {

using altproj::Matrix;
using altproj::Projector;
using altproj::Vector;

struct SetCase {
  std::string name;
  Projector proj;
  bool convex = false;
  std::function<Matrix(oracle::Rng&)> input;
  /// Feasible point near `near`, spread `scale`.
  std::function<Matrix(oracle::Rng&, const Matrix& near, double scale)> feasible;
};

inline std::vector<SetCase> all_sets(std::uint64_t seed = 42) {
  oracle::Rng rng(seed);
  std::vector<SetCase> out;

  {
    Matrix lo = oracle::gaussian(4, 3, rng);
    Matrix hi = lo + oracle::gaussian(4, 3, rng).cwiseAbs();
    out.push_back({"box", altproj::box_set(lo, hi), true,
                   [](oracle::Rng& r) { return oracle::gaussian(4, 3, r, 2.0); },
                   [lo, hi](oracle::Rng& r, const Matrix& near, double s) {
                     return oracle::clamp(near + oracle::gaussian(4, 3, r, s), lo, hi);
                   }});
  }
  {
    Matrix normal = oracle::gaussian(3, 2, rng);
    const double offset = 0.3;
    out.push_back({"halfspace", altproj::halfspace_set(normal, offset), true,
                   [](oracle::Rng& r) { return oracle::gaussian(3, 2, r, 2.0); },
                   [normal, offset](oracle::Rng& r, const Matrix& near, double s) {
                     return oracle::halfspace_point(near, normal, offset, r, s);
                   }});
  }
  {
    Matrix basis = oracle::gaussian(6, 3, rng);
    Matrix point = oracle::gaussian(6, 1, rng);
    out.push_back({"affine", altproj::affine_set(basis, point), true,
                   [](oracle::Rng& r) { return oracle::gaussian(6, 1, r, 2.0); },
                   [basis, point](oracle::Rng& r, const Matrix& near, double s) {
                     return oracle::affine_point(near, basis, point, r, s);
                   }});
  }
  {
    const double angle = 0.7;
    out.push_back({"line", altproj::line_set(angle), true,
                   [](oracle::Rng& r) { return oracle::gaussian(2, 1, r, 2.0); },
                   [angle](oracle::Rng& r, const Matrix& near, double s) {
                     const double t = std::cos(angle) * near(0) + std::sin(angle) * near(1) +
                                      oracle::uniform(r, -s, s);
                     Matrix w(2, 1);
                     w << t * std::cos(angle), t * std::sin(angle);
                     return w;
                   }});
  }
  {
    const Matrix rot = oracle::random_orthogonal(10, rng);
    Vector lo = -oracle::gaussian(10, 1, rng).cwiseAbs() - Vector::Constant(10, 0.1);
    Vector hi = oracle::gaussian(10, 1, rng).cwiseAbs() + Vector::Constant(10, 0.1);
    out.push_back({"oriented-box", altproj::oriented_box_set(rot, lo, hi), true,
                   [](oracle::Rng& r) { return oracle::gaussian(10, 1, r, 2.0); },
                   [rot, lo, hi](oracle::Rng& r, const Matrix& near, double s) {
                     const Matrix u = rot.transpose() * near + oracle::gaussian(10, 1, r, s);
                     return Matrix(rot * oracle::clamp(u, lo, hi));
                   }});
  }
  {
    std::vector<double> c(5);
    for (double& v : c) v = oracle::uniform(rng, 0.5, 3.0);
    out.push_back({"column-norms", altproj::column_norm_set(3, altproj::ColumnNormTargets(c)),
                   false, [](oracle::Rng& r) { return oracle::gaussian(3, 5, r); },
                   [c](oracle::Rng& r, const Matrix& near, double s) {
                     return oracle::column_norm_point(near, c, r, s);
                   }});
  }
  {
    const double a = 5.0 / 3.0;
    out.push_back({"tight-frame", altproj::tight_frame_set(3, 5, a), false,
                   [](oracle::Rng& r) { return oracle::gaussian(3, 5, r); },
                   [a](oracle::Rng& r, const Matrix& near, double s) {
                     return oracle::tight_frame_point(near, a, r, s);
                   }});
  }
  {
    out.push_back({"gram-tight", altproj::gram_tight_set(6, 3, 2.0), false,
                   [](oracle::Rng& r) { return oracle::symmetric(6, r); },
                   [](oracle::Rng& r, const Matrix& near, double s) {
                     return oracle::gram_tight_point(near, 3, 2.0, r, s);
                   }});
  }
  {
    const double xi = altproj::welch_bound(3, 6);
    out.push_back({"gram-coherence", altproj::gram_coherence_set(6, xi), true,
                   [](oracle::Rng& r) { return oracle::symmetric(6, r); },
                   [xi](oracle::Rng& r, const Matrix& near, double s) {
                     return oracle::gram_coherence_point(near, xi, r, s);
                   }});
  }
  return out;
}

}  // namespace cases
