// Discrete Minkowski problem: find a polytope with prescribed facet normals
// u_j and facet areas a_j. We minimize the convex function
//
//   J(h) = sum_j a_j h_j - log vol(P(h)),   P(h) = {x : x . u_j <= h_j},
//
// whose critical points satisfy A_j(h) = a_j vol / 1, then rescale so the
// areas match. dvol/dh_j = A_j(h); the second derivatives come from the
// edge lengths of the facet polygons.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "finsler/convex_body.hpp"
#include "finsler/error.hpp"

namespace finsler {

namespace {

struct Evaluation {
  bool valid = false;
  double volume = 0.0;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<HalfspaceCell> cells;
};

Evaluation evaluate(std::span<const Vec3> normals, std::span<const double> targets,
                    const Eigen::VectorXd& h) {
  Evaluation e;
  std::vector<double> offsets(h.data(), h.data() + h.size());
  try {
    e.cells = clip_halfspaces(3, normals, offsets);
  } catch (const InputError&) {
    return e;
  }
  CompensatedSum vol;
  CompensatedSum lin;
  for (std::size_t j = 0; j < e.cells.size(); ++j) {
    vol.add(e.cells[j].area * h[static_cast<Eigen::Index>(j)]);
    lin.add(targets[j] * h[static_cast<Eigen::Index>(j)]);
  }
  e.volume = vol.value() / 3.0;
  if (!(e.volume > 0.0)) return e;
  e.valid = true;
  e.objective = lin.value() - std::log(e.volume);
  return e;
}

double max_relative_error(const Evaluation& e, std::span<const double> targets) {
  double total_area = 0.0;
  double total_target = 0.0;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    total_area += e.cells[j].area;
    total_target += targets[j];
  }
  const double s2 = total_target / total_area;
  double worst = 0.0;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    if (targets[j] <= 0.0) continue;
    worst = std::max(worst, std::abs(s2 * e.cells[j].area - targets[j]) / targets[j]);
  }
  return worst;
}

}  // namespace

MinkowskiSolution solve_minkowski_problem(std::span<const Vec3> normals,
                                          std::span<const double> areas,
                                          const MinkowskiOptions& options) {
  const std::size_t n = normals.size();
  if (areas.size() != n) throw InputError("solve_minkowski_problem: size mismatch");
  if (n < 4) throw InputError("solve_minkowski_problem: need at least four normals");

  std::vector<Vec3> u(n);
  double total = 0.0;
  Vec3 closure = Vec3::Zero();
  Eigen::Matrix3d spread = Eigen::Matrix3d::Zero();
  for (std::size_t j = 0; j < n; ++j) {
    u[j] = normals[j].normalized();
    if (!(areas[j] >= 0.0)) throw InputError("solve_minkowski_problem: negative area");
    total += areas[j];
    closure += areas[j] * u[j];
    spread += areas[j] * u[j] * u[j].transpose();
  }
  if (closure.norm() > 1e-8 * total) {
    throw InputError("solve_minkowski_problem: measure is not closed (|sum a u| = " +
                     std::to_string(closure.norm()) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(spread);
  if (eig.eigenvalues().minCoeff() < 1e-10 * total) {
    throw InputError("solve_minkowski_problem: degenerate measure (normals coplanar)");
  }
  // Normalize so the objective is O(1).
  std::vector<double> a(n);
  for (std::size_t j = 0; j < n; ++j) a[j] = areas[j] / total;

  Eigen::VectorXd h = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  Evaluation cur = evaluate(u, a, h);
  if (!cur.valid) throw InputError("solve_minkowski_problem: initial polytope is degenerate");

  MinkowskiSolution sol;
  const auto N = static_cast<Eigen::Index>(n);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const double err = max_relative_error(cur, a);
    sol.residual_history.push_back(err);
    sol.iterations = iter;
    if (err < options.rel_tol) break;

    // Re-activate facets that the current polytope misses by cutting it
    // slightly below its support in that direction.
    bool reactivated = false;
    double hmean = h.cwiseAbs().mean();
    for (std::size_t j = 0; j < n; ++j) {
      if (a[j] > 0.0 && cur.cells[j].area <= 0.0) {
        double support = -std::numeric_limits<double>::infinity();
        for (const auto& c : cur.cells) {
          for (const auto& p : c.polygon) support = std::max(support, p.dot(u[j]));
        }
        h[static_cast<Eigen::Index>(j)] = support - 1e-3 * hmean;
        reactivated = true;
      }
    }
    if (reactivated) {
      cur = evaluate(u, a, h);
      if (!cur.valid) throw ConvergenceError("Minkowski solver: lost the polytope", sol.residual_history);
      continue;
    }

    const double V = cur.volume;
    Eigen::VectorXd grad(N);
    Eigen::VectorXd A(N);
    for (std::size_t j = 0; j < n; ++j) {
      A[static_cast<Eigen::Index>(j)] = cur.cells[j].area;
      grad[static_cast<Eigen::Index>(j)] = a[j] - cur.cells[j].area / V;
    }
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& cell = cur.cells[i];
      const std::size_t m = cell.polygon.size();
      for (std::size_t k = 0; k < m; ++k) {
        const int j = cell.edge_planes[k];
        if (j < 0 || static_cast<std::size_t>(j) == i) continue;
        const double len = (cell.polygon[(k + 1) % m] - cell.polygon[k]).norm();
        const double c = u[i].dot(u[static_cast<std::size_t>(j)]);
        const double s = std::sqrt(std::max(1e-300, 1.0 - c * c));
        M(static_cast<Eigen::Index>(i), j) += len / s;
        M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) -= len * c / s;
      }
    }
    M = 0.5 * (M + M.transpose());
    Eigen::MatrixXd H = A * A.transpose() / (V * V) - M / V;
    const double mu = 1e-10 * std::max(1e-300, H.diagonal().cwiseAbs().maxCoeff());
    H.diagonal().array() += mu;
    Eigen::VectorXd step = H.ldlt().solve(-grad);
    double slope = grad.dot(step);
    if (!step.allFinite() || slope >= 0.0) {
      step = -grad * (hmean / std::max(1e-300, grad.cwiseAbs().maxCoeff()));
      slope = grad.dot(step);
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd trial = h + alpha * step;
      Evaluation next = evaluate(u, a, trial);
      if (next.valid && next.objective <= cur.objective + 1e-4 * alpha * slope) {
        h = std::move(trial);
        cur = std::move(next);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // Round-off floor: accept if already close, otherwise report.
      if (err < 10.0 * options.rel_tol) break;
      throw ConvergenceError("Minkowski solver: line search failed at residual " +
                                 std::to_string(err),
                             sol.residual_history);
    }
  }
  sol.max_rel_error = max_relative_error(cur, a);
  if (sol.max_rel_error >= options.rel_tol) {
    throw ConvergenceError("Minkowski solver: no convergence after " +
                               std::to_string(sol.iterations) + " iterations (residual " +
                               std::to_string(sol.max_rel_error) + ")",
                           sol.residual_history);
  }
  double total_area = 0.0;
  for (const auto& c : cur.cells) total_area += c.area;
  const double scale = std::sqrt(total / total_area);
  std::vector<double> offsets(n);
  for (std::size_t j = 0; j < n; ++j) offsets[j] = scale * h[static_cast<Eigen::Index>(j)];
  Polytope poly = Polytope::from_halfspaces(3, u, offsets);
  const Vec3 steiner = steiner_point(ConvexBody::from_polytope(poly));
  sol.polytope = poly.translated(-steiner);
  return sol;
}

}  // namespace finsler
