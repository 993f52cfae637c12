#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mfg/fespace.hpp"
#include "mfg/mesh.hpp"

namespace mfg {

/// Control-set Hamiltonian H(x, p) = sup_a (b(x,a).p - f(x,a)) together with its
/// p-derivative and the constants the analysis refers to.
struct Hamiltonian {
  std::string name;
  std::function<double(const Vec2& x, const Vec2& p)> value;
  std::function<Vec2(const Vec2& x, const Vec2& p)> grad_p;
  double L_H = 0.0;   ///< Lipschitz constant in p; bound on |grad_p|
  double C_H = 0.0;   ///< growth constant, |H| <= C_H (|p| + 1)
  double L_Hp = 0.0;  ///< Lipschitz constant of grad_p in p
  bool smooth = true;
  bool x_independent = true;
};

/// H(p) = |p|^2/2 for |p| <= R, R|p| - R^2/2 otherwise (controls in the disk of radius R
/// with quadratic cost).
Hamiltonian huber_ball(double R);

/// Finitely many controls with drifts b_a and costs f_a. smoothing = 0 gives the plain
/// max (lowest index wins ties, not differentiable); smoothing > 0 uses log-sum-exp.
Hamiltonian finite_control(std::vector<Vec2> drifts, std::vector<double> costs, double smoothing);

/// Max relative discrepancy between grad_p and central differences (step 1e-6) over
/// random samples x in [0,1]^2, p in [-3 L, 3 L]^2 with L = max(L_H, 1). The
/// discrepancy is |fd - g| / max(|g|, 1).
double check_gradient(const Hamiltonian& h, int samples, std::uint64_t seed);

/// Largest violation of H((p+q)/2) <= (H(p)+H(q))/2 over random triples (0 if none).
double convexity_violation(const Hamiltonian& h, int triples, std::uint64_t seed);

/// Max |grad_p| over random samples.
double max_grad_norm(const Hamiltonian& h, int samples, std::uint64_t seed);

/// Max of |grad_p(p) - grad_p(q)| / |p - q| over random pairs.
double grad_lipschitz_estimate(const Hamiltonian& h, int pairs, std::uint64_t seed);

/// Worst ratio ||H[grad v] - H[grad w] - dH/dp[grad w].grad(v-w)||_{V*} / ||v-w||_{H1}^{10/9}
/// over random smooth P1 pairs. The pairs are interpolants of random low-frequency
/// sine sums, so the same seed yields the same continuous pairs on every mesh.
double check_semismooth_bound(const Hamiltonian& h, const SpacePtr& space, int pairs,
                              std::uint64_t seed);

}  // namespace mfg
