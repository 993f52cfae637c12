#include "mfg/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mfg/assembly.hpp"
#include "mfg/errors.hpp"
#include "mfg/solver.hpp"

namespace mfg {

Hamiltonian huber_ball(double R) {
  if (!(R > 0.0)) throw ConfigError("huber_ball: R must be positive");
  Hamiltonian h;
  h.name = "huber";
  h.value = [R](const Vec2&, const Vec2& p) {
    const double n = p.norm();
    return n <= R ? 0.5 * n * n : R * n - 0.5 * R * R;
  };
  h.grad_p = [R](const Vec2&, const Vec2& p) -> Vec2 {
    const double n = p.norm();
    return n <= R ? p : Vec2(R * p / n);
  };
  h.L_H = R;
  h.L_Hp = 1.0;
  h.C_H = std::max(R, 0.5 * R * R);
  return h;
}

Hamiltonian finite_control(std::vector<Vec2> drifts, std::vector<double> costs,
                           double smoothing) {
  if (drifts.empty() || drifts.size() != costs.size()) {
    throw ConfigError("finite_control: drifts and costs must be nonempty and of equal length");
  }
  if (!(smoothing >= 0.0)) throw ConfigError("finite_control: smoothing must be >= 0");
  double max_b = 0.0;
  double max_f = 0.0;
  for (const auto& b : drifts) max_b = std::max(max_b, b.norm());
  for (double f : costs) max_f = std::max(max_f, std::abs(f));

  Hamiltonian h;
  h.name = "finite";
  h.L_H = max_b;
  if (smoothing == 0.0) {
    h.smooth = drifts.size() == 1;
    h.C_H = std::max(max_b, max_f);
    h.L_Hp = h.smooth ? 0.0 : std::numeric_limits<double>::infinity();
    h.value = [drifts, costs](const Vec2&, const Vec2& p) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < drifts.size(); ++a) best = std::max(best, drifts[a].dot(p) - costs[a]);
      return best;
    };
    h.grad_p = [drifts, costs](const Vec2&, const Vec2& p) -> Vec2 {
      std::size_t arg = 0;
      double best = drifts[0].dot(p) - costs[0];
      for (std::size_t a = 1; a < drifts.size(); ++a) {
        const double v = drifts[a].dot(p) - costs[a];
        if (v > best) {
          best = v;
          arg = a;
        }
      }
      return drifts[arg];
    };
    return h;
  }

  const double eps = smoothing;
  h.smooth = true;
  h.C_H = std::max(max_b, max_f + eps * std::log(static_cast<double>(drifts.size())));
  h.L_Hp = drifts.size() == 1 ? 0.0 : 2.0 * max_b * max_b / eps;
  // shifted by the largest exponent so the sums stay finite
  auto weights = [drifts, costs, eps](const Vec2& p, double& shift) {
    std::vector<double> z(drifts.size());
    for (std::size_t a = 0; a < drifts.size(); ++a) z[a] = (drifts[a].dot(p) - costs[a]) / eps;
    shift = *std::max_element(z.begin(), z.end());
    for (double& v : z) v = std::exp(v - shift);
    return z;
  };
  h.value = [weights, eps](const Vec2&, const Vec2& p) {
    double shift = 0.0;
    const auto w = weights(p, shift);
    double sum = 0.0;
    for (double v : w) sum += v;
    return eps * (shift + std::log(sum));
  };
  h.grad_p = [weights, drifts](const Vec2&, const Vec2& p) -> Vec2 {
    double shift = 0.0;
    const auto w = weights(p, shift);
    double sum = 0.0;
    Vec2 g = Vec2::Zero();
    for (std::size_t a = 0; a < w.size(); ++a) {
      sum += w[a];
      g += w[a] * drifts[a];
    }
    return g / sum;
  };
  return h;
}

namespace {

struct Sampler {
  explicit Sampler(std::uint64_t seed) : rng(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  Vec2 point() { return Vec2(uniform(0.0, 1.0), uniform(0.0, 1.0)); }
  Vec2 momentum(double scale) { return Vec2(uniform(-scale, scale), uniform(-scale, scale)); }
  std::mt19937_64 rng;
};

double sample_scale(const Hamiltonian& h) { return 3.0 * std::max(h.L_H, 1.0); }

}  // namespace

double check_gradient(const Hamiltonian& h, int samples, std::uint64_t seed) {
  if (!h.smooth) throw ConfigError("check_gradient: Hamiltonian '" + h.name + "' is not smooth");
  constexpr double step = 1e-6;
  Sampler s(seed);
  const double scale = sample_scale(h);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Vec2 x = s.point();
    const Vec2 p = s.momentum(scale);
    const Vec2 g = h.grad_p(x, p);
    Vec2 fd;
    for (int d = 0; d < 2; ++d) {
      Vec2 e = Vec2::Zero();
      e[d] = step;
      fd[d] = (h.value(x, p + e) - h.value(x, p - e)) / (2.0 * step);
    }
    worst = std::max(worst, (fd - g).norm() / std::max(g.norm(), 1.0));
  }
  return worst;
}

double convexity_violation(const Hamiltonian& h, int triples, std::uint64_t seed) {
  Sampler s(seed);
  const double scale = sample_scale(h);
  double worst = 0.0;
  for (int k = 0; k < triples; ++k) {
    const Vec2 x = s.point();
    const Vec2 p = s.momentum(scale);
    const Vec2 q = s.momentum(scale);
    const double gap = h.value(x, 0.5 * (p + q)) - 0.5 * (h.value(x, p) + h.value(x, q));
    worst = std::max(worst, gap);
  }
  return worst;
}

double max_grad_norm(const Hamiltonian& h, int samples, std::uint64_t seed) {
  Sampler s(seed);
  const double scale = sample_scale(h);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Vec2 x = s.point();
    worst = std::max(worst, h.grad_p(x, s.momentum(scale)).norm());
  }
  return worst;
}

double grad_lipschitz_estimate(const Hamiltonian& h, int pairs, std::uint64_t seed) {
  Sampler s(seed);
  const double scale = sample_scale(h);
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const Vec2 x = s.point();
    const Vec2 p = s.momentum(scale);
    const Vec2 q = s.momentum(scale);
    const double d = (p - q).norm();
    if (d == 0.0) continue;
    worst = std::max(worst, (h.grad_p(x, p) - h.grad_p(x, q)).norm() / d);
  }
  return worst;
}

namespace {

// sum_{a,b<=3} c_ab sin(a pi x) sin(b pi y), amplitudes spread over three decades
ScalarFn random_sine_sum(Sampler& s) {
  std::array<double, 9> c{};
  const double amplitude = std::pow(10.0, s.uniform(-2.0, 1.0));
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) c[3 * a + b] = amplitude * s.uniform(-1.0, 1.0) / ((a + 1) * (b + 1));
  }
  return [c](const Vec2& x) {
    double v = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        v += c[3 * a + b] * std::sin((a + 1) * std::numbers::pi * x.x()) *
             std::sin((b + 1) * std::numbers::pi * x.y());
      }
    }
    return v;
  };
}

}  // namespace

double check_semismooth_bound(const Hamiltonian& h, const SpacePtr& space, int pairs,
                              std::uint64_t seed) {
  if (!h.smooth) throw ConfigError("check_semismooth_bound: Hamiltonian must be smooth");
  constexpr double exponent = 1.0 + 1.0 / 9.0;
  const SparseMatrix gram = assemble_h1_gram(*space);
  const DualNorm dual(gram);
  Sampler s(seed);
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const P1Function v = interpolate(space, random_sine_sum(s));
    const P1Function w = interpolate(space, random_sine_sum(s));
    const P1Function diff(space, v.coeffs - w.coeffs);
    const double h1 = std::sqrt(diff.coeffs.dot(gram * diff.coeffs));
    if (h1 == 0.0) continue;
    std::vector<double> remainder(space->num_elements());
    for (int t = 0; t < space->num_elements(); ++t) {
      const Vec2 x = space->mesh().centroid(t);
      const Vec2 gv = v.grad(t);
      const Vec2 gw = w.grad(t);
      remainder[t] = h.value(x, gv) - h.value(x, gw) - h.grad_p(x, gw).dot(gv - gw);
    }
    const Vector load = assemble_piecewise_constant_load(*space, remainder);
    worst = std::max(worst, dual(load) / std::pow(h1, exponent));
  }
  return worst;
}

}  // namespace mfg
