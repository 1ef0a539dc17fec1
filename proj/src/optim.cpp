#include "epp/optim.hpp"

#include <cmath>
#include <cstddef>

#include "epp/errors.hpp"

namespace epp {

namespace {

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// y = H * v for row-major square H.
void matvec(const std::vector<double>& h, const std::vector<double>& v,
            std::vector<double>& out) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += h[i * n + j] * v[j];
    out[i] = s;
  }
}

void set_identity(std::vector<double>& h, std::size_t n) {
  h.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) h[i * n + i] = 1.0;
}

}  // namespace

OptimResult minimize_bfgs(const ObjectiveFn& objective, std::vector<double> x0,
                          int max_iter, double grad_tol) {
  const std::size_t n = x0.size();
  if (n == 0) throw UsageError("minimize_bfgs: empty parameter vector");

  std::vector<double> x = std::move(x0);
  std::vector<double> grad(n), grad_new(n);
  double f = objective(x, grad);
  if (!std::isfinite(f)) throw NumericError("minimize_bfgs: objective not finite at start");

  OptimResult best;
  best.x = x;
  best.f = f;

  std::vector<double> h;  // inverse Hessian approximation
  set_identity(h, n);
  std::vector<double> dir(n), x_new(n), s(n), y(n), hy(n);
  bool reset_since_fail = false;

  int it = 0;
  for (; it < max_iter; ++it) {
    const double gnorm = inf_norm(grad);
    best.grad_inf_norm = gnorm;
    if (gnorm < grad_tol) {
      best.converged = true;
      break;
    }

    matvec(h, grad, dir);
    for (auto& v : dir) v = -v;
    double slope = dot(grad, dir);
    if (!(slope < 0.0)) {  // not a descent direction: restart from steepest descent
      set_identity(h, n);
      for (std::size_t i = 0; i < n; ++i) dir[i] = -grad[i];
      slope = dot(grad, dir);
      if (!(slope < 0.0)) break;  // gradient numerically zero
    }

    // Armijo backtracking.
    const double c1 = 1e-4;
    double step = 1.0;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * dir[i];
      f_new = objective(x_new, grad_new);
      if (std::isfinite(f_new) && f_new <= f + c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (reset_since_fail) break;  // stuck: nothing representable improves
      set_identity(h, n);
      reset_since_fail = true;
      continue;
    }
    reset_since_fail = false;

    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = grad_new[i] - grad[i];
    }
    const double ys = dot(y, s);
    if (ys > 1e-12) {
      // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
      const double rho = 1.0 / ys;
      matvec(h, y, hy);
      const double yhy = dot(y, hy);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] -
                                 s[i] * hy[j]);
        }
      }
    }

    x.swap(x_new);
    grad.swap(grad_new);
    f = f_new;
    if (f < best.f) {
      best.f = f;
      best.x = x;
    }
  }

  best.iterations = it;
  if (!best.converged) best.grad_inf_norm = inf_norm(grad);
  return best;
}

}  // namespace epp
