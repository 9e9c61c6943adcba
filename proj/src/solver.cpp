#include "tdbem/solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace tdbem {

void SolverConfig::validate() const {
  if (tolerance <= 0.0) throw std::invalid_argument("SolverConfig: tolerance must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
}

SolveReport gmres_solve(const SpaceTimeSystem& sys, const SolverConfig& cfg,
                        const TriangularSystem* precond) {
  cfg.validate();
  sys.validate();
  if (cfg.mode == SolverMode::standalone)
    throw std::invalid_argument("gmres_solve: standalone mode is a separate operation");
  const bool prec = (cfg.mode == SolverMode::preconditioned_gmres);
  if (prec != (precond != nullptr))
    throw std::invalid_argument(
        "gmres_solve: preconditioner must be present iff mode is preconditioned-gmres");

  const auto t_start = std::chrono::steady_clock::now();
  const long N = sys.total_dim();
  const Eigen::VectorXd F = sys.rhs_flat();

  auto apply = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd w = matvec(sys, v);
    if (prec) w = forward_substitute(*precond, w, sys.n_steps);
    return w;
  };

  SolveReport rep;
  Eigen::VectorXd b = prec ? forward_substitute(*precond, F, sys.n_steps) : F;

  // iteration 0 (zero initial guess)
  rep.residual_history_plain.push_back(F.norm());
  if (prec) rep.residual_history_prec.push_back(b.norm());

  double beta = b.norm();
  double native0 = prec ? rep.residual_history_prec.back() : rep.residual_history_plain.back();
  if (native0 <= cfg.tolerance || beta == 0.0) {
    rep.solution = Eigen::VectorXd::Zero(N);
    rep.converged = true;
    rep.energy = energy(sys, rep.solution);
    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
  }

  const int m_max = std::min<long>(cfg.max_iterations, N);
  std::vector<Eigen::VectorXd> basis;
  basis.reserve(m_max + 1);
  basis.push_back(b / beta);

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m_max + 1, m_max);  // Hessenberg
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(m_max, m_max);      // Givens-reduced
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m_max + 1);
  std::vector<double> cs(m_max), sn(m_max);
  g[0] = beta;

  Eigen::VectorXd x;
  int m = 0;
  for (int j = 0; j < m_max; ++j) {
    Eigen::VectorXd w = apply(basis[j]);
    const double norm_before = w.norm();
    for (int i = 0; i <= j; ++i) {
      double h = basis[i].dot(w);
      H(i, j) = h;
      w.noalias() -= h * basis[i];
    }
    // one reorthogonalization pass when cancellation is detected
    if (w.norm() < 0.7071 * norm_before) {
      for (int i = 0; i <= j; ++i) {
        double h = basis[i].dot(w);
        H(i, j) += h;
        w.noalias() -= h * basis[i];
      }
    }
    H(j + 1, j) = w.norm();

    // apply accumulated Givens rotations to the new column
    for (int i = 0; i < j; ++i) {
      double t1 = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
      double t2 = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
      H(i, j) = t1;
      H(i + 1, j) = t2;
    }
    double denom = std::hypot(H(j, j), H(j + 1, j));
    if (denom == 0.0) {
      rep.breakdown = true;
      m = j;
      break;
    }
    cs[j] = H(j, j) / denom;
    sn[j] = H(j + 1, j) / denom;
    H(j, j) = denom;
    g[j + 1] = -sn[j] * g[j];
    g[j] = cs[j] * g[j];
    for (int i = 0; i <= j; ++i) R(i, j) = H(i, j);
    m = j + 1;

    bool happy = (H(j + 1, j) <= 1e-14 * std::max(1.0, norm_before));
    if (!happy) basis.push_back(w / H(j + 1, j));

    // current iterate and both residual indicators
    Eigen::VectorXd y = R.topLeftCorner(m, m)
                            .triangularView<Eigen::Upper>()
                            .solve(g.head(m));
    x = Eigen::VectorXd::Zero(N);
    for (int i = 0; i < m; ++i) x.noalias() += y[i] * basis[i];
    Eigen::VectorXd resid = F - matvec(sys, x);
    double plain = resid.norm();
    rep.residual_history_plain.push_back(plain);
    double native = plain;
    if (prec) {
      double prec_norm = forward_substitute(*precond, resid, sys.n_steps).norm();
      rep.residual_history_prec.push_back(prec_norm);
      native = prec_norm;
    }
    rep.iterations = m;
    if (native <= cfg.tolerance) {
      rep.converged = true;
      break;
    }
    if (happy) {
      rep.breakdown = true;
      break;
    }
  }
  if (!rep.converged && rep.iterations >= m_max) rep.hit_max_iterations = true;

  rep.solution = x.size() == N ? x : Eigen::VectorXd::Zero(N);
  rep.energy = energy(sys, rep.solution);
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

SolveReport standalone_solve(const SpaceTimeSystem& sys, const TriangularSystem& precond) {
  sys.validate();
  const auto t_start = std::chrono::steady_clock::now();
  SolveReport rep;
  rep.solution = forward_substitute(precond, sys.rhs_flat(), sys.n_steps);
  rep.iterations = 1;
  rep.converged = true;
  Eigen::VectorXd resid = sys.rhs_flat() - matvec(sys, rep.solution);
  rep.residual_history_plain.push_back(resid.norm());
  rep.energy = energy(sys, rep.solution);
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

}  // namespace tdbem
