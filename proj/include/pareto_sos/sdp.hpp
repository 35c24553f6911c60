#pragma once

// Dense primal-dual interior-point solver for block semidefinite programs
// with free scalar variables:
//
//   minimize    sum_b <C_b, X_b> + c_f' u
//   subject to  sum_b <A_{r,b}, X_b> + B_r' u = b_r     for every row r
//               X_b PSD,  u free.
//
// Dual:  maximize b' y  s.t.  Z_b = C_b - sum_r y_r A_{r,b} PSD,  B' y = c_f.
//
// Symmetric matrices are addressed by upper-triangle entries (i <= j). An
// off-diagonal entry with value v stands for v at both (i,j) and (j,i), so it
// contributes 2 v X_ij to an inner product.
//
// Iterations use Nesterov-Todd scaling with a Mehrotra predictor-corrector.
// Free variables stay in the Newton system as an augmented saddle-point block
// that is reduced through a Schur complement on the free variables.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace psos::sdp {

struct MatrixEntry {
  int block = 0;
  int i = 0;
  int j = 0;
  double value = 0.0;
};

struct FreeEntry {
  int var = 0;
  double value = 0.0;
};

struct Constraint {
  std::vector<MatrixEntry> matrix;
  std::vector<FreeEntry> free;
  double rhs = 0.0;
};

struct SdpProblem {
  std::vector<int> blocks;
  int num_free = 0;
  std::vector<MatrixEntry> objective_matrix;
  std::vector<double> objective_free;
  std::vector<Constraint> constraints;

  int add_block(int size) {
    blocks.push_back(size);
    return static_cast<int>(blocks.size()) - 1;
  }
  int add_free(double cost = 0.0) {
    objective_free.push_back(cost);
    return num_free++;
  }

  /// Throws std::invalid_argument when an entry references an undeclared
  /// block/variable or lies below the diagonal.
  void validate() const {
    if (static_cast<int>(objective_free.size()) != num_free)
      throw std::invalid_argument("sdp: objective_free size must equal num_free");
    auto check_entry = [&](const MatrixEntry& e) {
      if (e.block < 0 || e.block >= static_cast<int>(blocks.size()))
        throw std::invalid_argument("sdp: entry references undeclared block");
      const int n = blocks[static_cast<std::size_t>(e.block)];
      if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) throw std::invalid_argument("sdp: entry index out of range");
      if (e.i > e.j) throw std::invalid_argument("sdp: entries must address the upper triangle (i <= j)");
    };
    for (int s : blocks)
      if (s <= 0) throw std::invalid_argument("sdp: block sizes must be positive");
    for (const auto& e : objective_matrix) check_entry(e);
    for (const auto& c : constraints) {
      for (const auto& e : c.matrix) check_entry(e);
      for (const auto& f : c.free)
        if (f.var < 0 || f.var >= num_free) throw std::invalid_argument("sdp: entry references undeclared free variable");
    }
  }
};

enum class Status { Optimal, Infeasible, Unbounded, MaxIterations, NumericalFailure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::MaxIterations: return "max_iterations";
    case Status::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

struct Residuals {
  double primal_feas = 0.0;
  double dual_feas = 0.0;
  double gap = 0.0;
};

struct SdpSolution {
  Status status = Status::NumericalFailure;
  std::vector<Eigen::MatrixXd> block_values;
  std::vector<Eigen::MatrixXd> dual_slacks;
  Eigen::VectorXd free_values;
  Eigen::VectorXd dual_values;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  Residuals residuals;
  int iterations = 0;
  std::string message;
};

struct SolverOptions {
  double tol = 1e-8;
  /// Residual level at which a run that stalls before `tol` still counts as optimal.
  double accept_tol = 1e-7;
  /// Farkas-ray violation below which infeasibility/unboundedness is declared.
  double infeasibility_tol = 1e-6;
  int max_iter = 200;
  bool verbose = false;
};

namespace detail {

inline double entry_inner(const MatrixEntry& e, const Eigen::MatrixXd& X) {
  return e.i == e.j ? e.value * X(e.i, e.j) : 2.0 * e.value * X(e.i, e.j);
}

inline void accumulate(Eigen::MatrixXd& S, const MatrixEntry& e, double scale) {
  S(e.i, e.j) += scale * e.value;
  if (e.i != e.j) S(e.j, e.i) += scale * e.value;
}

inline double min_eigenvalue(const Eigen::MatrixXd& S) {
  if (S.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Column-oriented view of the constraint data grouped by block.
struct BlockRows {
  struct Row {
    int row;
    std::vector<MatrixEntry> entries;
  };
  std::vector<Row> rows;
};

class Operator {
 public:
  Operator(const SdpProblem& p, const Eigen::VectorXd& row_scale) : p_(p), scale_(row_scale) {
    const int nb = static_cast<int>(p.blocks.size());
    by_block_.resize(static_cast<std::size_t>(nb));
    std::vector<std::vector<int>> last(static_cast<std::size_t>(nb));
    for (std::size_t r = 0; r < p.constraints.size(); ++r) {
      for (const auto& e : p.constraints[r].matrix) {
        auto& br = by_block_[static_cast<std::size_t>(e.block)];
        if (br.rows.empty() || br.rows.back().row != static_cast<int>(r))
          br.rows.push_back({static_cast<int>(r), {}});
        MatrixEntry scaled = e;
        scaled.value *= scale_(static_cast<Eigen::Index>(r));
        br.rows.back().entries.push_back(scaled);
      }
    }
    B_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.constraints.size()), p.num_free);
    for (std::size_t r = 0; r < p.constraints.size(); ++r)
      for (const auto& f : p.constraints[r].free)
        B_(static_cast<Eigen::Index>(r), f.var) += scale_(static_cast<Eigen::Index>(r)) * f.value;
  }

  Eigen::Index rows() const { return static_cast<Eigen::Index>(p_.constraints.size()); }
  const Eigen::MatrixXd& B() const { return B_; }
  const std::vector<BlockRows>& by_block() const { return by_block_; }

  // A(X)
  Eigen::VectorXd apply(const std::vector<Eigen::MatrixXd>& X) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(rows());
    for (std::size_t b = 0; b < by_block_.size(); ++b)
      for (const auto& row : by_block_[b].rows) {
        double s = 0.0;
        for (const auto& e : row.entries) s += entry_inner(e, X[b]);
        out(row.row) += s;
      }
    return out;
  }

  // A^T(y) for one block
  Eigen::MatrixXd adjoint(std::size_t b, const Eigen::VectorXd& y) const {
    const int n = p_.blocks[b];
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (const auto& row : by_block_[b].rows)
      for (const auto& e : row.entries) accumulate(S, e, y(row.row));
    return S;
  }

  // Schur complement M_rs = sum_b <A_rb, W_b A_sb W_b>.
  Eigen::MatrixXd schur(const std::vector<Eigen::MatrixXd>& W) const {
    const Eigen::Index m = rows();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t b = 0; b < by_block_.size(); ++b) {
      const Eigen::MatrixXd& Wb = W[b];
      const Eigen::Index n = Wb.rows();
      Eigen::MatrixXd T(n, n);
      const auto& rows_b = by_block_[b].rows;
      for (const auto& rs : rows_b) {
        T.setZero();
        for (const auto& e : rs.entries) {
          if (e.i == e.j) {
            T.noalias() += e.value * Wb.col(e.i) * Wb.row(e.i);
          } else {
            T.noalias() += e.value * Wb.col(e.i) * Wb.row(e.j);
            T.noalias() += e.value * Wb.col(e.j) * Wb.row(e.i);
          }
        }
        for (const auto& rr : rows_b) {
          if (rr.row > rs.row) continue;
          double s = 0.0;
          for (const auto& e : rr.entries) s += entry_inner(e, T);
          M(rr.row, rs.row) += s;
        }
      }
    }
    M.triangularView<Eigen::StrictlyLower>() = M.transpose().triangularView<Eigen::StrictlyLower>();
    return M;
  }

 private:
  const SdpProblem& p_;
  Eigen::VectorXd scale_;
  std::vector<BlockRows> by_block_;
  Eigen::MatrixXd B_;
};

// Solves [M B; B' 0][dy; du] = [r1; r2].
class KktSolver {
 public:
  bool factor(const Eigen::MatrixXd& M, const Eigen::MatrixXd& B) {
    M_ = &M;
    B_ = &B;
    const double diag_max = std::max(1e-300, M.diagonal().cwiseAbs().maxCoeff());
    double reg = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd Mr = M;
      if (reg > 0.0) Mr.diagonal().array() += reg;
      // Rows without matrix entries leave zero pivots; regularize those only.
      for (Eigen::Index i = 0; i < Mr.rows(); ++i)
        if (Mr(i, i) <= 1e-14 * diag_max) Mr(i, i) += 1e-10 * diag_max;
      llt_.compute(Mr);
      if (llt_.info() == Eigen::Success) break;
      reg = reg == 0.0 ? 1e-14 * diag_max : reg * 100.0;
      if (attempt == 11) return false;
    }
    if (B.cols() > 0) {
      Eigen::MatrixXd Y = llt_.matrixL().solve(B);
      Eigen::MatrixXd S = Y.transpose() * Y;
      ldlt_.compute(S);
      if (ldlt_.info() != Eigen::Success) return false;
    }
    return true;
  }

  void solve(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& dy, Eigen::VectorXd& du) const {
    solve_once(r1, r2, dy, du);
    // Iterative refinement against the unregularized system, while it helps.
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 8; ++it) {
      Eigen::VectorXd e1 = r1 - (*M_) * dy;
      if (B_->cols() > 0) e1 -= (*B_) * du;
      Eigen::VectorXd e2 = B_->cols() > 0 ? Eigen::VectorXd(r2 - B_->transpose() * dy) : Eigen::VectorXd();
      const double err = std::sqrt(e1.squaredNorm() + e2.squaredNorm());
      if (!(err < 0.5 * prev) || err == 0.0) break;
      prev = err;
      Eigen::VectorXd cy, cu;
      solve_once(e1, e2, cy, cu);
      dy += cy;
      if (B_->cols() > 0) du += cu;
    }
  }

 private:
  void solve_once(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& dy,
                  Eigen::VectorXd& du) const {
    Eigen::VectorXd Minv_r1 = llt_.solve(r1);
    if (B_->cols() == 0) {
      dy = Minv_r1;
      du.resize(0);
      return;
    }
    // S du = B' M^{-1} r1 - r2 ; dy = M^{-1}(r1 - B du)
    du = ldlt_.solve(B_->transpose() * Minv_r1 - r2);
    dy = llt_.solve(r1 - (*B_) * du);
  }

  const Eigen::MatrixXd* M_ = nullptr;
  const Eigen::MatrixXd* B_ = nullptr;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

struct NtScaling {
  Eigen::MatrixXd G;
  Eigen::MatrixXd Ginv;
  Eigen::MatrixXd W;
  Eigen::VectorXd d;
};

inline bool nt_scaling(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z, NtScaling& out) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(X);
  if (ex.info() != Eigen::Success || ex.eigenvalues()(0) <= 0.0) return false;
  const Eigen::VectorXd sx = ex.eigenvalues().cwiseSqrt();
  const Eigen::MatrixXd L = ex.eigenvectors() * sx.asDiagonal();
  const Eigen::MatrixXd Linv = sx.cwiseInverse().asDiagonal() * ex.eigenvectors().transpose();
  Eigen::MatrixXd S = L.transpose() * Z * L;
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success || es.eigenvalues()(0) <= 0.0) return false;
  out.d = es.eigenvalues().cwiseSqrt();
  const Eigen::VectorXd dq = out.d.cwiseSqrt();
  out.G = L * es.eigenvectors() * dq.cwiseInverse().asDiagonal();
  out.Ginv = dq.asDiagonal() * es.eigenvectors().transpose() * Linv;
  out.W = out.G * out.G.transpose();
  out.W = 0.5 * (out.W + out.W.transpose());
  return true;
}

// Largest alpha in (0, 1/...] with X + alpha dX PSD.
inline double max_step(const Eigen::MatrixXd& X, const Eigen::MatrixXd& dX) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(X);
  const Eigen::VectorXd isx = ex.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd Linv = isx.asDiagonal() * ex.eigenvectors().transpose();
  Eigen::MatrixXd S = Linv * dX * Linv.transpose();
  S = 0.5 * (S + S.transpose());
  const double lmin = min_eigenvalue(S);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

inline double inner(const std::vector<Eigen::MatrixXd>& A, const std::vector<Eigen::MatrixXd>& B) {
  double s = 0.0;
  for (std::size_t b = 0; b < A.size(); ++b) s += A[b].cwiseProduct(B[b]).sum();
  return s;
}

}  // namespace detail

/// Residuals of a candidate solution, recomputed from the problem data alone.
///   primal_feas = max(||A(X) + B u - b||_2 / (1 + ||b||_2), max(0, -lambda_min(X_b)))
///   dual_feas   = max(||c_f - B'y||_2, max(0, -lambda_min(C_b - A_b'(y)))) / (1 + ||C||)
///   gap         = |primal_obj - dual_obj| / (1 + |primal_obj|)
inline Residuals residuals(const SdpProblem& p, const SdpSolution& s) {
  if (s.block_values.size() != p.blocks.size() || s.free_values.size() != p.num_free ||
      s.dual_values.size() != static_cast<Eigen::Index>(p.constraints.size()))
    throw std::invalid_argument("residuals: solution dimensions do not match problem");
  for (std::size_t b = 0; b < p.blocks.size(); ++b)
    if (s.block_values[b].rows() != p.blocks[b] || s.block_values[b].cols() != p.blocks[b])
      throw std::invalid_argument("residuals: block size mismatch");

  double bnorm = 0.0, pres = 0.0;
  for (std::size_t r = 0; r < p.constraints.size(); ++r) {
    const auto& c = p.constraints[r];
    double v = -c.rhs;
    for (const auto& e : c.matrix) v += detail::entry_inner(e, s.block_values[static_cast<std::size_t>(e.block)]);
    for (const auto& f : c.free) v += f.value * s.free_values(f.var);
    pres += v * v;
    bnorm += c.rhs * c.rhs;
  }
  Residuals out;
  out.primal_feas = std::sqrt(pres) / (1.0 + std::sqrt(bnorm));
  for (const auto& X : s.block_values) out.primal_feas = std::max(out.primal_feas, -detail::min_eigenvalue(X));

  std::vector<Eigen::MatrixXd> dual(p.blocks.size());
  for (std::size_t b = 0; b < p.blocks.size(); ++b) dual[b] = Eigen::MatrixXd::Zero(p.blocks[b], p.blocks[b]);
  double cnorm = 0.0;
  for (const auto& e : p.objective_matrix) {
    detail::accumulate(dual[static_cast<std::size_t>(e.block)], e, 1.0);
    cnorm += (e.i == e.j ? 1.0 : 2.0) * e.value * e.value;
  }
  Eigen::VectorXd free_res = Eigen::Map<const Eigen::VectorXd>(p.objective_free.data(), p.num_free);
  for (double c : p.objective_free) cnorm += c * c;
  for (std::size_t r = 0; r < p.constraints.size(); ++r) {
    const double y = s.dual_values(static_cast<Eigen::Index>(r));
    for (const auto& e : p.constraints[r].matrix) detail::accumulate(dual[static_cast<std::size_t>(e.block)], e, -y);
    for (const auto& f : p.constraints[r].free) free_res(f.var) -= y * f.value;
  }
  double dres = free_res.size() ? free_res.norm() : 0.0;
  for (const auto& Z : dual) dres = std::max(dres, -detail::min_eigenvalue(Z));
  out.dual_feas = dres / (1.0 + std::sqrt(cnorm));
  out.gap = std::abs(s.primal_obj - s.dual_obj) / (1.0 + std::abs(s.primal_obj));
  return out;
}

namespace detail {

inline SdpSolution solve_core(const SdpProblem& problem, const SolverOptions& opt) {
  using detail::inner;
  const std::size_t nb = problem.blocks.size();
  const Eigen::Index m = static_cast<Eigen::Index>(problem.constraints.size());
  const int nf = problem.num_free;

  // Row equilibration: every constraint row gets unit norm internally.
  Eigen::VectorXd row_scale = Eigen::VectorXd::Ones(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    double s = 0.0;
    for (const auto& e : problem.constraints[static_cast<std::size_t>(r)].matrix)
      s += (e.i == e.j ? 1.0 : 2.0) * e.value * e.value;
    for (const auto& f : problem.constraints[static_cast<std::size_t>(r)].free) s += f.value * f.value;
    if (s > 0.0) row_scale(r) = 1.0 / std::sqrt(s);
  }
  const detail::Operator A(problem, row_scale);
  const Eigen::MatrixXd& B = A.B();
  Eigen::VectorXd b(m);
  for (Eigen::Index r = 0; r < m; ++r) b(r) = row_scale(r) * problem.constraints[static_cast<std::size_t>(r)].rhs;
  std::vector<Eigen::MatrixXd> C(nb);
  for (std::size_t k = 0; k < nb; ++k) C[k] = Eigen::MatrixXd::Zero(problem.blocks[k], problem.blocks[k]);
  for (const auto& e : problem.objective_matrix) detail::accumulate(C[static_cast<std::size_t>(e.block)], e, 1.0);
  const Eigen::VectorXd cf = Eigen::Map<const Eigen::VectorXd>(problem.objective_free.data(), nf);

  const double bnorm = b.norm();
  double cnorm = cf.squaredNorm();
  for (const auto& Ck : C) cnorm += Ck.squaredNorm();
  cnorm = std::sqrt(cnorm);

  // Starting point (scaled identities).
  int total_dim = 0;
  for (int s : problem.blocks) total_dim += s;
  std::vector<Eigen::MatrixXd> X(nb), Z(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const double n = problem.blocks[k];
    double amax = 0.0;
    double ratio = 0.0;
    for (const auto& row : A.by_block()[k].rows) {
      double an = 0.0;
      for (const auto& e : row.entries) an += (e.i == e.j ? 1.0 : 2.0) * e.value * e.value;
      an = std::sqrt(an);
      amax = std::max(amax, an);
      ratio = std::max(ratio, (1.0 + std::abs(b(row.row))) / (1.0 + an));
    }
    const double xi = std::max({10.0, std::sqrt(n), n * ratio});
    const double eta = std::max({10.0, std::sqrt(n), amax, C[k].norm()});
    X[k] = xi * Eigen::MatrixXd::Identity(problem.blocks[k], problem.blocks[k]);
    Z[k] = eta * Eigen::MatrixXd::Identity(problem.blocks[k], problem.blocks[k]);
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(nf);

  SdpSolution best;
  double best_merit = std::numeric_limits<double>::infinity();
  bool converged = false;
  Status early = Status::MaxIterations;
  std::string message;

  auto objectives = [&](double& pobj, double& dobj) {
    pobj = inner(C, X) + cf.dot(u);
    dobj = b.dot(y);
  };
  auto snapshot = [&](int iter, double pobj, double dobj, double pinf, double dinf, double gap) {
    const double merit = std::max({pinf, dinf, gap});
    if (merit > best_merit) return;
    best_merit = merit;
    best.block_values = X;
    best.dual_slacks = Z;
    best.free_values = u;
    best.dual_values = y.cwiseProduct(row_scale);
    best.primal_obj = pobj;
    best.dual_obj = dobj;
    best.iterations = iter;
  };

  int iter = 0;
  for (; iter <= opt.max_iter; ++iter) {
    const Eigen::VectorXd Rp = b - A.apply(X) - B * u;
    std::vector<Eigen::MatrixXd> Rd(nb);
    double rd2 = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      Rd[k] = C[k] - A.adjoint(k, y) - Z[k];
      rd2 += Rd[k].squaredNorm();
    }
    const Eigen::VectorXd rf = cf - B.transpose() * y;
    rd2 += rf.squaredNorm();
    double pobj, dobj;
    objectives(pobj, dobj);
    const double pinf = Rp.norm() / (1.0 + bnorm);
    const double dinf = std::sqrt(rd2) / (1.0 + cnorm);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    const double mu = total_dim > 0 ? inner(X, Z) / total_dim : 0.0;
    snapshot(iter, pobj, dobj, pinf, dinf, gap);
    if (opt.verbose)
      std::fprintf(stderr, "%3d pobj % .10e dobj % .10e pinf %.2e dinf %.2e gap %.2e mu %.2e\n", iter, pobj, dobj,
                   pinf, dinf, gap, mu);
    if (pinf <= opt.tol && dinf <= opt.tol && gap <= opt.tol) {
      converged = true;
      break;
    }
    if (iter == opt.max_iter) break;

    // Farkas rays for infeasibility / unboundedness.
    if (iter >= 5) {
      if (dobj > 0.0) {
        const Eigen::VectorXd yr = y / dobj;
        double viol = (B.transpose() * yr).norm();
        for (std::size_t k = 0; k < nb; ++k)
          viol = std::max(viol, -detail::min_eigenvalue(-A.adjoint(k, yr)) );
        if (viol <= opt.infeasibility_tol && pinf > opt.tol) {
          early = Status::Infeasible;
          message = "primal infeasible: dual ray found";
          break;
        }
      }
      if (pobj < 0.0) {
        const double s = -pobj;
        std::vector<Eigen::MatrixXd> Xr(nb);
        for (std::size_t k = 0; k < nb; ++k) Xr[k] = X[k] / s;
        const double viol = (A.apply(Xr) + B * (u / s)).norm();
        if (viol <= opt.infeasibility_tol && dinf > opt.tol) {
          early = Status::Unbounded;
          message = "dual infeasible: primal ray found";
          break;
        }
      }
    }

    std::vector<detail::NtScaling> nt(nb);
    std::vector<Eigen::MatrixXd> W(nb);
    bool ok = true;
    for (std::size_t k = 0; k < nb && ok; ++k) {
      ok = detail::nt_scaling(X[k], Z[k], nt[k]);
      if (ok) W[k] = nt[k].W;
    }
    if (!ok) {
      early = Status::NumericalFailure;
      message = "loss of positive definiteness";
      break;
    }
    const Eigen::MatrixXd M = A.schur(W);
    detail::KktSolver kkt;
    if (!kkt.factor(M, B)) {
      early = Status::NumericalFailure;
      message = "Schur complement factorization failed";
      break;
    }
    std::vector<Eigen::MatrixXd> WRdW(nb);
    for (std::size_t k = 0; k < nb; ++k) WRdW[k] = W[k] * Rd[k] * W[k];
    const Eigen::VectorXd A_WRdW = A.apply(WRdW);

    auto direction = [&](const std::vector<Eigen::MatrixXd>& R, std::vector<Eigen::MatrixXd>& dX,
                         std::vector<Eigen::MatrixXd>& dZ, Eigen::VectorXd& dy, Eigen::VectorXd& du) {
      std::vector<Eigen::MatrixXd> GHG(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        const Eigen::VectorXd& d = nt[k].d;
        Eigen::MatrixXd H = R[k];
        for (Eigen::Index i = 0; i < H.rows(); ++i)
          for (Eigen::Index j = 0; j < H.cols(); ++j) H(i, j) *= 2.0 / (d(i) + d(j));
        GHG[k] = nt[k].G * H * nt[k].G.transpose();
      }
      const Eigen::VectorXd r1 = Rp - A.apply(GHG) + A_WRdW;
      kkt.solve(r1, rf, dy, du);
      dX.resize(nb);
      dZ.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        dZ[k] = Rd[k] - A.adjoint(k, dy);
        dX[k] = GHG[k] - W[k] * dZ[k] * W[k];
        dX[k] = 0.5 * (dX[k] + dX[k].transpose());
      }
    };
    auto steps = [&](const std::vector<Eigen::MatrixXd>& dX, const std::vector<Eigen::MatrixXd>& dZ, double& ap,
                     double& ad) {
      ap = ad = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < nb; ++k) {
        ap = std::min(ap, detail::max_step(X[k], dX[k]));
        ad = std::min(ad, detail::max_step(Z[k], dZ[k]));
      }
    };

    // Predictor.
    std::vector<Eigen::MatrixXd> R(nb);
    for (std::size_t k = 0; k < nb; ++k) R[k] = -Eigen::MatrixXd(nt[k].d.array().square().matrix().asDiagonal());
    std::vector<Eigen::MatrixXd> dX, dZ;
    Eigen::VectorXd dy, du;
    direction(R, dX, dZ, dy, du);
    double ap, ad;
    steps(dX, dZ, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k) mu_aff += (X[k] + ap * dX[k]).cwiseProduct(Z[k] + ad * dZ[k]).sum();
    mu_aff /= total_dim;
    const double expon = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, expon), 0.0, 1.0);

    // Corrector with the second-order term.
    for (std::size_t k = 0; k < nb; ++k) {
      const Eigen::MatrixXd dXs = nt[k].Ginv * dX[k] * nt[k].Ginv.transpose();
      const Eigen::MatrixXd dZs = nt[k].G.transpose() * dZ[k] * nt[k].G;
      const Eigen::MatrixXd prod = dXs * dZs;
      R[k] = -0.5 * (prod + prod.transpose());
      R[k].diagonal().array() += sigma * mu - nt[k].d.array().square();
    }
    direction(R, dX, dZ, dy, du);
    steps(dX, dZ, ap, ad);
    const double gamma = 0.9 + 0.09 * std::min({1.0, ap, ad});
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    if (ap < 1e-12 && ad < 1e-12) {
      early = Status::NumericalFailure;
      message = "step length collapsed";
      break;
    }
    for (std::size_t k = 0; k < nb; ++k) {
      X[k] += ap * dX[k];
      Z[k] += ad * dZ[k];
      X[k] = 0.5 * (X[k] + X[k].transpose());
      Z[k] = 0.5 * (Z[k] + Z[k].transpose());
    }
    if (nf > 0) u += ap * du;
    y += ad * dy;
  }

  SdpSolution out;
  if (converged || early == Status::MaxIterations || early == Status::NumericalFailure) {
    out = std::move(best);
  } else {
    // Certificates: report the current (diverging) iterate.
    out.block_values = X;
    out.dual_slacks = Z;
    out.free_values = u;
    out.dual_values = y.cwiseProduct(row_scale);
    objectives(out.primal_obj, out.dual_obj);
    out.iterations = iter;
  }
  out.residuals = residuals(problem, out);
  const Residuals& r = out.residuals;
  const bool within = r.primal_feas <= opt.accept_tol && r.dual_feas <= opt.accept_tol && r.gap <= opt.accept_tol;
  if (early == Status::Infeasible || early == Status::Unbounded) {
    out.status = early;
  } else if (converged || within) {
    out.status = within ? Status::Optimal : (early == Status::MaxIterations ? Status::MaxIterations : Status::NumericalFailure);
  } else {
    out.status = early;
  }
  out.message = message;
  if (out.iterations == 0) out.iterations = iter;
  return out;
}

}  // namespace detail

/// Free variables that occur in exactly one row, and alone among the free
/// variables of that row, are eliminated together with the row before the
/// interior-point iterations and recovered afterwards.
inline SdpSolution solve(const SdpProblem& problem, const SolverOptions& opt = {}) {
  problem.validate();
  const int nf = problem.num_free;
  std::vector<int> count(static_cast<std::size_t>(nf), 0), row_of(static_cast<std::size_t>(nf), -1);
  for (std::size_t r = 0; r < problem.constraints.size(); ++r)
    for (const auto& f : problem.constraints[r].free)
      if (f.value != 0.0) {
        ++count[static_cast<std::size_t>(f.var)];
        row_of[static_cast<std::size_t>(f.var)] = static_cast<int>(r);
      }
  struct Eliminated {
    int var, row;
    double coef;
  };
  std::vector<Eliminated> elim;
  std::vector<char> drop(problem.constraints.size(), 0);
  for (int v = 0; v < nf; ++v) {
    if (count[static_cast<std::size_t>(v)] != 1) continue;
    const int r = row_of[static_cast<std::size_t>(v)];
    const auto& row = problem.constraints[static_cast<std::size_t>(r)];
    double coef = 0.0;
    bool alone = true;
    for (const auto& f : row.free) {
      if (f.var == v) coef += f.value;
      else if (f.value != 0.0) alone = false;
    }
    if (!alone || coef == 0.0 || drop[static_cast<std::size_t>(r)]) continue;
    drop[static_cast<std::size_t>(r)] = 1;
    elim.push_back({v, r, coef});
  }
  if (elim.empty()) return detail::solve_core(problem, opt);


  // Reduced problem: u_v = (rhs_r - <A_r, X>) / a substituted into the objective.
  std::vector<int> new_index(static_cast<std::size_t>(nf), -1);
  std::vector<char> gone(static_cast<std::size_t>(nf), 0);
  for (const auto& e : elim) gone[static_cast<std::size_t>(e.var)] = 1;
  SdpProblem red;
  red.blocks = problem.blocks;
  red.objective_matrix = problem.objective_matrix;
  for (int v = 0; v < nf; ++v)
    if (!gone[static_cast<std::size_t>(v)]) new_index[static_cast<std::size_t>(v)] = red.add_free(problem.objective_free[static_cast<std::size_t>(v)]);
  double offset = 0.0;
  for (const auto& e : elim) {
    const double w = problem.objective_free[static_cast<std::size_t>(e.var)] / e.coef;
    const auto& row = problem.constraints[static_cast<std::size_t>(e.row)];
    offset += w * row.rhs;
    for (const auto& m : row.matrix) red.objective_matrix.push_back({m.block, m.i, m.j, -w * m.value});
  }
  std::vector<int> kept_rows;
  for (std::size_t r = 0; r < problem.constraints.size(); ++r) {
    if (drop[r]) continue;
    Constraint c = problem.constraints[r];
    for (auto& f : c.free) f.var = new_index[static_cast<std::size_t>(f.var)];
    red.constraints.push_back(std::move(c));
    kept_rows.push_back(static_cast<int>(r));
  }

  const SdpSolution rs = detail::solve_core(red, opt);
  SdpSolution out;
  out.status = rs.status;
  out.message = rs.message;
  out.iterations = rs.iterations;
  out.block_values = rs.block_values;
  out.dual_slacks = rs.dual_slacks;
  out.free_values = Eigen::VectorXd::Zero(nf);
  for (int v = 0; v < nf; ++v)
    if (!gone[static_cast<std::size_t>(v)] && rs.free_values.size() > 0)
      out.free_values(v) = rs.free_values(new_index[static_cast<std::size_t>(v)]);
  out.dual_values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.constraints.size()));
  for (std::size_t i = 0; i < kept_rows.size() && static_cast<Eigen::Index>(i) < rs.dual_values.size(); ++i)
    out.dual_values(kept_rows[i]) = rs.dual_values(static_cast<Eigen::Index>(i));
  for (const auto& e : elim) {
    const auto& row = problem.constraints[static_cast<std::size_t>(e.row)];
    double val = row.rhs;
    if (!out.block_values.empty())
      for (const auto& m : row.matrix) val -= detail::entry_inner(m, out.block_values[static_cast<std::size_t>(m.block)]);
    out.free_values(e.var) = val / e.coef;
    out.dual_values(e.row) = problem.objective_free[static_cast<std::size_t>(e.var)] / e.coef;
  }
  out.primal_obj = rs.primal_obj + offset;
  out.dual_obj = rs.dual_obj + offset;
  if (out.status != Status::Infeasible && out.status != Status::Unbounded && !out.block_values.empty())
    out.residuals = residuals(problem, out);
  else
    out.residuals = rs.residuals;
  return out;
}

/// Plain-text sparse triplet dump for cross-checking with external solvers.
///   blocks <nb> <s_1> ... <s_nb> free <nf> rows <m>
///   obj <block> <i> <j> <value>        (block -1: free variable i, j unused)
///   rhs <row> <value>
///   <row> <block> <i> <j> <value>      (block -1: free variable i)
/// Indices are zero-based, matrix entries upper-triangular.
inline void write_triplets(std::ostream& os, const SdpProblem& p) {
  os.precision(17);
  os << "blocks " << p.blocks.size();
  for (int s : p.blocks) os << ' ' << s;
  os << " free " << p.num_free << " rows " << p.constraints.size() << '\n';
  for (const auto& e : p.objective_matrix) os << "obj " << e.block << ' ' << e.i << ' ' << e.j << ' ' << e.value << '\n';
  for (int v = 0; v < p.num_free; ++v)
    if (p.objective_free[static_cast<std::size_t>(v)] != 0.0)
      os << "obj -1 " << v << " 0 " << p.objective_free[static_cast<std::size_t>(v)] << '\n';
  for (std::size_t r = 0; r < p.constraints.size(); ++r) {
    const auto& c = p.constraints[r];
    os << "rhs " << r << ' ' << c.rhs << '\n';
    for (const auto& e : c.matrix) os << r << ' ' << e.block << ' ' << e.i << ' ' << e.j << ' ' << e.value << '\n';
    for (const auto& f : c.free) os << r << " -1 " << f.var << " 0 " << f.value << '\n';
  }
}

}  // namespace psos::sdp
