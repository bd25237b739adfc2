#include "cfisac/conic.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include <Eigen/Sparse>

#include "cfisac/linalg.hpp"

namespace cfisac {

// ---------------------------------------------------------------------------
// ConicProblem

ConicProblem::ConicProblem(int num_vars)
    : n(num_vars),
      Q(Mat::Zero(num_vars, num_vars)),
      q(Vec::Zero(num_vars)),
      lower(Vec::Constant(num_vars, -kInf)),
      upper(Vec::Constant(num_vars, kInf)) {}

double ConicProblem::objective(const Vec& x) const { return x.dot(Q * x) + q.dot(x) + constant; }

double ConicProblem::max_violation(const Vec& x) const {
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    worst = std::max({worst, lower(j) - x(j), x(j) - upper(j)});
  }
  for (const auto& row : linear) {
    double v = -row.bound;
    for (const auto& [j, a] : row.terms) v += a * x(j);
    worst = std::max(worst, row.relation == Relation::kEqual ? std::abs(v) : v);
  }
  for (const auto& soc : socs) {
    const double lhs = (soc.F * x + soc.g).norm();
    worst = std::max(worst, lhs - soc.c.dot(x) - soc.d);
  }
  return worst;
}

void ConicProblem::validate() const {
  if (Q.rows() != n || Q.cols() != n || q.size() != n || lower.size() != n || upper.size() != n) {
    throw Error("conic problem: objective or bound dimensions do not match n");
  }
  for (int j = 0; j < n; ++j) {
    if (lower(j) > upper(j)) throw Error("conic problem: lower bound exceeds upper bound");
  }
  for (const auto& row : linear) {
    for (const auto& [j, a] : row.terms) {
      if (j < 0 || j >= n || !std::isfinite(a)) throw Error("conic problem: bad linear term");
    }
  }
  for (const auto& soc : socs) {
    if (soc.F.cols() != n || soc.g.size() != soc.F.rows() || soc.c.size() != n) {
      throw Error("conic problem: inconsistent SOC dimensions");
    }
  }
  if (n > 0 && Q.cwiseAbs().maxCoeff() > 0.0) {
    const double scale = Q.cwiseAbs().maxCoeff();
    if (min_eigenvalue(Mat(0.5 * (Q + Q.transpose()))) < -1e-9 * scale) {
      throw Error("conic problem: objective matrix is not PSD");
    }
  }
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
    case SolveStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

void dump_problem(const ConicProblem& p, std::ostream& out) {
  out.precision(17);
  out << "n " << p.n << "\n";
  out << "objective_Q\n";
  for (int i = 0; i < p.n; ++i) {
    for (int j = 0; j < p.n; ++j) {
      if (p.Q(i, j) != 0.0) out << i << ' ' << j << ' ' << p.Q(i, j) << '\n';
    }
  }
  out << "objective_q\n";
  for (int j = 0; j < p.n; ++j) {
    if (p.q(j) != 0.0) out << 0 << ' ' << j << ' ' << p.q(j) << '\n';
  }
  out << "objective_constant " << p.constant << '\n';
  out << "linear " << p.linear.size() << '\n';
  for (std::size_t r = 0; r < p.linear.size(); ++r) {
    const auto& row = p.linear[r];
    for (const auto& [j, a] : row.terms) out << r << ' ' << j << ' ' << a << '\n';
  }
  out << "linear_rhs\n";
  for (std::size_t r = 0; r < p.linear.size(); ++r) {
    out << r << ' ' << (p.linear[r].relation == Relation::kEqual ? "=" : "<=") << ' '
        << p.linear[r].bound << '\n';
  }
  for (std::size_t k = 0; k < p.socs.size(); ++k) {
    const auto& s = p.socs[k];
    out << "soc " << k << " rows " << s.F.rows() << '\n';
    for (Eigen::Index i = 0; i < s.F.rows(); ++i) {
      for (Eigen::Index j = 0; j < s.F.cols(); ++j) {
        if (s.F(i, j) != 0.0) out << i << ' ' << j << ' ' << s.F(i, j) << '\n';
      }
    }
    out << "soc_g\n";
    for (Eigen::Index i = 0; i < s.g.size(); ++i) {
      if (s.g(i) != 0.0) out << i << ' ' << 0 << ' ' << s.g(i) << '\n';
    }
    out << "soc_c\n";
    for (Eigen::Index j = 0; j < s.c.size(); ++j) {
      if (s.c(j) != 0.0) out << 0 << ' ' << j << ' ' << s.c(j) << '\n';
    }
    out << "soc_d " << s.d << '\n';
  }
  out << "bounds\n";
  for (int j = 0; j < p.n; ++j) {
    if (std::isfinite(p.lower(j)) || std::isfinite(p.upper(j))) {
      out << j << ' ' << p.lower(j) << ' ' << p.upper(j) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Interior-point method

namespace {

using SpRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SpCol = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// min c'x  s.t.  A x = b,  G x + s = h,  s in (R_+^{n_lc} x SOC_1 x ... )
struct Standard {
  int n = 0;
  int n_lc = 0;
  std::vector<int> cone_dims;
  Vec c, b, h;
  SpRow A, G;
};

Standard standardize(const ConicProblem& p) {
  Standard s;
  const Mat L = psd_factor(0.5 * (p.Q + p.Q.transpose()));
  const bool has_quad = L.rows() > 0;
  const int t = p.n;
  s.n = p.n + (has_quad ? 1 : 0);
  s.c = Vec::Zero(s.n);
  s.c.head(p.n) = p.q;
  if (has_quad) s.c(t) = 1.0;

  std::vector<Triplet> gt;
  std::vector<double> h;
  std::vector<Triplet> at;
  std::vector<double> b;
  int row = 0;

  for (const auto& lc : p.linear) {
    if (lc.relation != Relation::kLessEqual) continue;
    for (const auto& [j, a] : lc.terms) gt.emplace_back(row, j, a);
    h.push_back(lc.bound);
    ++row;
  }
  for (int j = 0; j < p.n; ++j) {
    if (std::isfinite(p.lower(j))) {
      gt.emplace_back(row++, j, -1.0);
      h.push_back(-p.lower(j));
    }
    if (std::isfinite(p.upper(j))) {
      gt.emplace_back(row++, j, 1.0);
      h.push_back(p.upper(j));
    }
  }
  s.n_lc = row;

  auto add_dense_rows = [&](const Mat& F, double sign) {
    for (Eigen::Index i = 0; i < F.rows(); ++i) {
      for (Eigen::Index j = 0; j < F.cols(); ++j) {
        if (F(i, j) != 0.0) gt.emplace_back(row, static_cast<int>(j), sign * F(i, j));
      }
      ++row;
    }
  };
  for (const auto& soc : p.socs) {
    add_dense_rows(soc.c.transpose(), -1.0);
    h.push_back(soc.d);
    add_dense_rows(soc.F, -1.0);
    for (Eigen::Index i = 0; i < soc.g.size(); ++i) h.push_back(soc.g(i));
    s.cone_dims.push_back(static_cast<int>(soc.F.rows()) + 1);
  }
  if (has_quad) {
    gt.emplace_back(row++, t, -1.0);
    h.push_back(1.0);
    add_dense_rows(L, -2.0);
    for (Eigen::Index i = 0; i < L.rows(); ++i) h.push_back(0.0);
    gt.emplace_back(row++, t, -1.0);
    h.push_back(-1.0);
    s.cone_dims.push_back(static_cast<int>(L.rows()) + 2);
  }

  int eq = 0;
  for (const auto& lc : p.linear) {
    if (lc.relation != Relation::kEqual) continue;
    for (const auto& [j, a] : lc.terms) at.emplace_back(eq, j, a);
    b.push_back(lc.bound);
    ++eq;
  }

  s.G.resize(row, s.n);
  s.G.setFromTriplets(gt.begin(), gt.end());
  s.h = Eigen::Map<Vec>(h.data(), static_cast<Eigen::Index>(h.size()));
  s.A.resize(eq, s.n);
  s.A.setFromTriplets(at.begin(), at.end());
  s.b = Eigen::Map<Vec>(b.data(), static_cast<Eigen::Index>(b.size()));

  // Row equilibration: LP and equality rows individually, each cone by one factor.
  Vec scale = Vec::Ones(row);
  Vec norms = Vec::Zero(row);
  for (int i = 0; i < row; ++i) norms(i) = s.G.row(i).norm();
  for (int i = 0; i < s.n_lc; ++i) {
    if (norms(i) > 0.0) scale(i) = 1.0 / norms(i);
  }
  int start = s.n_lc;
  for (int dim : s.cone_dims) {
    const double m = norms.segment(start, dim).maxCoeff();
    if (m > 0.0) scale.segment(start, dim).setConstant(1.0 / m);
    start += dim;
  }
  s.G = scale.asDiagonal() * s.G;
  s.h = s.h.cwiseProduct(scale);
  for (int i = 0; i < eq; ++i) {
    const double nr = s.A.row(i).norm();
    if (nr > 0.0) {
      s.A.row(i) *= 1.0 / nr;
      s.b(i) /= nr;
    }
  }
  return s;
}

enum class Exit {
  kNotYet,
  kOptimal,
  kCloseOptimal,
  kPrimalInfeasible,
  kClosePrimalInfeasible,
  kDualInfeasible,
  kCloseDualInfeasible,
  kMaxIterations,
  kNumerics,
};

struct Info {
  double gap = 0.0, mu = 0.0, kapovert = 0.0, pcost = 0.0, dcost = 0.0;
  std::optional<double> relgap, pinfres, dinfres;
  double pres = 0.0, dres = 0.0;
  double step = 0.0, step_aff = 0.0, sigma = 0.0;
  int iter = 0;

  bool better_than(const Info& o) const {
    if (pinfres && kapovert > 1.0) {
      if (o.pinfres) {
        return gap > 0.0 && o.gap > 0.0 && gap < o.gap && *pinfres > 0.0 && *pinfres < o.pres &&
               mu > 0.0 && mu < o.mu;
      }
      return gap > 0.0 && o.gap > 0.0 && gap < o.gap && mu > 0.0 && mu < o.mu;
    }
    return gap > 0.0 && o.gap > 0.0 && gap < o.gap && pres > 0.0 && pres < o.pres && dres > 0.0 &&
           dres < o.dres && kapovert > 0.0 && kapovert < o.kapovert && mu > 0.0 && mu < o.mu;
  }
};

struct Iterate {
  Vec x, y, s, z;
  double kap = 1.0, tau = 1.0;
  Info info;
};

struct ConeScaling {
  int start = 0;
  int dim = 0;
  double eta = 1.0;
  double a = 1.0;
  Vec q;
};

class Ipm {
 public:
  Ipm(const Standard& st, const SolverSettings& settings) : st_(st), set_(settings) {
    n_ = st.n;
    p_ = static_cast<int>(st.A.rows());
    m_ = static_cast<int>(st.G.rows());
    n_lc_ = st.n_lc;
    int start = n_lc_;
    for (int d : st.cone_dims) {
      ConeScaling c;
      c.start = start;
      c.dim = d;
      c.q = Vec::Zero(d - 1);
      cones_.push_back(c);
      start += d;
    }
    Gt_ = SpCol(st.G.transpose());
    At_ = SpCol(st.A.transpose());
    // P_c = G_c' J G_c, fixed per problem.
    for (const auto& c : cones_) {
      SpRow gc = st.G.middleRows(c.start, c.dim);
      Vec jd = -Vec::Ones(c.dim);
      jd(0) = 1.0;
      SpCol jgc = SpCol(jd.asDiagonal() * gc);
      cone_blocks_.push_back(SpCol(gc.transpose()));
      Pc_.push_back(SpCol(SpCol(gc.transpose()) * jgc));
    }
    lp_v_ = Vec::Ones(n_lc_);
  }

  Exit run();
  const Iterate& result() const { return w_; }

 private:
  void update_scalings();
  bool cones_interior(const Vec& s, const Vec& z) const;
  Vec scale(const Vec& z) const;  // W z
  Vec apply_w2(const Vec& v) const;
  Vec apply_winv2(const Vec& v) const;
  bool factor();
  void solve_kkt(const Vec& bx, const Vec& by, const Vec& bz, Vec& dx, Vec& dy, Vec& dz) const;
  void bring_to_cone(const Vec& r, Vec& s) const;
  Vec conic_product(const Vec& u, const Vec& v) const;
  Vec conic_division(const Vec& u, const Vec& w) const;
  double line_search(const Vec& lambda, const Vec& ds, const Vec& dz, double tau, double dtau,
                     double kap, double dkap) const;
  void compute_residuals();
  void update_statistics();
  Exit check_exit(bool reduced) const;

  const Standard& st_;
  SolverSettings set_;
  int n_ = 0, p_ = 0, m_ = 0, n_lc_ = 0;
  std::vector<ConeScaling> cones_;
  std::vector<SpCol> cone_blocks_;  // G_c'
  std::vector<SpCol> Pc_;
  SpCol Gt_, At_;
  Vec lp_v_;  // W^2 on the LP block (s / z)
  bool identity_scaling_ = true;
  Eigen::LDLT<Mat> ldlt_;

  Iterate w_, best_;
  Vec lambda_;
  Vec rx_, ry_, rz_;
  double rt_ = 0.0;
  double hresx_ = 0.0, hresy_ = 0.0, hresz_ = 0.0;
  double cx_ = 0.0, by_ = 0.0, hz_ = 0.0;
  double nx_ = 0.0, ny_ = 0.0, nz_ = 0.0, ns_ = 0.0;
  double resx0_ = 1.0, resy0_ = 1.0, resz0_ = 1.0;
};

bool Ipm::cones_interior(const Vec& s, const Vec& z) const {
  for (int i = 0; i < n_lc_; ++i) {
    if (!(s(i) > 0.0) || !(z(i) > 0.0)) return false;
  }
  for (const auto& c : cones_) {
    const double sres = s(c.start) * s(c.start) - s.segment(c.start + 1, c.dim - 1).squaredNorm();
    const double zres = z(c.start) * z(c.start) - z.segment(c.start + 1, c.dim - 1).squaredNorm();
    if (!(sres > 0.0) || !(zres > 0.0) || !(s(c.start) > 0.0) || !(z(c.start) > 0.0)) return false;
  }
  return true;
}

void Ipm::update_scalings() {
  const Vec& s = w_.s;
  const Vec& z = w_.z;
  lp_v_ = s.head(n_lc_).cwiseQuotient(z.head(n_lc_));
  for (auto& c : cones_) {
    const double snorm = std::sqrt(s(c.start) * s(c.start) -
                                   s.segment(c.start + 1, c.dim - 1).squaredNorm());
    const double znorm = std::sqrt(z(c.start) * z(c.start) -
                                   z.segment(c.start + 1, c.dim - 1).squaredNorm());
    const Vec sb = s.segment(c.start, c.dim) / snorm;
    const Vec zb = z.segment(c.start, c.dim) / znorm;
    c.eta = std::sqrt(snorm / znorm);
    const double g = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
    c.a = (0.5 / g) * (sb(0) + zb(0));
    c.q = (0.5 / g) * (sb.tail(c.dim - 1) - zb.tail(c.dim - 1));
  }
  identity_scaling_ = false;
  lambda_ = scale(z);
}

Vec Ipm::scale(const Vec& z) const {
  Vec out(m_);
  out.head(n_lc_) = lp_v_.cwiseSqrt().cwiseProduct(z.head(n_lc_));
  for (const auto& c : cones_) {
    const auto z1 = z.segment(c.start + 1, c.dim - 1);
    const double zeta = c.q.dot(z1);
    const double factor = z(c.start) + zeta / (1.0 + c.a);
    out(c.start) = c.eta * (c.a * z(c.start) + zeta);
    out.segment(c.start + 1, c.dim - 1) = c.eta * (z1 + factor * c.q);
  }
  return out;
}

// W^2 v = eta^2 (2 wb (wb' v) - J v) per cone.
Vec Ipm::apply_w2(const Vec& v) const {
  if (identity_scaling_) return v;
  Vec out(m_);
  out.head(n_lc_) = lp_v_.cwiseProduct(v.head(n_lc_));
  for (const auto& c : cones_) {
    const auto v1 = v.segment(c.start + 1, c.dim - 1);
    const double wv = c.a * v(c.start) + c.q.dot(v1);
    const double e2 = c.eta * c.eta;
    out(c.start) = e2 * (2.0 * c.a * wv - v(c.start));
    out.segment(c.start + 1, c.dim - 1) = e2 * (2.0 * wv * c.q + v1);
  }
  return out;
}

// W^-2 v = eta^-2 (2 (J wb) ((J wb)' v) - J v).
Vec Ipm::apply_winv2(const Vec& v) const {
  if (identity_scaling_) return v;
  Vec out(m_);
  out.head(n_lc_) = v.head(n_lc_).cwiseQuotient(lp_v_);
  for (const auto& c : cones_) {
    const auto v1 = v.segment(c.start + 1, c.dim - 1);
    const double wv = c.a * v(c.start) - c.q.dot(v1);
    const double ie2 = 1.0 / (c.eta * c.eta);
    out(c.start) = ie2 * (2.0 * c.a * wv - v(c.start));
    out.segment(c.start + 1, c.dim - 1) = ie2 * (-2.0 * wv * c.q + v1);
  }
  return out;
}

bool Ipm::factor() {
  const int dim = n_ + p_;
  Mat K = Mat::Zero(dim, dim);
  auto H = K.topLeftCorner(n_, n_);
  if (identity_scaling_) {
    H = Mat(SpCol(Gt_ * st_.G));
  } else {
    for (int i = 0; i < n_lc_; ++i) {
      const double wt = 1.0 / lp_v_(i);
      for (SpRow::InnerIterator a(st_.G, i); a; ++a) {
        for (SpRow::InnerIterator b(st_.G, i); b; ++b) {
          if (b.col() <= a.col()) H(a.col(), b.col()) += wt * a.value() * b.value();
        }
      }
    }
    for (std::size_t k = 0; k < cones_.size(); ++k) {
      const auto& c = cones_[k];
      Vec jw(c.dim);
      jw(0) = c.a;
      jw.tail(c.dim - 1) = -c.q;
      const Vec v = cone_blocks_[k] * jw;
      const double ie2 = 1.0 / (c.eta * c.eta);
      H.selfadjointView<Eigen::Lower>().rankUpdate(v, 2.0 * ie2);
      for (int col = 0; col < Pc_[k].outerSize(); ++col) {
        for (SpCol::InnerIterator it(Pc_[k], col); it; ++it) {
          if (it.row() >= col) H(it.row(), col) -= ie2 * it.value();
        }
      }
    }
  }
  const double diag_scale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
  const double delta = set_.regularization * diag_scale;
  H.diagonal().array() += delta;
  if (p_ > 0) {
    K.bottomLeftCorner(p_, n_) = Mat(st_.A);
    K.bottomRightCorner(p_, p_).diagonal().setConstant(-delta);
  }
  ldlt_.compute(K);
  return ldlt_.info() == Eigen::Success;
}

void Ipm::solve_kkt(const Vec& bx, const Vec& by, const Vec& bz, Vec& dx, Vec& dy, Vec& dz) const {
  Vec rhs(n_ + p_);
  rhs.head(n_) = bx + Gt_ * apply_winv2(bz);
  if (p_ > 0) rhs.tail(p_) = by;
  Vec sol = ldlt_.solve(rhs);
  dx = sol.head(n_);
  dy = sol.tail(p_);
  dz = apply_winv2(st_.G * dx - bz);

  const double threshold =
      (1.0 + std::max({bx.lpNorm<Eigen::Infinity>(), p_ > 0 ? by.lpNorm<Eigen::Infinity>() : 0.0,
                       bz.size() > 0 ? bz.lpNorm<Eigen::Infinity>() : 0.0})) *
      1e-14;
  double prev = std::numeric_limits<double>::infinity();
  Vec last_dx, last_dy, last_dz;
  for (int k = 0; k <= set_.refinement_steps; ++k) {
    Vec ex = bx - Gt_ * dz;
    if (p_ > 0) ex -= At_ * dy;
    Vec ey = p_ > 0 ? Vec(by - st_.A * dx) : Vec(0);
    const Vec ez = bz - st_.G * dx + apply_w2(dz);
    double err = std::max(ex.lpNorm<Eigen::Infinity>(), ez.size() > 0 ? ez.lpNorm<Eigen::Infinity>() : 0.0);
    if (p_ > 0) err = std::max(err, ey.lpNorm<Eigen::Infinity>());
    if (!std::isfinite(err)) break;
    if (k > 0 && err > prev) {
      dx = last_dx;
      dy = last_dy;
      dz = last_dz;
      break;
    }
    if (err < threshold || k == set_.refinement_steps || (k > 0 && prev < 6.0 * err)) break;
    prev = err;
    last_dx = dx;
    last_dy = dy;
    last_dz = dz;
    Vec r(n_ + p_);
    r.head(n_) = ex + Gt_ * apply_winv2(ez);
    if (p_ > 0) r.tail(p_) = ey;
    const Vec corr = ldlt_.solve(r);
    dx += corr.head(n_);
    dy += corr.tail(p_);
    dz += apply_winv2(st_.G * corr.head(n_) - ez);
  }
}

void Ipm::bring_to_cone(const Vec& r, Vec& s) const {
  double alpha = -set_.gamma;
  for (int i = 0; i < n_lc_; ++i) {
    if (r(i) <= 0.0 && -r(i) > alpha) alpha = -r(i);
  }
  for (const auto& c : cones_) {
    const double cres = r(c.start) - r.segment(c.start + 1, c.dim - 1).norm();
    if (cres <= 0.0 && -cres > alpha) alpha = -cres;
  }
  alpha += 1.0;
  s = r;
  s.head(n_lc_).array() += alpha;
  for (const auto& c : cones_) s(c.start) += alpha;
}

Vec Ipm::conic_product(const Vec& u, const Vec& v) const {
  Vec w(m_);
  w.head(n_lc_) = u.head(n_lc_).cwiseProduct(v.head(n_lc_));
  for (const auto& c : cones_) {
    w(c.start) = u.segment(c.start, c.dim).dot(v.segment(c.start, c.dim));
    w.segment(c.start + 1, c.dim - 1) = u(c.start) * v.segment(c.start + 1, c.dim - 1) +
                                        v(c.start) * u.segment(c.start + 1, c.dim - 1);
  }
  return w;
}

Vec Ipm::conic_division(const Vec& u, const Vec& w) const {
  Vec v(m_);
  v.head(n_lc_) = w.head(n_lc_).cwiseQuotient(u.head(n_lc_));
  for (const auto& c : cones_) {
    const double u0 = u(c.start);
    const double w0 = w(c.start);
    const auto u1 = u.segment(c.start + 1, c.dim - 1);
    const auto w1 = w.segment(c.start + 1, c.dim - 1);
    const double rho = u0 * u0 - u1.squaredNorm();
    const double zeta = u1.dot(w1);
    const double factor = (zeta / u0 - w0) / rho;
    v(c.start) = (u0 * w0 - zeta) / rho;
    v.segment(c.start + 1, c.dim - 1) = factor * u1 + w1 / u0;
  }
  return v;
}

double Ipm::line_search(const Vec& lambda, const Vec& ds, const Vec& dz, double tau, double dtau,
                        double kap, double dkap) const {
  double alpha = 10.0;
  if (n_lc_ > 0) {
    const double rhomin = ds.head(n_lc_).cwiseQuotient(lambda.head(n_lc_)).minCoeff();
    const double sigmamin = dz.head(n_lc_).cwiseQuotient(lambda.head(n_lc_)).minCoeff();
    const double eps = 1e-13;
    if (-sigmamin > -rhomin) {
      alpha = sigmamin < 0.0 ? 1.0 / (-sigmamin) : 1.0 / eps;
    } else {
      alpha = rhomin < 0.0 ? 1.0 / (-rhomin) : 1.0 / eps;
    }
  }
  const double mt = -tau / dtau;
  const double mk = -kap / dkap;
  if (mt > 0.0 && mt < alpha) alpha = mt;
  if (mk > 0.0 && mk < alpha) alpha = mk;

  for (const auto& c : cones_) {
    const auto l = lambda.segment(c.start, c.dim);
    const double lknorm2 = l(0) * l(0) - l.tail(c.dim - 1).squaredNorm();
    if (lknorm2 <= 0.0) continue;
    const double lknorm = std::sqrt(lknorm2);
    const Vec lb = l / lknorm;
    const auto dsk = ds.segment(c.start, c.dim);
    const auto dzk = dz.segment(c.start, c.dim);
    const double lds = lb(0) * dsk(0) - lb.tail(c.dim - 1).dot(dsk.tail(c.dim - 1));
    const double ldz = lb(0) * dzk(0) - lb.tail(c.dim - 1).dot(dzk.tail(c.dim - 1));
    const double f1 = (lds + dsk(0)) / (lb(0) + 1.0);
    const double rho0 = lds / lknorm;
    const double rhonorm = ((dsk.tail(c.dim - 1) - f1 * lb.tail(c.dim - 1)) / lknorm).norm() - rho0;
    const double f2 = (ldz + dzk(0)) / (lb(0) + 1.0);
    const double sig0 = ldz / lknorm;
    const double signorm = ((dzk.tail(c.dim - 1) - f2 * lb.tail(c.dim - 1)) / lknorm).norm() - sig0;
    const double step = std::max({0.0, signorm, rhonorm});
    if (step != 0.0) alpha = std::min(alpha, 1.0 / step);
  }
  return std::clamp(alpha, 1e-6, 0.999);
}

void Ipm::compute_residuals() {
  rx_ = -(Gt_ * w_.z);
  if (p_ > 0) rx_ -= At_ * w_.y;
  hresx_ = rx_.norm();
  rx_ -= w_.tau * st_.c;
  if (p_ > 0) {
    ry_ = st_.A * w_.x;
    hresy_ = ry_.norm();
    ry_ -= w_.tau * st_.b;
  } else {
    ry_ = Vec(0);
    hresy_ = 0.0;
  }
  rz_ = w_.s + st_.G * w_.x;
  hresz_ = rz_.norm();
  rz_ -= w_.tau * st_.h;
  cx_ = st_.c.dot(w_.x);
  by_ = p_ > 0 ? st_.b.dot(w_.y) : 0.0;
  hz_ = st_.h.dot(w_.z);
  rt_ = w_.kap + cx_ + by_ + hz_;
  nx_ = w_.x.norm();
  ny_ = w_.y.norm();
  nz_ = w_.z.norm();
  ns_ = w_.s.norm();
}

void Ipm::update_statistics() {
  Info& i = w_.info;
  i.gap = w_.s.dot(w_.z);
  i.mu = (i.gap + w_.kap * w_.tau) / static_cast<double>(n_lc_ + cones_.size() + 1);
  i.kapovert = w_.kap / w_.tau;
  i.pcost = cx_ / w_.tau;
  i.dcost = -(hz_ + by_) / w_.tau;
  i.relgap.reset();
  if (i.pcost < 0.0) {
    i.relgap = i.gap / (-i.pcost);
  } else if (i.dcost > 0.0) {
    i.relgap = i.gap / i.dcost;
  }
  const double nry = p_ > 0 ? ry_.norm() / std::max(resy0_ + nx_, 1.0) : 0.0;
  const double nrz = rz_.norm() / std::max(resz0_ + nx_ + ns_, 1.0);
  i.pres = std::max(nry, nrz) / w_.tau;
  i.dres = rx_.norm() / std::max(resx0_ + ny_ + nz_, 1.0) / w_.tau;
  i.pinfres.reset();
  i.dinfres.reset();
  if ((hz_ + by_) / std::max(ny_ + nz_, 1.0) < -set_.reltol) {
    i.pinfres = hresx_ / std::max(ny_ + nz_, 1.0);
  }
  if (cx_ / std::max(nx_, 1.0) < -set_.reltol) {
    i.dinfres = std::max(hresy_ / std::max(nx_, 1.0), hresz_ / std::max(nx_ + ns_, 1.0));
  }
}

Exit Ipm::check_exit(bool reduced) const {
  const double feastol = reduced ? set_.feastol_inacc : set_.feastol;
  const double abstol = reduced ? set_.abstol_inacc : set_.abstol;
  const double reltol = reduced ? set_.reltol_inacc : set_.reltol;
  const Info& i = w_.info;
  if ((-cx_ > 0.0 || -by_ - hz_ >= -abstol) && i.pres < feastol && i.dres < feastol &&
      (i.gap < abstol || (i.relgap && *i.relgap < reltol))) {
    return reduced ? Exit::kCloseOptimal : Exit::kOptimal;
  }
  if (i.dinfres && *i.dinfres < feastol && w_.tau < w_.kap) {
    return reduced ? Exit::kCloseDualInfeasible : Exit::kDualInfeasible;
  }
  if ((i.pinfres && *i.pinfres < feastol && w_.tau < w_.kap) ||
      (w_.tau < feastol && w_.kap < feastol && i.pinfres && *i.pinfres < feastol)) {
    return reduced ? Exit::kClosePrimalInfeasible : Exit::kPrimalInfeasible;
  }
  return Exit::kNotYet;
}

Exit Ipm::run() {
  resx0_ = std::max(1.0, st_.c.norm());
  resy0_ = std::max(1.0, st_.b.norm());
  resz0_ = std::max(1.0, st_.h.norm());

  identity_scaling_ = true;
  if (!factor()) return Exit::kNumerics;

  Vec dx1, dy1, dz1, dx2, dy2, dz2;
  const Vec zero_x = Vec::Zero(n_);
  const Vec zero_y = Vec::Zero(p_);
  const Vec zero_z = Vec::Zero(m_);
  // Primal start: least-squares fit of G x ~ h subject to A x = b.
  solve_kkt(zero_x, st_.b, st_.h, dx1, dy1, dz1);
  w_.x = dx1;
  bring_to_cone(-dz1, w_.s);
  // Dual start: minimum-norm z with G'z + A'y + c = 0.
  solve_kkt(-st_.c, zero_y, zero_z, dx2, dy2, dz2);
  w_.y = dy2;
  bring_to_cone(dz2, w_.z);
  w_.kap = 1.0;
  w_.tau = 1.0;

  Exit code = Exit::kNumerics;
  double pres_prev = std::numeric_limits<double>::max();
  for (int it = 0; it <= set_.max_iterations; ++it) {
    w_.info.iter = it;
    compute_residuals();
    update_statistics();

    if (it > 0 && (w_.info.pres > 500.0 * pres_prev || w_.info.gap < 0.0)) {
      w_ = best_;
      compute_residuals();
      update_statistics();
      code = check_exit(true);
      if (code == Exit::kNotYet) code = Exit::kNumerics;
      break;
    }
    pres_prev = w_.info.pres;

    code = check_exit(false);
    if (code != Exit::kNotYet) break;
    if (it > 0 && w_.info.step == 1e-6 * set_.gamma) {
      w_ = best_;
      compute_residuals();
      update_statistics();
      code = check_exit(true);
      if (code == Exit::kNotYet) code = Exit::kNumerics;
      break;
    }
    if (it == set_.max_iterations) {
      if (!w_.info.better_than(best_.info)) w_ = best_;
      compute_residuals();
      update_statistics();
      code = check_exit(true);
      if (code == Exit::kNotYet) code = Exit::kMaxIterations;
      break;
    }
    if (!std::isfinite(w_.info.pcost)) {
      if (it > 0) w_ = best_;
      compute_residuals();
      update_statistics();
      code = check_exit(true);
      if (code == Exit::kNotYet) code = Exit::kNumerics;
      break;
    }
    if (it == 0 || w_.info.better_than(best_.info)) best_ = w_;

    if (!cones_interior(w_.s, w_.z)) {
      w_ = best_;
      compute_residuals();
      update_statistics();
      code = check_exit(true);
      if (code == Exit::kNotYet) code = Exit::kNumerics;
      break;
    }
    update_scalings();
    if (!factor()) {
      w_ = best_;
      compute_residuals();
      update_statistics();
      code = check_exit(true);
      if (code == Exit::kNotYet) code = Exit::kNumerics;
      break;
    }

    solve_kkt(-st_.c, st_.b, st_.h, dx1, dy1, dz1);

    // Affine direction.
    solve_kkt(rx_, -ry_, w_.s - rz_, dx2, dy2, dz2);
    const double by1 = p_ > 0 ? st_.b.dot(dy1) : 0.0;
    const double by2a = p_ > 0 ? st_.b.dot(dy2) : 0.0;
    const double dtau_denom = w_.kap / w_.tau - st_.c.dot(dx1) - by1 - st_.h.dot(dz1);
    const double dtauaff = (rt_ - w_.kap + st_.c.dot(dx2) + by2a + st_.h.dot(dz2)) / dtau_denom;
    dz2 += dtauaff * dz1;
    const Vec w_dzaff = scale(dz2);
    const Vec dsaff_by_w = -w_dzaff - lambda_;
    const double dkapaff = -w_.kap - w_.kap / w_.tau * dtauaff;
    w_.info.step_aff = line_search(lambda_, dsaff_by_w, w_dzaff, w_.tau, dtauaff, w_.kap, dkapaff);
    const double sigma = std::clamp(std::pow(1.0 - w_.info.step_aff, 3), 1e-4, 1.0);
    w_.info.sigma = sigma;

    // Combined direction.
    Vec ds = conic_product(lambda_, lambda_) + conic_product(dsaff_by_w, w_dzaff);
    const double sigmamu = sigma * w_.info.mu;
    ds.head(n_lc_).array() -= sigmamu;
    for (const auto& c : cones_) ds(c.start) -= sigmamu;
    const Vec lambda_div_ds = conic_division(lambda_, ds);
    const Vec w_lds = scale(lambda_div_ds);
    const double oms = 1.0 - sigma;
    solve_kkt(oms * rx_, -oms * ry_, -oms * rz_ + w_lds, dx2, dy2, dz2);
    const double bkap = w_.kap * w_.tau + dkapaff * dtauaff - sigma * w_.info.mu;
    const double by2 = p_ > 0 ? st_.b.dot(dy2) : 0.0;
    const double dtau =
        (oms * rt_ - bkap / w_.tau + st_.c.dot(dx2) + by2 + st_.h.dot(dz2)) / dtau_denom;
    dx2 += dtau * dx1;
    if (p_ > 0) dy2 += dtau * dy1;
    dz2 += dtau * dz1;
    const Vec w_dz = scale(dz2);
    const Vec ds_by_w = -(lambda_div_ds + w_dz);
    const double dkap = -(bkap + w_.kap * dtau) / w_.tau;
    w_.info.step = set_.gamma * line_search(lambda_, ds_by_w, w_dz, w_.tau, dtau, w_.kap, dkap);
    const Vec dsv = scale(ds_by_w);

    const double step = w_.info.step;
    w_.x += step * dx2;
    if (p_ > 0) w_.y += step * dy2;
    w_.z += step * dz2;
    w_.s += step * dsv;
    w_.kap += step * dkap;
    w_.tau += step * dtau;
  }
  return code;
}

ConicSolution solve_once(const ConicProblem& p, const SolverSettings& settings, bool& close) {
  close = false;
  ConicSolution out;
  out.x = Vec::Zero(p.n);
  const Standard st = standardize(p);
  Ipm ipm(st, settings);
  const Exit code = ipm.run();
  const Iterate& w = ipm.result();
  out.iterations = w.info.iter;

  switch (code) {
    case Exit::kPrimalInfeasible:
    case Exit::kClosePrimalInfeasible:
      out.status = SolveStatus::kInfeasible;
      return out;
    case Exit::kDualInfeasible:
    case Exit::kCloseDualInfeasible:
      out.status = SolveStatus::kUnbounded;
      return out;
    default:
      break;
  }
  if (w.tau > 0.0 && w.x.size() == st.n) {
    out.x = w.x.head(p.n) / w.tau;
    out.x = out.x.cwiseMax(p.lower).cwiseMin(p.upper);
  }
  out.objective_value = p.objective(out.x);
  out.max_primal_residual = p.max_violation(out.x);
  if (!std::isfinite(out.max_primal_residual)) out.max_primal_residual = kInf;

  if (code == Exit::kOptimal || code == Exit::kCloseOptimal) {
    close = true;
    out.status = out.max_primal_residual <= settings.residual_tol ? SolveStatus::kOptimal
                                                                   : SolveStatus::kNumericalFailure;
  } else if (code == Exit::kMaxIterations) {
    out.status = SolveStatus::kIterationLimit;
  } else {
    out.status = SolveStatus::kNumericalFailure;
  }
  return out;
}

}  // namespace

ConicSolution solve(const ConicProblem& p, const SolverSettings& settings) {
  p.validate();
  bool close = false;
  ConicSolution out = solve_once(p, settings, close);
  // A near-optimal point that misses the residual tolerance slightly is
  // re-solved with the inequalities pulled in by a small margin.
  ConicProblem tight = p;
  for (int attempt = 0; attempt < 3 && close && out.status != SolveStatus::kOptimal &&
                        out.max_primal_residual < 1e-4;
       ++attempt) {
    const double margin = 10.0 * out.max_primal_residual;
    for (auto& row : tight.linear) {
      if (row.relation == Relation::kLessEqual) row.bound -= margin;
    }
    for (auto& soc : tight.socs) soc.d -= margin;
    const int spent = out.iterations;
    ConicSolution retry = solve_once(tight, settings, close);
    retry.iterations += spent;
    retry.objective_value = p.objective(retry.x);
    retry.max_primal_residual = p.max_violation(retry.x);
    if (close && retry.max_primal_residual <= settings.residual_tol) retry.status = SolveStatus::kOptimal;
    out = std::move(retry);
  }
  return out;
}

}  // namespace cfisac
