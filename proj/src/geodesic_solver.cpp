#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Sparse>

#include "warpfill/error.hpp"
#include "warpfill/warp_engine.hpp"

namespace warpfill {

namespace {

// Polyline in lifted chart coordinates (r, e, theta) with per-vertex fixed
// coordinate groups and per-segment energy weights. A through-core chain
// pins core_vertex to the core; theta switches from p's to q's there.
struct Chain {
  Eigen::MatrixXd X;
  std::vector<std::array<bool, 3>> fixed;  // r, e, theta
  std::vector<double> weight;
  int core_vertex = -1;

  int vertices() const { return static_cast<int>(X.rows()); }
  int segments() const { return vertices() - 1; }
};

struct Layout {
  int k = 0;
  int d = 0;
  int D = 1;
  int group_of(int c) const { return c == 0 ? 0 : c <= k ? 1 : 2; }
};

// Integral over [0, 1] of w(a + s (b - a))^2 and its derivatives in a and b,
// by three-point Gauss.
struct SquaredWarp {
  double v = 0, da = 0, db = 0, daa = 0, dab = 0, dbb = 0;
};

SquaredWarp squared_warp(const Warp& w, double a, double b, bool derivatives) {
  static const double s[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  static const double wt[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  SquaredWarp out;
  for (int j = 0; j < 3; ++j) {
    const double x = a + s[j] * (b - a);
    const double w0 = w(x, 0);
    out.v += wt[j] * w0 * w0;
    if (!derivatives) continue;
    const double w1 = w(x, 1);
    const double w2 = w(x, 2);
    const double h1 = 2.0 * w0 * w1;
    const double h2 = 2.0 * (w1 * w1 + w0 * w2);
    out.da += wt[j] * h1 * (1.0 - s[j]);
    out.db += wt[j] * h1 * s[j];
    out.daa += wt[j] * h2 * (1.0 - s[j]) * (1.0 - s[j]);
    out.dab += wt[j] * h2 * s[j] * (1.0 - s[j]);
    out.dbb += wt[j] * h2 * s[j] * s[j];
  }
  return out;
}

class Energy {
 public:
  Energy(const WarpedSpace& space, const Layout& layout) : space_(space), L_(layout) {
    if (space.torus) gram_ = space.torus->gram();
  }

  double value(const Chain& c) const {
    double total = 0.0;
    for (int i = 0; i < c.segments(); ++i) total += c.weight[i] * segment(c, i, nullptr, nullptr);
    return total;
  }

  // Full gradient and dense 2D x 2D segment Hessian blocks.
  double evaluate(const Chain& c, Eigen::VectorXd& grad, std::vector<Eigen::MatrixXd>& blocks) const {
    const int D = L_.D;
    grad.setZero(c.vertices() * D);
    blocks.assign(c.segments(), Eigen::MatrixXd::Zero(2 * D, 2 * D));
    double total = 0.0;
    Eigen::VectorXd g(2 * D);
    for (int i = 0; i < c.segments(); ++i) {
      g.setZero();
      total += c.weight[i] * segment(c, i, &g, &blocks[i]);
      blocks[i] *= c.weight[i];
      grad.segment(i * D, 2 * D) += c.weight[i] * g;
    }
    return total;
  }

 private:
  double segment(const Chain& c, int i, Eigen::VectorXd* g, Eigen::MatrixXd* H) const {
    const int k = L_.k, d = L_.d, D = L_.D;
    const auto a = c.X.row(i);
    const auto b = c.X.row(i + 1);
    const double ra = a[0], rb = b[0];
    const double dr = rb - ra;
    double e = dr * dr;
    const bool derivs = g != nullptr;
    if (derivs) {
      (*g)[0] = -2.0 * dr;
      (*g)[D] = 2.0 * dr;
      (*H)(0, 0) += 2.0;
      (*H)(D, D) += 2.0;
      (*H)(0, D) -= 2.0;
      (*H)(D, 0) -= 2.0;
    }
    auto fiber = [&](int offset, int dim, const Warp& w, const Eigen::MatrixXd* metric) {
      const Eigen::VectorXd delta = (b.segment(offset, dim) - a.segment(offset, dim)).transpose();
      const Eigen::VectorXd mdelta = metric ? Eigen::VectorXd(*metric * delta) : delta;
      const double q = delta.dot(mdelta);
      const SquaredWarp sw = squared_warp(w, ra, rb, derivs);
      e += sw.v * q;
      if (!derivs) return;
      const int ia = offset, ib = D + offset;
      (*g)[0] += sw.da * q;
      (*g)[D] += sw.db * q;
      (*g).segment(ia, dim) -= 2.0 * sw.v * mdelta;
      (*g).segment(ib, dim) += 2.0 * sw.v * mdelta;
      (*H)(0, 0) += sw.daa * q;
      (*H)(D, D) += sw.dbb * q;
      (*H)(0, D) += sw.dab * q;
      (*H)(D, 0) += sw.dab * q;
      const Eigen::VectorXd ca = 2.0 * sw.da * mdelta;
      const Eigen::VectorXd cb = 2.0 * sw.db * mdelta;
      H->block(0, ia, 1, dim) -= ca.transpose();
      H->block(0, ib, 1, dim) += ca.transpose();
      H->block(D, ia, 1, dim) -= cb.transpose();
      H->block(D, ib, 1, dim) += cb.transpose();
      H->block(ia, 0, dim, 1) -= ca;
      H->block(ib, 0, dim, 1) += ca;
      H->block(ia, D, dim, 1) -= cb;
      H->block(ib, D, dim, 1) += cb;
      const Eigen::MatrixXd M = metric ? *metric : Eigen::MatrixXd::Identity(dim, dim);
      H->block(ia, ia, dim, dim) += 2.0 * sw.v * M;
      H->block(ib, ib, dim, dim) += 2.0 * sw.v * M;
      H->block(ia, ib, dim, dim) -= 2.0 * sw.v * M;
      H->block(ib, ia, dim, dim) -= 2.0 * sw.v * M;
    };
    if (k > 0) fiber(1, k, space_.warp_g, nullptr);
    if (d > 0) fiber(1 + k, d, space_.warp_f, &gram_);
    return e;
  }

  const WarpedSpace& space_;
  Layout L_;
  Eigen::MatrixXd gram_;
};

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  double energy = 0.0;
};

class NewtonSolver {
 public:
  NewtonSolver(const WarpedSpace& space, const Layout& layout, const SolverOptions& options)
      : space_(space), L_(layout), energy_(space, layout), opt_(options) {}

  NewtonOutcome minimize(Chain& c) const {
    const int D = L_.D;
    const int n = c.vertices() * D;
    NewtonOutcome out;
    Eigen::VectorXd grad;
    std::vector<Eigen::MatrixXd> blocks;
    double mu = 0.0;
    for (int it = 0; it < opt_.max_newton; ++it) {
      const double E = energy_.evaluate(c, grad, blocks);
      out.energy = E;
      // Free variables, minus lower/upper r bounds that the gradient pushes against.
      std::vector<int> index(n, -1);
      int m = 0;
      double residual = 0.0;
      for (int v = 0; v < c.vertices(); ++v) {
        for (int comp = 0; comp < D; ++comp) {
          if (c.fixed[v][L_.group_of(comp)]) continue;
          const int id = v * D + comp;
          if (comp == 0) {
            const double r = c.X(v, 0);
            if (r <= space_.r_min && grad[id] > 0.0) continue;
            if (r >= space_.r_max && grad[id] < 0.0) continue;
          }
          index[id] = m++;
          residual = std::max(residual, std::abs(grad[id]));
        }
      }
      out.residual = residual;
      out.iterations = it;
      if (residual < opt_.gradient_tol) {
        out.converged = true;
        return out;
      }
      if (m == 0) return out;

      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(static_cast<std::size_t>(blocks.size()) * 4 * D * D);
      double diag_scale = 0.0;
      for (int s = 0; s < c.segments(); ++s) {
        const Eigen::MatrixXd& B = blocks[s];
        for (int i = 0; i < 2 * D; ++i) {
          const int gi = index[s * D + i];
          if (gi < 0) continue;
          diag_scale = std::max(diag_scale, std::abs(B(i, i)));
          for (int j = 0; j < 2 * D; ++j) {
            const int gj = index[s * D + j];
            if (gj >= 0 && gj <= gi && B(i, j) != 0.0) trip.emplace_back(gi, gj, B(i, j));
          }
        }
      }
      Eigen::VectorXd rhs(m);
      for (int id = 0; id < n; ++id)
        if (index[id] >= 0) rhs[index[id]] = -grad[id];

      bool stepped = false;
      double moved = 0.0;
      for (int attempt = 0; attempt < 40 && !stepped; ++attempt) {
        std::vector<Eigen::Triplet<double>> shifted = trip;
        for (int i = 0; i < m; ++i) shifted.emplace_back(i, i, mu);
        Eigen::SparseMatrix<double> H(m, m);
        H.setFromTriplets(shifted.begin(), shifted.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt(H);
        const bool pd = ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0;
        if (pd) {
          const Eigen::VectorXd step = ldlt.solve(rhs);
          moved = line_search(c, index, step, grad, E);
          stepped = moved >= 0.0;
        }
        if (!stepped) mu = mu == 0.0 ? 1e-10 * std::max(1.0, diag_scale) : 10.0 * mu;
        if (mu > 1e12 * std::max(1.0, diag_scale)) break;
      }
      if (!stepped) return out;
      if (mu == 0.0 && moved <= 1e-10 * (1.0 + c.X.lpNorm<Eigen::Infinity>())) {
        out.converged = true;
        return out;
      }
      mu *= 0.1;
      if (mu < 1e-14 * std::max(1.0, diag_scale)) mu = 0.0;
    }
    out.iterations = opt_.max_newton;
    return out;
  }

  double energy(const Chain& c) const { return energy_.value(c); }

 private:
  // Largest coordinate change of the accepted step, or -1 when none is found.
  double line_search(Chain& c, const std::vector<int>& index, const Eigen::VectorXd& step, const Eigen::VectorXd& grad,
                     double E) const {
    const int D = L_.D;
    const Eigen::MatrixXd start = c.X;
    double alpha = 1.0;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      double decrease = 0.0;
      for (int v = 0; v < c.vertices(); ++v) {
        for (int comp = 0; comp < D; ++comp) {
          const int id = v * D + comp;
          if (index[id] < 0) continue;
          double x = start(v, comp) + alpha * step[index[id]];
          if (comp == 0) x = std::clamp(x, space_.r_min, space_.r_max);
          c.X(v, comp) = x;
          decrease += grad[id] * (x - start(v, comp));
        }
      }
      const double trial = energy_.value(c);
      if (decrease < 0.0 && trial <= E + 1e-4 * decrease) return (c.X - start).lpNorm<Eigen::Infinity>();
    }
    c.X = start;
    return -1.0;
  }

  const WarpedSpace& space_;
  Layout L_;
  Energy energy_;
  SolverOptions opt_;
};

Chain prolongate(const Chain& c) {
  Chain out;
  const int D = static_cast<int>(c.X.cols());
  std::vector<Eigen::RowVectorXd> rows;
  out.core_vertex = c.core_vertex < 0 ? -1 : 2 * c.core_vertex;
  for (int i = 0; i < c.segments(); ++i) {
    rows.push_back(c.X.row(i));
    out.fixed.push_back(c.fixed[i]);
    rows.push_back(0.5 * (c.X.row(i) + c.X.row(i + 1)));
    std::array<bool, 3> f{};
    for (int g = 0; g < 3; ++g) f[g] = c.fixed[i][g] && c.fixed[i + 1][g];
    out.fixed.push_back(f);
    out.weight.push_back(2.0 * c.weight[i]);
    out.weight.push_back(2.0 * c.weight[i]);
  }
  rows.push_back(c.X.row(c.vertices() - 1));
  out.fixed.push_back(c.fixed.back());
  out.X.resize(static_cast<Eigen::Index>(rows.size()), D);
  for (std::size_t i = 0; i < rows.size(); ++i) out.X.row(static_cast<Eigen::Index>(i)) = rows[i];
  return out;
}

Eigen::RowVectorXd lifted_row(const Layout& L, const WPoint& p, const Eigen::VectorXd& theta) {
  Eigen::RowVectorXd row(L.D);
  row[0] = p.r;
  if (L.k > 0) row.segment(1, L.k) = p.e.transpose();
  if (L.d > 0) row.segment(1 + L.k, L.d) = theta.transpose();
  return row;
}

Chain straight_chain(const Layout& L, const WPoint& p, const WPoint& q, const Eigen::VectorXd& theta_q, int n) {
  Chain c;
  c.X.resize(n + 1, L.D);
  const Eigen::RowVectorXd a = lifted_row(L, p, p.theta);
  const Eigen::RowVectorXd b = lifted_row(L, q, theta_q);
  for (int i = 0; i <= n; ++i) {
    c.X.row(i) = a + (static_cast<double>(i) / n) * (b - a);
    c.fixed.push_back({false, false, false});
  }
  c.fixed.front() = {true, true, true};
  c.fixed.back() = {true, true, true};
  c.weight.assign(n, n);
  return c;
}

// p -> core -> q; theta is frozen at theta_p and switches to theta_q at the
// core vertex, where the torus warp vanishes.
Chain core_chain(const Layout& L, const WarpedSpace& space, const WPoint& p, const WPoint& q, int half) {
  const double wp = p.r - space.r_min, wq = q.r - space.r_min;
  const double t = wp / (wp + wq);
  WPoint mid = p;
  mid.r = space.r_min;
  mid.e = p.e + t * (q.e - p.e);
  const Eigen::RowVectorXd a = lifted_row(L, p, p.theta);
  const Eigen::RowVectorXd m = lifted_row(L, mid, p.theta);
  const Eigen::RowVectorXd b = lifted_row(L, q, p.theta);
  Chain c;
  c.X.resize(2 * half + 1, L.D);
  for (int i = 0; i <= half; ++i) {
    c.X.row(i) = a + (static_cast<double>(i) / half) * (m - a);
    c.X.row(half + i) = m + (static_cast<double>(i) / half) * (b - m);
  }
  c.fixed.assign(2 * half + 1, {false, false, true});
  c.fixed.front() = {true, true, true};
  c.fixed.back() = {true, true, true};
  c.fixed[half] = {true, false, true};
  c.core_vertex = half;
  c.weight.assign(2 * half, 2 * half);
  return c;
}

// Sum of segment lengths of the discrete energy over [begin, end).
double piece_length(const WarpedSpace& space, const Layout& L, const Chain& c, int begin, int end) {
  double total = 0.0;
  for (int i = begin; i < end; ++i) {
    const double ra = c.X(i, 0), rb = c.X(i + 1, 0);
    double e = (rb - ra) * (rb - ra);
    if (L.k > 0) {
      const double q = (c.X.row(i + 1).segment(1, L.k) - c.X.row(i).segment(1, L.k)).squaredNorm();
      e += squared_warp(space.warp_g, ra, rb, false).v * q;
    }
    total += std::sqrt(e);
  }
  return total;
}

// Weights n_p * L / L_p per piece, so that a stationary weighted energy is a
// stationary total length.
bool reweight(const WarpedSpace& space, const Layout& L, Chain& c) {
  const int n1 = c.core_vertex, n2 = c.segments() - c.core_vertex;
  const double l1 = std::max(piece_length(space, L, c, 0, n1), 1e-300);
  const double l2 = std::max(piece_length(space, L, c, n1, c.segments()), 1e-300);
  const double w1 = n1 * (l1 + l2) / l1, w2 = n2 * (l1 + l2) / l2;
  const double change = std::max(std::abs(w1 - c.weight.front()) / w1, std::abs(w2 - c.weight.back()) / w2);
  for (int i = 0; i < c.segments(); ++i) c.weight[i] = i < n1 ? w1 : w2;
  return change > 1e-12;
}

PolylinePath to_path(const Layout& L, const Chain& c, const WPoint& p, const WPoint& q) {
  PolylinePath path;
  const int n = c.vertices();
  std::vector<Eigen::VectorXd> lift(n);
  for (int i = 0; i < n; ++i) {
    WPoint v;
    v.r = c.X(i, 0);
    v.e = L.k > 0 ? Eigen::VectorXd(c.X.row(i).segment(1, L.k).transpose()) : Eigen::VectorXd();
    Eigen::VectorXd theta = L.d > 0 ? Eigen::VectorXd(c.X.row(i).segment(1 + L.k, L.d).transpose()) : Eigen::VectorXd();
    if (c.core_vertex >= 0 && i > c.core_vertex) theta = q.theta;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(L.d);
    if (i == 0) {
      v = p;
    } else if (i == n - 1) {
      m = theta - q.theta;
      v = q;
    } else {
      for (int j = 0; j < L.d; ++j) m[j] = std::floor(theta[j]);
      v.theta = theta - m;
    }
    for (int j = 0; j < L.d; ++j) m[j] = std::round(m[j]);
    lift[i] = m;
    path.vertices.push_back(v);
  }
  if (c.core_vertex >= 0) {
    const auto core = static_cast<std::size_t>(c.core_vertex);
    WPoint twin = path.vertices[core];
    twin.theta = q.theta;
    path.vertices.insert(path.vertices.begin() + static_cast<long>(core) + 1, twin);
    lift.insert(lift.begin() + static_cast<long>(core) + 1, Eigen::VectorXd::Zero(L.d));
  }
  for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i)
    path.deck_shifts.push_back((lift[i + 1] - lift[i]).cast<int>());
  return path;
}

struct Candidate {
  Chain chain;
  bool through_core = false;
  NewtonOutcome last{};
  int iterations = 0;
  double distance = std::numeric_limits<double>::infinity();
  PolylinePath path{};
};

}  // namespace

GeodesicResult solve_geodesic(const WarpedSpace& space, const WPoint& p_in, const WPoint& q_in,
                              const SolverOptions& options) {
  if (options.n_segments < 8) throw Error(ErrorCode::InvalidInput, "n_segments must be >= 8");
  for (const WPoint* x : {&p_in, &q_in}) {
    if (!(x->r >= space.r_min - 1e-12 && x->r <= space.r_max + 1e-12))
      throw Error(ErrorCode::OutOfDomain, "r=" + std::to_string(x->r) + " outside the space interval");
    if (x->e.size() != space.euclid_dim || x->theta.size() != space.torus_dim())
      throw Error(ErrorCode::OutOfDomain, "point has the wrong number of coordinates");
  }
  WPoint p = p_in, q = q_in;
  p.r = std::clamp(p.r, space.r_min, space.r_max);
  q.r = std::clamp(q.r, space.r_min, space.r_max);

  GeodesicResult result;
  if (points_equal(space, p, q)) {
    result.path.vertices = {p, q};
    result.path.deck_shifts = {Eigen::VectorXi::Zero(space.torus_dim())};
    result.converged = true;
    result.segments = 1;
    return result;
  }

  Layout L;
  L.k = space.euclid_dim;
  L.d = space.torus_dim();
  L.D = space.chart_dim();
  const bool p_sing = is_singular(space, p);
  const bool q_sing = is_singular(space, q);
  if (p_sing && !q_sing) p.theta = q.theta;
  if (q_sing && !p_sing) q.theta = p.theta;
  if (p_sing && q_sing) q.theta = p.theta;

  std::vector<Candidate> candidates;
  constexpr int kStart = 8;
  if (L.d == 0 || p_sing || q_sing) {
    candidates.push_back({straight_chain(L, p, q, q.theta, kStart)});
  } else {
    Eigen::VectorXd base(L.d);
    for (int j = 0; j < L.d; ++j) base[j] = std::round(p.theta[j] - q.theta[j]);
    const int R = std::max(0, options.deck_radius);
    Eigen::VectorXi off = Eigen::VectorXi::Constant(L.d, -R);
    while (true) {
      candidates.push_back({straight_chain(L, p, q, q.theta + base + off.cast<double>(), kStart)});
      int j = 0;
      while (j < L.d && off[j] == R) off[j++] = -R;
      if (j == L.d) break;
      ++off[j];
    }
    if (space.singular_at_zero) {
      Candidate c{core_chain(L, space, p, q, kStart / 2)};
      c.through_core = true;
      candidates.push_back(std::move(c));
    }
  }

  const NewtonSolver solver(space, L, options);
  std::mt19937_64 rng(options.seed);
  auto run_level = [&](Candidate& cand) {
    cand.last = solver.minimize(cand.chain);
    cand.iterations += cand.last.iterations;
    for (int pass = 0; cand.chain.core_vertex >= 0 && pass < 50 && reweight(space, L, cand.chain); ++pass) {
      cand.last = solver.minimize(cand.chain);
      cand.iterations += cand.last.iterations;
    }
    cand.path = to_path(L, cand.chain, p, q);
    cand.distance = path_length(space, cand.path);
  };

  // Coarse pass up to n_segments for every candidate.
  for (Candidate& cand : candidates) {
    run_level(cand);
    if (!cand.last.converged) {
      // Deterministic jittered restart from the seed.
      Chain jittered = cand.chain;
      std::normal_distribution<double> noise(0.0, 1e-3);
      for (int v = 1; v + 1 < jittered.vertices(); ++v)
        for (int comp = 0; comp < L.D; ++comp)
          if (!jittered.fixed[v][L.group_of(comp)]) {
            double x = jittered.X(v, comp) + noise(rng);
            if (comp == 0) x = std::clamp(x, space.r_min, space.r_max);
            jittered.X(v, comp) = x;
          }
      const NewtonOutcome retry = solver.minimize(jittered);
      if (retry.converged || solver.energy(jittered) < solver.energy(cand.chain)) {
        cand.chain = jittered;
        cand.last = retry;
        cand.iterations += retry.iterations;
        cand.path = to_path(L, cand.chain, p, q);
        cand.distance = path_length(space, cand.path);
      }
    }
    while (cand.chain.segments() < options.n_segments) {
      cand.chain = prolongate(cand.chain);
      run_level(cand);
    }
  }

  double best = std::numeric_limits<double>::infinity();
  for (const Candidate& cand : candidates) best = std::min(best, cand.distance);

  Candidate* winner = nullptr;
  const bool has_core = std::any_of(candidates.begin(), candidates.end(), [](const Candidate& c) { return c.through_core; });
  auto touches_core = [&](const Chain& c) {
    for (int v = 1; v + 1 < c.vertices(); ++v)
      if (c.X(v, 0) <= space.r_min + 1e-9) return true;
    return false;
  };
  for (Candidate& cand : candidates) {
    if (cand.distance > best + 1e-3) continue;
    if (has_core && !cand.through_core && touches_core(cand.chain)) continue;
    double previous = cand.distance;
    while (cand.chain.segments() * 2 <= options.max_segments) {
      cand.chain = prolongate(cand.chain);
      run_level(cand);
      const bool settled = std::abs(cand.distance - previous) < options.refine_tol;
      previous = cand.distance;
      if (settled) break;
    }
    if (!winner || cand.distance < winner->distance) winner = &cand;
  }

  int total_iterations = 0;
  for (const Candidate& cand : candidates) total_iterations += cand.iterations;
  result.distance = winner->distance;
  result.path = winner->path;
  result.converged = winner->last.converged;
  result.iterations = total_iterations;
  result.residual = winner->last.residual;
  result.segments = winner->chain.segments();
  result.through_core = winner->through_core;
  return result;
}

GeodesicResult solve_geodesic(const WarpedSpace& space, const WPoint& p, const WPoint& q, int n_segments,
                              std::uint64_t seed) {
  SolverOptions options;
  options.n_segments = n_segments;
  options.seed = seed;
  return solve_geodesic(space, p, q, options);
}

}  // namespace warpfill
