#include "rankcert/bench.hpp"

#include "rankcert/random.hpp"
#include "rankcert/rank_opt.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace rankcert {

namespace {

class Tally {
 public:
  explicit Tally(BenchGroupResult& out) : out_(out) {}

  void check(bool ok, const std::function<std::string()>& describe) {
    ++out_.checks;
    if (!ok) {
      if (out_.failures == 0) out_.first_failure = "instance " + std::to_string(out_.instances) + ": " + describe();
      ++out_.failures;
    }
  }
  void instance() { ++out_.instances; }

 private:
  BenchGroupResult& out_;
};

int draw_dim(Rng& rng, int cap) { return 1 + static_cast<int>(rng.index(cap)); }

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

void trace_rank(Rng& rng, int cap, Tally& t) {
  for (int i = 0; i < 500; ++i) {
    t.instance();
    const int n = draw_dim(rng, cap);
    const MatrixXd q = rng.orthogonal(n);
    VectorXd d(n);
    for (int k = 0; k < n; ++k) d(k) = rng.uniform();
    // Zero out a random number of eigenvalues so the rank varies.
    const int zeros = static_cast<int>(rng.index(n + 1));
    for (int k = 0; k < zeros; ++k) d(k) = 0.0;
    const MatrixXd w = q * d.asDiagonal() * q.transpose();
    const double trace = w.trace();
    const int rank = numerical_rank(w, 1e-9);
    t.check(trace <= rank + 1e-9, [&] { return "trace " + fmt(trace) + " > rank " + std::to_string(rank); });
  }
}

void sylvester(Rng& rng, int cap, Tally& t) {
  for (int i = 0; i < 500; ++i) {
    t.instance();
    const int m = draw_dim(rng, cap);
    const int n = draw_dim(rng, cap);
    const int s = static_cast<int>(rng.index(std::min(m, n) + 1));
    const MatrixXd g = rng.planted_rank(m, n, s);
    MatrixXd w;
    if (i % 2 == 0) {
      w = rng.psd(n, rng.index(n + 1));
    } else {
      // Tight case: W spans part of the null space of G.
      const auto dec = svd(g);
      const int extra = static_cast<int>(rng.index(n - s + 1));
      const MatrixXd basis = dec.right_vectors.rightCols(extra);
      w = basis * basis.transpose();
    }
    const int rg = numerical_rank(g);
    const int rw = numerical_rank(w);
    const int rgw = numerical_rank(MatrixXd(g * w));
    t.check(rg + rw <= n + rgw, [&] {
      return "rank(G)=" + std::to_string(rg) + " rank(W)=" + std::to_string(rw) + " rank(GW)=" + std::to_string(rgw);
    });
  }
}

void round_trip(Rng& rng, int cap, Tally& t) {
  for (int i = 0; i < 200; ++i) {
    t.instance();
    const int m = draw_dim(rng, cap);
    const int n = draw_dim(rng, cap);
    const int s = static_cast<int>(rng.index(std::min(m, n) + 1));
    const MatrixXd g = rng.planted_rank(m, n, s);
    const double limit = 1e-8 * std::max(1.0, g.norm());
    for (int r = s; r <= n; ++r) {
      const auto cert = right_certificate<double>(g, r);
      const auto check = verify_certificate<double>(g, cert.W, Side::Right, 1e-8, r);
      t.check(cert.membership.member && cert.residual <= limit && check.valid && check.certified_bound == r,
              [&] { return "right r=" + std::to_string(r) + " residual " + fmt(cert.residual); });
      t.check((cert.W * cert.W - cert.W).norm() <= 1e-9, [&] { return "right certificate not idempotent"; });
      if (r <= m) {
        const auto left = left_certificate<double>(g, r);
        const auto mirror = right_certificate<double>(MatrixXd(g.transpose()), r);
        t.check((left.W - mirror.W).cwiseAbs().maxCoeff() <= 1e-9, [&] { return "left/right duality broken"; });
      }
    }
    for (int r = s; r <= m; ++r) {
      const auto cert = left_certificate<double>(g, r);
      const auto check = verify_certificate<double>(g, cert.W, Side::Left, 1e-8, r);
      t.check(cert.membership.member && cert.residual <= limit && check.valid && check.certified_bound == r,
              [&] { return "left r=" + std::to_string(r) + " residual " + fmt(cert.residual); });
    }
  }
}

void converse(Rng& rng, int cap, Tally& t) {
  for (int i = 0; i < 200; ++i) {
    t.instance();
    const int n = draw_dim(rng, cap);
    const int m = draw_dim(rng, cap);
    const int r = static_cast<int>(rng.index(n + 1));
    const MatrixXd q = rng.orthogonal(n);
    const MatrixXd w = q.leftCols(n - r) * q.leftCols(n - r).transpose();
    const bool full = i % 2 == 0;
    const int inner = full ? std::min(m, r) : static_cast<int>(rng.index(std::min(m, r) + 1));
    const MatrixXd g = rng.planted_rank(m, r, inner) * q.rightCols(r).transpose();
    const auto check = verify_certificate<double>(g, w, Side::Right, 1e-8);
    const int rank = numerical_rank(g);
    const double slack = n - w.trace();
    t.check(check.valid && std::abs(slack - check.certified_bound) <= 1e-9 && check.certified_bound >= rank &&
                (!full || m < r || check.certified_bound == rank),
            [&] { return "bound " + std::to_string(check.certified_bound) + " vs rank " + std::to_string(rank); });
  }
}

void lemma1(Rng& rng, int cap, Tally& t) {
  for (int i = 0; i < 200; ++i) {
    t.instance();
    const int n = draw_dim(rng, cap);
    MatrixXd g;
    MatrixXd w;
    const bool complementary = i < 50;
    if (complementary) {
      const MatrixXd q = rng.orthogonal(n);
      const int split = static_cast<int>(rng.index(n + 1));
      VectorXd dg = VectorXd::Zero(n);
      VectorXd dw = VectorXd::Zero(n);
      for (int k = 0; k < split; ++k) dg(k) = rng.uniform(0.1, 2.0);
      for (int k = split; k < n; ++k) dw(k) = rng.uniform(0.1, 1.0);
      g = q * dg.asDiagonal() * q.transpose();
      w = q * dw.asDiagonal() * q.transpose();
      g = (g + g.transpose()) / 2;
      w = (w + w.transpose()) / 2;
    } else {
      g = rng.psd(n, 1 + rng.index(n));
      w = rng.psd(n, 1 + rng.index(n));
    }
    const auto rep = trace_certificate_psd<double>(g, w, 1e-9, 1e-8);
    t.check(rep.agree && rep.factor_discrepancy <= 1e-9 * rep.scale && (!complementary || rep.trace_zero),
            [&] { return "trace " + fmt(rep.trace_value) + " norm " + fmt(rep.product_norm); });
  }
}

void corollary(Rng& rng, int cap, Tally& t) {
  const int ncap = std::min(cap, 10);
  for (int i = 0; i < 200; ++i) {
    t.instance();
    const int n = draw_dim(rng, ncap);
    const int nnz = static_cast<int>(rng.index(n + 1));
    VectorXd x = VectorXd::Zero(n);
    for (Index j : rng.subset(n, nnz)) x(j) = (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(0.5, 2.0);
    const int r = nnz + static_cast<int>(rng.index(n - nnz + 1));
    const auto cert = l0_certificate<double>(x, r);
    const auto agrees = [&](const VectorXd& w) {
      const bool l0 = verify_l0<double>(x, w, r);
      const bool full = verify_certificate<double>(MatrixXd(x.asDiagonal()), MatrixXd(w.asDiagonal()), Side::Right,
                                                   1e-8, r).valid;
      return std::pair{l0, full};
    };
    const auto [valid_l0, valid_full] = agrees(cert.w);
    t.check(valid_l0 && valid_full, [&] { return "constructed certificate rejected"; });

    // Corrupt: move weight onto the support, break the sum, or leave [0, 1].
    VectorXd bad = cert.w;
    const int mode = static_cast<int>(rng.index(3));
    if (mode == 0 && nnz > 0) {
      Index j = 0;
      while (x(j) == 0) ++j;
      bad(j) = 1.0;
    } else if (mode == 1) {
      bad(rng.index(n)) += 0.5;
    } else {
      bad(rng.index(n)) = -0.5;
    }
    const auto [bad_l0, bad_full] = agrees(bad);
    t.check(bad_l0 == bad_full && !bad_l0, [&] { return "corrupted certificate accepted or verdicts disagree"; });
  }
}

// Member of Phi_{n,r}: half projectors, half with fractional eigenvalues
// d_i = clamp(u_i + shift, 0, 1) where the shift fixes the trace.
MatrixXd sample_phi(Rng& rng, int n, int r) {
  const MatrixXd q = rng.orthogonal(n);
  VectorXd d = VectorXd::Zero(n);
  const int target = n - r;
  if (rng.uniform() < 0.5 || target == 0 || target == n) {
    d.head(target).setOnes();
  } else {
    VectorXd u(n);
    for (int k = 0; k < n; ++k) u(k) = rng.uniform();
    double lo = -1.0;
    double hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double sum = (u.array() + mid).cwiseMax(0.0).cwiseMin(1.0).sum();
      (sum < target ? lo : hi) = mid;
    }
    d = (u.array() + 0.5 * (lo + hi)).cwiseMax(0.0).cwiseMin(1.0);
  }
  return q * d.asDiagonal() * q.transpose();
}

void ky_fan(Rng& rng, int cap, int samples, Tally& t) {
  for (int i = 0; i < 100; ++i) {
    t.instance();
    const int m = draw_dim(rng, cap);
    const int n = draw_dim(rng, cap);
    const MatrixXd g = rng.gaussian(m, n);
    const MatrixXd gram = g.transpose() * g;
    const auto eig = sym_eig(gram);
    const double scale = std::max(1.0, g.squaredNorm());
    for (int r = 0; r <= n; ++r) {
      const auto pc = min_penalty_certificate<double>(g, r);
      const double expected = eig.values.tail(n - r).sum();
      t.check(std::abs(pc.value - expected) <= 1e-9 * scale,
              [&] { return "value " + fmt(pc.value) + " vs eigen sum " + fmt(expected); });
      double worst = std::numeric_limits<double>::infinity();
      for (int k = 0; k < samples; ++k) worst = std::min(worst, (gram * sample_phi(rng, n, r)).trace());
      t.check(worst >= pc.value - 1e-9 * scale, [&] { return "sample beat minimum: " + fmt(worst); });
    }
  }
}

void eckart_young(Rng& rng, int cap, Tally& t) {
  const int dcap = std::min(cap, 6);
  for (int i = 0; i < 50; ++i) {
    t.instance();
    const int m = draw_dim(rng, dcap);
    const int n = draw_dim(rng, dcap);
    const int r = static_cast<int>(rng.index(std::min(m, n) + 1));
    const MatrixXd g = rng.gaussian(m, n);
    const double optimum = (g - project_rank(g, r)).squaredNorm();
    const auto rep = solve_rank_constrained(full_matrix_approximation(g, r));
    t.check(rep.certified && rep.objective >= optimum - 1e-9 &&
                rep.objective <= optimum + 1e-6 * std::max(1.0, optimum),
            [&] { return "objective " + fmt(rep.objective) + " vs optimum " + fmt(optimum); });
    bool monotone = true;
    for (std::size_t k = 1; k < rep.objective_trajectory.size(); ++k) {
      if (rep.phase_trajectory[k] == rep.phase_trajectory[k - 1] &&
          rep.objective_trajectory[k] > rep.objective_trajectory[k - 1] + 1e-10) {
        monotone = false;
      }
    }
    t.check(monotone, [&] { return "penalized objective increased within a phase"; });
  }
}

void affine_2x2(std::uint64_t seed, Tally& t) {
  t.instance();
  RankProblem p;
  MatrixXd g0(2, 2);
  g0 << 1, 0, 0, 0;
  MatrixXd g1(2, 2);
  g1 << 0, 1, 1, 0;
  MatrixXd g2(2, 2);
  g2 << 0, 0, 0, 1;
  p.map = AffineMatrixMap(g0, {g1, g2});
  MatrixXd h = MatrixXd::Zero(2, 2);
  h(1, 1) = 2;
  p.objective = QuadraticObjective{h, Eigen::Vector2d(0, -4), 4};
  p.rank_bound = 1;
  SolverConfig config;
  config.seed = seed;
  const auto rep = solve_rank_constrained(p, config);
  t.check(rep.certified && rep.objective <= 1e-6, [&] { return "objective " + fmt(rep.objective); });
}

void rank_min(Rng& rng, int cap, Tally& t) {
  for (int i = 0; i < 100; ++i) {
    t.instance();
    const int m = draw_dim(rng, cap);
    const int n = draw_dim(rng, cap);
    const int s = static_cast<int>(rng.index(std::min(m, n) + 1));
    const MatrixXd g = rng.planted_rank(m, n, s);
    const auto rep = solve_rank_min(AffineMatrixMap(g, {}), std::nullopt);
    t.check(rep.rank == numerical_rank(g) && rep.certified && rep.certified_bound == rep.rank,
            [&] { return "r* " + std::to_string(rep.rank) + " planted " + std::to_string(s); });
  }
}

double brute_force_sparse(const MatrixXd& a, const VectorXd& b, int k) {
  const int n = static_cast<int>(a.cols());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    std::vector<Index> support;
    for (int j = 0; j < n; ++j) {
      if (mask & (1u << j)) support.push_back(j);
    }
    best = std::min(best, (a * restricted_least_squares(a, b, support) - b).squaredNorm());
  }
  return best;
}

void sparse_ls(Rng& rng, int cap, Tally& t) {
  const int ncap = std::min(std::max(cap, 1) + 4, 12);
  for (int i = 0; i < 50; ++i) {
    t.instance();
    const int n = draw_dim(rng, ncap);
    const int m = n + static_cast<int>(rng.index(4));
    const int k = static_cast<int>(rng.index(n + 1));
    const MatrixXd a = rng.gaussian(m, n);
    const VectorXd b = rng.gaussian(m);
    const double optimum = brute_force_sparse(a, b, k);
    const auto rep = solve_sparse_ls(a, b, k);
    t.check(rep.certified && rep.objective >= optimum - 1e-9,
            [&] { return "objective " + fmt(rep.objective) + " below optimum " + fmt(optimum); });
  }
}

}  // namespace

bool BenchResult::passed() const {
  return std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.passed(); });
}

BenchResult run_bench(const BenchOptions& options) {
  if (options.dims_cap < 1) throw ContractViolation("bench: dims cap must be at least 1");
  if (options.ky_fan_samples < 0) throw ContractViolation("bench: sample count must be nonnegative");
  for (const auto& name : options.groups) {
    if (std::find(kBenchGroups.begin(), kBenchGroups.end(), name) == kBenchGroups.end()) {
      throw ContractViolation("bench: unknown suite '" + name + "'");
    }
  }
  BenchResult result;
  for (std::size_t index = 0; index < kBenchGroups.size(); ++index) {
    const std::string name(kBenchGroups[index]);
    if (!options.groups.empty() &&
        std::find(options.groups.begin(), options.groups.end(), name) == options.groups.end()) {
      continue;
    }
    BenchGroupResult group;
    group.name = name;
    Tally tally(group);
    Rng rng(options.seed * 0x9E3779B97F4A7C15ULL + index + 1);
    const int cap = options.dims_cap;
    const auto start = std::chrono::steady_clock::now();
    switch (index) {
      case 0: trace_rank(rng, cap, tally); break;
      case 1: sylvester(rng, cap, tally); break;
      case 2: round_trip(rng, cap, tally); break;
      case 3: converse(rng, cap, tally); break;
      case 4: lemma1(rng, cap, tally); break;
      case 5: corollary(rng, cap, tally); break;
      case 6: ky_fan(rng, cap, options.ky_fan_samples, tally); break;
      case 7: eckart_young(rng, cap, tally); break;
      case 8: affine_2x2(options.seed, tally); break;
      case 9: rank_min(rng, cap, tally); break;
      case 10: sparse_ls(rng, cap, tally); break;
    }
    group.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.groups.push_back(std::move(group));
  }
  return result;
}

}  // namespace rankcert
