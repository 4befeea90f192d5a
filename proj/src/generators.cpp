#include "rankcert/generators.hpp"

#include "rankcert/random.hpp"

#include <algorithm>

namespace rankcert {

const char* to_string(PlantedKind kind) {
  switch (kind) {
    case PlantedKind::LowRank: return "lowrank";
    case PlantedKind::SparseLS: return "sparse-ls";
    case PlantedKind::AffineRank: return "affine-rank";
  }
  return "unknown";
}

PlantedKind planted_kind_from_string(const std::string& name) {
  if (name == "lowrank") return PlantedKind::LowRank;
  if (name == "sparse-ls") return PlantedKind::SparseLS;
  if (name == "affine-rank") return PlantedKind::AffineRank;
  throw ContractViolation("unknown instance kind '" + name + "'");
}

void GenSpec::validate() const {
  if (rows <= 0 || cols <= 0) throw ContractViolation("gen: dimensions must be positive");
  if (!(noise >= 0)) throw ContractViolation("gen: noise level must be nonnegative");
  const int limit = kind == PlantedKind::SparseLS ? cols : std::min(rows, cols);
  if (planted < 0 || planted > limit) {
    throw ContractViolation("gen: planted value " + std::to_string(planted) + " exceeds the admissible maximum " +
                            std::to_string(limit));
  }
  if (kind == PlantedKind::AffineRank && parameters <= 0) {
    throw ContractViolation("gen: affine instances need at least one parameter");
  }
}

MatrixXd gen_low_rank(const GenSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  MatrixXd g = rng.planted_rank(spec.rows, spec.cols, spec.planted);
  if (spec.noise > 0) g += spec.noise * rng.gaussian(spec.rows, spec.cols);
  return g;
}

SparseLsProblem gen_sparse_ls(const GenSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SparseLsProblem p;
  p.k = spec.planted;
  p.A = rng.gaussian(spec.rows, spec.cols);
  VectorXd x = VectorXd::Zero(spec.cols);
  for (Index i : rng.subset(spec.cols, spec.planted)) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    x(i) = sign * rng.uniform(1.0, 2.0);
  }
  p.b = p.A * x;
  if (spec.noise > 0) p.b += spec.noise * rng.gaussian(spec.rows);
  p.x_star = x;
  return p;
}

RankConstrainedFile gen_affine_rank(const GenSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int p = spec.parameters;
  const MatrixXd target = rng.planted_rank(spec.rows, spec.cols, spec.planted);
  std::vector<MatrixXd> coeffs;
  for (int k = 0; k < p; ++k) coeffs.push_back(rng.gaussian(spec.rows, spec.cols));
  const VectorXd theta_star = rng.gaussian(p);
  MatrixXd base = target;
  for (int k = 0; k < p; ++k) base -= theta_star(k) * coeffs[static_cast<std::size_t>(k)];

  VectorXd theta_ref = theta_star;
  if (spec.noise > 0) theta_ref += spec.noise * rng.gaussian(p);

  RankConstrainedFile f;
  f.problem.map = AffineMatrixMap(base, std::move(coeffs));
  f.problem.objective = QuadraticObjective{2.0 * MatrixXd::Identity(p, p), -2.0 * theta_ref, theta_ref.squaredNorm()};
  f.problem.rank_bound = spec.planted;
  f.theta_star = theta_star;
  return f;
}

std::string render_planted(const GenSpec& spec) {
  switch (spec.kind) {
    case PlantedKind::LowRank: return format_matrix(gen_low_rank(spec));
    case PlantedKind::SparseLS: return problem_to_json(gen_sparse_ls(spec)).dump(2) + "\n";
    case PlantedKind::AffineRank: return problem_to_json(gen_affine_rank(spec)).dump(2) + "\n";
  }
  return {};
}

}  // namespace rankcert
