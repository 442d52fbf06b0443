#include "pocp/timeblock.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "pocp/error.hpp"

namespace pocp {

double TimeGrid::tau_max() const { return *std::max_element(taus_.begin(), taus_.end()); }

bool TimeGrid::uniform() const {
  return std::all_of(taus_.begin(), taus_.end(), [&](double t) { return t == taus_.front(); });
}

TimeGrid build_time_grid(double T, int N, std::optional<std::vector<double>> taus) {
  if (!(T > 0.0)) throw Error(ErrorKind::NonPositive, "T must be positive", "T");
  if (N < 1) throw Error(ErrorKind::NonPositiveStep, "need at least one time step", "N");
  TimeGrid grid;
  if (taus) {
    if (static_cast<int>(taus->size()) != N) {
      throw Error(ErrorKind::SizeMismatch, "taus must have N entries", "taus");
    }
    for (double t : *taus) {
      if (!(t > 0.0)) throw Error(ErrorKind::NonPositiveStep, "time steps must be positive", "taus");
    }
    const double sum = std::accumulate(taus->begin(), taus->end(), 0.0);
    if (std::abs(sum - T) > 1e-12 * T) {
      throw Error(ErrorKind::BadStepSum, "time steps sum to " + std::to_string(sum) + ", not T",
                  "taus");
    }
    grid.taus_ = std::move(*taus);
  } else {
    grid.taus_.assign(static_cast<std::size_t>(N), T / N);
  }
  grid.times_.resize(grid.taus_.size() + 1);
  grid.times_[0] = 0.0;
  for (std::size_t n = 0; n < grid.taus_.size(); ++n) {
    grid.times_[n + 1] = grid.times_[n] + grid.taus_[n];
  }
  grid.times_.back() = T;
  return grid;
}

BlockVector BlockVector::from_flat(const Eigen::Ref<const Eigen::VectorXd>& flat, int nx) {
  if (nx <= 0 || flat.size() % nx != 0) {
    throw Error(ErrorKind::SizeMismatch, "flat vector length is not a multiple of nx");
  }
  const int steps = static_cast<int>(flat.size() / nx);
  return BlockVector(Eigen::Map<const Eigen::MatrixXd>(flat.data(), nx, steps));
}

void write_block_vector(std::ostream& out, const BlockVector& v) {
  out.precision(17);
  for (int i = 0; i < v.nx(); ++i) {
    for (int n = 0; n < v.steps(); ++n) {
      if (n) out << ' ';
      out << v.values()(i, n);
    }
    out << '\n';
  }
}

BlockVector read_block_vector(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double x;
    while (ls >> x) row.push_back(x);
    if (!ls.eof()) throw Error(ErrorKind::ParseError, "bad number in block vector table");
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorKind::ParseError, "ragged block vector table");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  Eigen::MatrixXd values(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t n = 0; n < rows[i].size(); ++n) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = rows[i][n];
    }
  }
  return BlockVector(std::move(values));
}

BlockSystem::BlockSystem(std::shared_ptr<const SpatialDiscretization> disc, TimeGrid grid,
                         std::vector<double> alpha, std::vector<double> c)
    : disc_(std::move(disc)), grid_(std::move(grid)) {
  const int N = grid_.steps();
  if (!disc_) throw Error(ErrorKind::InvalidMesh, "null discretization");
  if (!disc_->mass.factorized()) {
    throw Error(ErrorKind::FactorizationFailed, "mass matrix must be factorized");
  }
  if (static_cast<int>(alpha.size()) != N || static_cast<int>(c.size()) != N) {
    throw Error(ErrorKind::SizeMismatch, "need one alpha and one c per time interval");
  }
  std::vector<std::pair<double, double>> coeff_keys;
  std::vector<std::tuple<double, double, double>> step_keys;
  for (int j = 0; j < N; ++j) {
    if (!(alpha[j] >= 0.0)) throw Error(ErrorKind::NegativeAlpha, "alpha must be non-negative", "alpha");
    const std::pair<double, double> ck{alpha[j], c[j]};
    auto it = std::find(coeff_keys.begin(), coeff_keys.end(), ck);
    if (it == coeff_keys.end()) {
      coeff_keys.push_back(ck);
      stiffness_.push_back(disc_->laplace.combine(alpha[j], disc_->mass, c[j]));
      it = coeff_keys.end() - 1;
    }
    stiffness_index_.push_back(static_cast<int>(it - coeff_keys.begin()));

    const std::tuple<double, double, double> sk{grid_.tau(j), alpha[j], c[j]};
    auto st = std::find(step_keys.begin(), step_keys.end(), sk);
    if (st == step_keys.end()) {
      step_keys.push_back(sk);
      SymSparseMatrix s = disc_->mass.combine(1.0 / grid_.tau(j), stiffness_[stiffness_index_.back()], 1.0);
      s.factorize();
      steps_.push_back(std::move(s));
      st = step_keys.end() - 1;
    }
    step_index_.push_back(static_cast<int>(st - step_keys.begin()));
  }
}

const SymSparseMatrix& BlockSystem::stiffness(int j) const {
  return stiffness_[static_cast<std::size_t>(stiffness_index_.at(static_cast<std::size_t>(j)))];
}

const SymSparseMatrix& BlockSystem::step_matrix(int j) const {
  return steps_[static_cast<std::size_t>(step_index_.at(static_cast<std::size_t>(j)))];
}

const SymFactorization& BlockSystem::step_factorization(int j) const {
  return step_matrix(j).factorization();
}

void BlockSystem::check(const BlockVector& v, const char* what) const {
  if (v.nx() != nx() || v.steps() != steps()) {
    throw Error(ErrorKind::SizeMismatch, std::string(what) + ": block vector is " +
                                             std::to_string(v.nx()) + "x" + std::to_string(v.steps()) +
                                             ", expected " + std::to_string(nx()) + "x" +
                                             std::to_string(steps()));
  }
}

BlockVector BlockSystem::apply_K(const BlockVector& y) const {
  check(y, "apply_K");
  BlockVector out = zeros();
  for (int n = 0; n < steps(); ++n) {
    out.block(n) = step_matrix(n).multiply(y.block(n));
    if (n > 0) out.block(n) -= mass().multiply(y.block(n - 1)) / grid_.tau(n);
  }
  return out;
}

BlockVector BlockSystem::apply_KT(const BlockVector& p) const {
  check(p, "apply_KT");
  BlockVector out = zeros();
  for (int n = 0; n < steps(); ++n) {
    out.block(n) = step_matrix(n).multiply(p.block(n));
    if (n + 1 < steps()) out.block(n) -= mass().multiply(p.block(n + 1)) / grid_.tau(n + 1);
  }
  return out;
}

BlockVector BlockSystem::solve_K(const BlockVector& rhs) const {
  check(rhs, "solve_K");
  BlockVector y = zeros();
  Eigen::VectorXd b;
  for (int n = 0; n < steps(); ++n) {
    b = rhs.block(n);
    if (n > 0) b += mass().multiply(y.block(n - 1)) / grid_.tau(n);
    y.block(n) = step_factorization(n).solve(b);
  }
  return y;
}

BlockVector BlockSystem::solve_KT(const BlockVector& rhs) const {
  check(rhs, "solve_KT");
  BlockVector q = zeros();
  Eigen::VectorXd b;
  for (int n = steps() - 1; n >= 0; --n) {
    b = rhs.block(n);
    if (n + 1 < steps()) b += mass().multiply(q.block(n + 1)) / grid_.tau(n + 1);
    q.block(n) = step_factorization(n).solve(b);
  }
  return q;
}

BlockVector BlockSystem::apply_mass(const BlockVector& x) const {
  check(x, "apply_mass");
  return BlockVector(mass().multiply_columns(x.values()));
}

BlockVector BlockSystem::solve_mass(const BlockVector& x) const {
  check(x, "solve_mass");
  return BlockVector(mass().factorization().solve_columns(x.values()));
}

BlockVector BlockSystem::apply_D(const BlockVector& x) const {
  check(x, "apply_D");
  BlockVector out = x;
  for (int n = 0; n < steps(); ++n) out.block(n) *= grid_.tau(n);
  return out;
}

BlockVector BlockSystem::apply_Dinv(const BlockVector& x) const {
  check(x, "apply_Dinv");
  BlockVector out = x;
  for (int n = 0; n < steps(); ++n) out.block(n) /= grid_.tau(n);
  return out;
}

BlockVector BlockSystem::apply_DM(const BlockVector& x) const { return apply_D(apply_mass(x)); }

double BlockSystem::inner_D(const BlockVector& x, const BlockVector& mass_z) const {
  check(x, "inner_D");
  check(mass_z, "inner_D");
  double sum = 0.0;
  for (int n = 0; n < steps(); ++n) sum += grid_.tau(n) * x.block(n).dot(mass_z.block(n));
  return sum;
}

double BlockSystem::inner_DM(const BlockVector& x, const BlockVector& z) const {
  return inner_D(x, apply_mass(z));
}

BlockVector BlockSystem::solve_forward(const BlockVector& u,
                                       const Eigen::Ref<const Eigen::VectorXd>& y0_load) const {
  check(u, "solve_forward");
  if (y0_load.size() != nx()) throw Error(ErrorKind::SizeMismatch, "initial load has wrong size");
  BlockVector rhs = apply_mass(u);
  rhs.block(0) += y0_load / grid_.tau(0);
  return solve_K(rhs);
}

BlockVector BlockSystem::solve_backward(const Eigen::Ref<const Eigen::VectorXd>& terminal,
                                        const BlockVector* source) const {
  if (terminal.size() != nx()) throw Error(ErrorKind::SizeMismatch, "terminal value has wrong size");
  if (source) check(*source, "solve_backward");
  BlockVector p = zeros();
  Eigen::VectorXd next = terminal;
  Eigen::VectorXd b;
  for (int n = steps() - 1; n >= 0; --n) {
    b = mass().multiply(next) / grid_.tau(n);
    if (source) b += source->block(n);
    p.block(n) = step_factorization(n).solve(b);
    next = p.block(n);
  }
  return p;
}

Eigen::MatrixXd BlockSystem::dense_K() const {
  const int nx_ = nx();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m(), m());
  const Eigen::MatrixXd mass_dense = mass().dense();
  for (int n = 0; n < steps(); ++n) {
    k.block(n * nx_, n * nx_, nx_, nx_) = step_matrix(n).dense();
    if (n > 0) k.block(n * nx_, (n - 1) * nx_, nx_, nx_) = -mass_dense / grid_.tau(n);
  }
  return k;
}

Eigen::MatrixXd BlockSystem::dense_mass() const {
  const int nx_ = nx();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m(), m());
  const Eigen::MatrixXd mass_dense = mass().dense();
  for (int n = 0; n < steps(); ++n) out.block(n * nx_, n * nx_, nx_, nx_) = mass_dense;
  return out;
}

Eigen::VectorXd BlockSystem::d_diagonal() const {
  Eigen::VectorXd d(m());
  for (int n = 0; n < steps(); ++n) d.segment(n * nx(), nx()).setConstant(grid_.tau(n));
  return d;
}

BlockSystem assemble_block_system(std::shared_ptr<const SpatialDiscretization> disc,
                                  const TimeGrid& grid, double alpha, double c) {
  const auto N = static_cast<std::size_t>(grid.steps());
  return BlockSystem(std::move(disc), grid, std::vector<double>(N, alpha), std::vector<double>(N, c));
}

BlockSystem assemble_block_system(std::shared_ptr<const SpatialDiscretization> disc,
                                  const TimeGrid& grid, std::vector<double> alpha,
                                  std::vector<double> c) {
  return BlockSystem(std::move(disc), grid, std::move(alpha), std::move(c));
}

double gamma_bound(double c0, double T, std::optional<double> tau_max) {
  if (!(T > 0.0)) throw Error(ErrorKind::NonPositive, "T must be positive", "T");
  if (2.0 * c0 > -1.0 / T) {
    if (tau_max && *tau_max > 0.001 * T) {
      throw Error(ErrorKind::StepTooLarge, "bound requires tau <= 0.001 T", "tau_max");
    }
    return 3.0 * T / (1.0 + 2.0 * c0 * T);
  }
  if (tau_max && *tau_max > 0.001 * T / (1.0 - 2.0 * c0 * T)) {
    throw Error(ErrorKind::StepTooLarge, "bound requires tau <= 0.001 T / (1 - 2 c0 T)", "tau_max");
  }
  return 3.0 * T * std::exp(-2.002 * c0 * T);
}

}  // namespace pocp
