#include "transfusion/synthgen.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace tfusion {

namespace {

constexpr Index kShiftSupport = 50;

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Stream tags under the scenario seed.
enum : std::uint64_t { kShiftStream = 1, kCovStream = 2, kDesignStream = 3, kNoiseStream = 4 };

Index parse_index(const KeyValues& kv, const std::string& key, Index current) {
  long long v = current;
  read_value(kv, key, v);
  return static_cast<Index>(v);
}

}  // namespace

std::string_view to_string(ShiftKind k) { return k == ShiftKind::diverse ? "diverse" : "nondiverse"; }

std::string_view to_string(DesignKind k) {
  switch (k) {
    case DesignKind::homogeneous: return "homogeneous";
    case DesignKind::heterogeneous: return "heterogeneous";
    case DesignKind::arrowhead: return "arrowhead";
  }
  return "?";
}

ShiftKind shift_kind_from_string(std::string_view s) {
  if (s == "diverse") return ShiftKind::diverse;
  if (s == "nondiverse" || s == "non-diverse") return ShiftKind::nondiverse;
  throw std::invalid_argument("unknown shift kind: " + std::string(s));
}

DesignKind design_kind_from_string(std::string_view s) {
  if (s == "homogeneous") return DesignKind::homogeneous;
  if (s == "heterogeneous") return DesignKind::heterogeneous;
  if (s == "arrowhead") return DesignKind::arrowhead;
  throw std::invalid_argument("unknown design kind: " + std::string(s));
}

ScenarioConfig ScenarioConfig::desk() {
  ScenarioConfig c;
  c.p = 200;
  c.s = 5;
  c.n_t = 100;
  c.n_s = 150;
  return c;
}

void ScenarioConfig::validate() const {
  if (p < 1) throw std::invalid_argument("scenario: p must be >= 1");
  if (s < 0 || s > p) throw std::invalid_argument("scenario: need 0 <= s <= p");
  if (n_t < 1) throw std::invalid_argument("scenario: n_T must be >= 1");
  if (k < 0) throw std::invalid_argument("scenario: K must be >= 0");
  if (k > 0 && n_s < 1) throw std::invalid_argument("scenario: n_S must be >= 1");
  if (k > 65535) throw std::invalid_argument("scenario: K too large");
  if (!std::isfinite(beta_level)) throw std::invalid_argument("scenario: beta_level must be finite");
  if (!(h >= 0.0) || !std::isfinite(h)) throw std::invalid_argument("scenario: h must be finite and >= 0");
  if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) throw std::invalid_argument("scenario: noise_sd must be > 0");
  if (design_kind == DesignKind::arrowhead) {
    if (!(arrowhead_c > 0.0 && arrowhead_c < 1.0)) throw std::invalid_argument("scenario: arrowhead_c must be in (0, 1)");
    if (p < 2) throw std::invalid_argument("scenario: arrowhead design needs p >= 2");
  }
}

std::vector<std::string> ScenarioConfig::keys() {
  return {"p", "s", "n_T", "n_S", "K", "beta_level", "h", "shift_kind", "design_kind", "arrowhead_c", "noise_sd", "seed"};
}

void ScenarioConfig::apply(const KeyValues& kv) {
  reject_unknown_keys(kv, keys(), "scenario config");
  p = parse_index(kv, "p", p);
  s = parse_index(kv, "s", s);
  n_t = parse_index(kv, "n_T", n_t);
  n_s = parse_index(kv, "n_S", n_s);
  read_value(kv, "K", k);
  read_value(kv, "beta_level", beta_level);
  read_value(kv, "h", h);
  std::string text;
  read_value(kv, "shift_kind", text);
  if (!text.empty()) shift_kind = shift_kind_from_string(text);
  text.clear();
  read_value(kv, "design_kind", text);
  if (!text.empty()) design_kind = design_kind_from_string(text);
  read_value(kv, "arrowhead_c", arrowhead_c);
  read_value(kv, "noise_sd", noise_sd);
  read_value(kv, "seed", seed);
}

KeyValues ScenarioConfig::to_key_values() const {
  return {{"p", std::to_string(p)},
          {"s", std::to_string(s)},
          {"n_T", std::to_string(n_t)},
          {"n_S", std::to_string(n_s)},
          {"K", std::to_string(k)},
          {"beta_level", format_double(beta_level)},
          {"h", format_double(h)},
          {"shift_kind", std::string(to_string(shift_kind))},
          {"design_kind", std::string(to_string(design_kind))},
          {"arrowhead_c", format_double(arrowhead_c)},
          {"noise_sd", format_double(noise_sd)},
          {"seed", std::to_string(seed)}};
}

Covariance Covariance::identity(Index p) {
  if (p < 1) throw DimensionError("Covariance: p must be >= 1");
  Covariance c;
  c.p_ = p;
  return c;
}

Covariance Covariance::dense(Matrix sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1) throw DimensionError("Covariance: need a square matrix");
  if (!sigma.allFinite() || !sigma.isApprox(sigma.transpose(), 1e-12)) {
    throw std::invalid_argument("Covariance: matrix must be finite and symmetric");
  }
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("Covariance: matrix is not positive definite");
  Covariance c;
  c.p_ = sigma.rows();
  c.factor_ = llt.matrixL();
  c.sigma_ = std::move(sigma);
  return c;
}

Matrix Covariance::matrix() const { return is_identity() ? Matrix(Matrix::Identity(p_, p_)) : sigma_; }

Matrix Covariance::sample(Rng& rng, Index n) const {
  Matrix z = standard_normal(rng, n, p_);
  if (is_identity()) return z;
  return z * factor_.transpose();
}

std::vector<Vector> gen_model_shift(ShiftKind kind, int k, double h, Index p, std::uint64_t seed) {
  if (p < 1) throw DimensionError("gen_model_shift: p must be >= 1");
  if (k < 0) throw std::invalid_argument("gen_model_shift: K must be >= 0");
  if (kind == ShiftKind::diverse && k < 1) throw std::invalid_argument("gen_model_shift: diverse shifts need K >= 1");
  if (!(h >= 0.0)) throw std::invalid_argument("gen_model_shift: h must be >= 0");
  const Index support = std::min(kShiftSupport, p);
  const double sd = h / 50.0;
  const double mean = kind == ShiftKind::diverse ? 0.0 : 0.1;
  std::vector<Vector> deltas;
  deltas.reserve(static_cast<std::size_t>(k));
  const int drawn = kind == ShiftKind::diverse ? k - 1 : k;
  for (int t = 0; t < drawn; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    Vector d = Vector::Zero(p);
    d.head(support) = (mean + sd * standard_normal(rng, support).array()).matrix();
    deltas.push_back(std::move(d));
  }
  if (kind == ShiftKind::diverse) {
    Vector sum = Vector::Zero(p);
    for (const auto& d : deltas) sum += d;
    deltas.push_back(-sum);
  }
  return deltas;
}

Matrix arrowhead_sigma(Index p, double c) {
  if (p < 2) throw DimensionError("arrowhead_sigma: p must be >= 2");
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("arrowhead_sigma: c must lie in (0, 1)");
  const double alpha = c / std::sqrt(static_cast<double>(p - 1));
  Matrix sigma = Matrix::Identity(p, p);
  sigma.row(0).setConstant(alpha);
  sigma.col(0).setConstant(alpha);
  sigma(0, 0) = 1.0;
  return sigma;
}

Covariance gen_covariance(DesignKind kind, Index p, std::uint64_t seed, double arrowhead_c) {
  if (p < 1) throw DimensionError("gen_covariance: p must be >= 1");
  switch (kind) {
    case DesignKind::homogeneous:
      return Covariance::identity(p);
    case DesignKind::heterogeneous: {
      Rng rng(seed);
      Matrix a(p, p);
      for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) a(i, j) = uniform01(rng) < 0.3 ? 0.3 : 0.0;
      }
      Matrix sigma = Matrix::Identity(p, p);
      sigma.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
      return Covariance::dense(Matrix(sigma.selfadjointView<Eigen::Lower>()));
    }
    case DesignKind::arrowhead:
      return Covariance::dense(arrowhead_sigma(p, arrowhead_c));
  }
  throw std::invalid_argument("gen_covariance: unknown kind");
}

std::pair<TransferProblem, GroundTruth> gen_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  GroundTruth truth;
  truth.beta0 = Vector::Zero(cfg.p);
  truth.beta0.head(cfg.s).setConstant(cfg.beta_level);
  if (cfg.k > 0) truth.deltas = gen_model_shift(cfg.shift_kind, cfg.k, cfg.h, cfg.p, derive_seed(cfg.seed, {kShiftStream}));
  for (const auto& d : truth.deltas) truth.realized_l1.push_back(d.lpNorm<1>());

  truth.sigmas.push_back(Covariance::identity(cfg.p));
  for (int t = 1; t <= cfg.k; ++t) {
    truth.sigmas.push_back(gen_covariance(cfg.design_kind, cfg.p,
                                          derive_seed(cfg.seed, {kCovStream, static_cast<std::uint64_t>(t)}),
                                          cfg.arrowhead_c));
  }

  auto make_task = [&](int t, Index n, const Vector& beta) {
    Rng design_rng(derive_seed(cfg.seed, {kDesignStream, static_cast<std::uint64_t>(t)}));
    Rng noise_rng(derive_seed(cfg.seed, {kNoiseStream, static_cast<std::uint64_t>(t)}));
    Matrix x = truth.sigmas[static_cast<std::size_t>(t)].sample(design_rng, n);
    Vector y = x * beta + cfg.noise_sd * standard_normal(noise_rng, n);
    return TaskSample(std::move(x), std::move(y), t);
  };

  TaskSample target = make_task(0, cfg.n_t, truth.beta0);
  std::vector<TaskSample> sources;
  sources.reserve(static_cast<std::size_t>(cfg.k));
  for (int t = 1; t <= cfg.k; ++t) sources.push_back(make_task(t, cfg.n_s, truth.source_beta(t - 1)));
  truth.epsilon_d = diversity_epsilon(truth.deltas, cfg.n_s, cfg.n_t);
  return {TransferProblem(std::move(target), std::move(sources)), std::move(truth)};
}

double c_sigma(const std::vector<Matrix>& sigmas, const Matrix& sigma0) {
  if (sigmas.empty()) throw std::invalid_argument("c_sigma: need at least one source covariance");
  const Index p = sigma0.rows();
  if (sigma0.cols() != p) throw DimensionError("c_sigma: sigma0 must be square");
  Matrix mean = Matrix::Zero(p, p);
  for (const auto& s : sigmas) {
    if (s.rows() != p || s.cols() != p) throw DimensionError("c_sigma: covariance shape mismatch");
    mean += s;
  }
  mean /= static_cast<double>(sigmas.size());
  const Eigen::PartialPivLU<Matrix> lu(mean.transpose());
  if (!(lu.rcond() > 1e-14)) throw NumericalError("c_sigma: average source covariance is singular");
  double worst = 0.0;
  for (const auto& s : sigmas) {
    // Columns of M^T are the rows e_j^T (Sigma_k - Sigma_0) Sigma_bar^{-1}.
    const Matrix mt = lu.solve((s - sigma0).transpose());
    worst = std::max(worst, mt.cwiseAbs().colwise().sum().maxCoeff());
  }
  return 1.0 + worst;
}

Vector pooled_bias(const std::vector<Matrix>& sigmas, const std::vector<Vector>& deltas) {
  if (sigmas.empty() || sigmas.size() != deltas.size()) {
    throw DimensionError("pooled_bias: need one covariance per shift vector");
  }
  const Index p = deltas.front().size();
  Matrix total = Matrix::Zero(p, p);
  Vector rhs = Vector::Zero(p);
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    if (sigmas[k].rows() != p || sigmas[k].cols() != p || deltas[k].size() != p) {
      throw DimensionError("pooled_bias: shape mismatch");
    }
    total += sigmas[k];
    rhs += sigmas[k] * deltas[k];
  }
  const Eigen::PartialPivLU<Matrix> lu(total);
  if (!(lu.rcond() > 1e-14)) throw NumericalError("pooled_bias: summed covariance is singular");
  return lu.solve(rhs);
}

Vector fused_bias(const std::vector<Vector>& deltas) {
  if (deltas.empty()) throw std::invalid_argument("fused_bias: no shift vectors");
  Vector sum = Vector::Zero(deltas.front().size());
  for (const auto& d : deltas) {
    if (d.size() != sum.size()) throw DimensionError("fused_bias: length mismatch");
    sum += d;
  }
  return sum / static_cast<double>(deltas.size());
}

void write_task_csv(const TaskSample& sample, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const Index p = sample.dim();
  for (Index j = 0; j < p; ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  char buf[32];
  for (Index i = 0; i < sample.rows(); ++i) {
    for (Index j = 0; j < p; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g,", sample.design()(i, j));
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g\n", sample.responses()(i));
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void export_csv(const TransferProblem& problem, const std::string& directory) {
  std::filesystem::create_directories(directory);
  const std::filesystem::path dir(directory);
  write_task_csv(problem.target(), (dir / "target.csv").string());
  for (const auto& s : problem.sources()) {
    write_task_csv(s, (dir / ("source_" + std::to_string(s.task_id()) + ".csv")).string());
  }
}

}  // namespace tfusion
