#include "transfusion/dtransfusion.hpp"

#include "transfusion/fused_path.hpp"
#include "transfusion/stacked_operator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

namespace tfusion {

namespace {

constexpr char kMagic[4] = {'D', 'T', 'F', 'X'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(in[offset + i]) << (8 * i);
  return value;
}

Index common_source_size(std::span<const SourceMessage> messages, Index dim) {
  if (messages.empty()) return 0;
  const Index n_s = messages.front().n_s;
  for (const auto& m : messages) {
    if (m.dim() != dim) throw DimensionError("D-TransFusion: message dimension differs from the target's");
    if (m.n_s != n_s) throw DimensionError("D-TransFusion: sources must have equal n_S");
    if (m.n_s <= 0) throw DimensionError("D-TransFusion: message with n_S <= 0");
    if (!m.pseudo.beta_tilde.allFinite()) throw std::invalid_argument("D-TransFusion: non-finite pseudo-sample");
  }
  return n_s;
}

}  // namespace

std::vector<std::uint8_t> SourceMessage::serialize() const {
  if (dim() > std::numeric_limits<std::uint32_t>::max() || n_s > std::numeric_limits<std::uint32_t>::max() ||
      pseudo.source_index < 0 || pseudo.source_index > std::numeric_limits<std::uint16_t>::max()) {
    throw std::out_of_range("SourceMessage: field does not fit the wire format");
  }
  std::vector<std::uint8_t> out;
  out.reserve(payload_bytes());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_le<std::uint16_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim()));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(pseudo.source_index));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(n_s));
  for (Index j = 0; j < dim(); ++j) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(pseudo.beta_tilde(j)));
  return out;
}

SourceMessage SourceMessage::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw std::invalid_argument("SourceMessage: truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw std::invalid_argument("SourceMessage: bad magic");
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kVersion) throw std::invalid_argument("SourceMessage: unsupported version " + std::to_string(version));
  const auto p = get_le<std::uint32_t>(bytes, 6);
  if (bytes.size() != kHeaderBytes + 8 * static_cast<std::size_t>(p)) {
    throw std::invalid_argument("SourceMessage: payload length does not match p");
  }
  SourceMessage m;
  m.pseudo.source_index = get_le<std::uint16_t>(bytes, 10);
  m.n_s = get_le<std::uint32_t>(bytes, 12);
  m.pseudo.beta_tilde.resize(p);
  for (std::uint32_t j = 0; j < p; ++j) {
    m.pseudo.beta_tilde(j) = std::bit_cast<double>(get_le<std::uint64_t>(bytes, kHeaderBytes + 8 * j));
  }
  return m;
}

SourceMessage source_precompute(const TaskSample& sample, double lambda, double mu, const SolverConfig& cfg) {
  PseudoSample full = debias_estimator(sample, lambda, mu, cfg);
  SourceMessage m;
  m.n_s = sample.rows();
  m.pseudo.beta_tilde = std::move(full.beta_tilde);
  m.pseudo.source_index = full.source_index;
  m.pseudo.lambda_used = full.lambda_used;
  m.pseudo.mu_used = full.mu_used;
  m.pseudo.theta_diagnostics = full.theta_diagnostics;
  return m;
}

SourceMessage source_precompute(const TaskSample& sample, const SolverConfig& cfg) {
  const DebiasParams d = default_debias_params(sample, cfg);
  return source_precompute(sample, d.lambda, d.mu, cfg);
}

CoTrainResult aggregate_step1(const TaskSample& target, std::span<const SourceMessage> messages,
                              const PenaltyWeights& weights, const SolverConfig& cfg) {
  const int k_src = static_cast<int>(messages.size());
  weights.validate(k_src);
  const Index p = target.dim();
  const Index n_s = common_source_size(messages, p);
  const StackedOperator op = StackedOperator::identity_blocks(k_src, n_s, target.design_ptr());

  Vector y(op.rows());
  const double scale = std::sqrt(static_cast<double>(n_s));
  for (int k = 0; k < k_src; ++k) y.segment(k * p, p) = scale * messages[static_cast<std::size_t>(k)].pseudo.beta_tilde;
  y.tail(target.rows()) = target.responses();

  SolveResult sol = solve_weighted_lasso(op, y, weights.block_penalties(), cfg);
  CoTrainResult out;
  out.betas = sol.theta.betas();
  out.w_hat = w_average(out.betas, n_s, target.rows());
  out.theta = std::move(sol.theta);
  out.diagnostics = std::move(sol.diagnostics);
  return out;
}

FusedDesign fused_design_from_messages(std::span<const SourceMessage> messages, Index dim) {
  FusedDesign d;
  d.source_size = common_source_size(messages, dim);
  const double scale = std::sqrt(static_cast<double>(d.source_size));
  for (const auto& m : messages) d.sources.push_back(kernels::make_identity_gram_block(scale, scale * m.pseudo.beta_tilde));
  return d;
}

DFitReport dtransfusion_fit_report(const TaskSample& target, std::span<const SourceMessage> messages,
                                   const TuningGrid& grid, const SolverConfig& cfg, const ValidationPlan& plan) {
  DFitReport report;
  if (messages.empty()) {
    TuningGrid g = grid;
    g.folds = plan.folds;
    report.selected = lasso_baseline(target, g, cfg, plan.seed);
    return report;
  }
  const FusedDesign design = fused_design_from_messages(messages, target.dim());
  ProblemDims dims;
  dims.num_sources = design.num_sources();
  dims.source_size = design.source_size;
  dims.target_size = target.rows();
  dims.dim = target.dim();
  dims.total = dims.num_sources * dims.source_size + dims.target_size;

  const auto folds = target_folds(target.rows(), plan.folds, plan.seed);
  const FusedFit fit_a =
      fit_fused_tuned(design, target, theorem_weights(dims, Regime::A).a, grid, cfg, folds, true);
  const FusedFit fit_ac =
      fit_fused_tuned(design, target, theorem_weights(dims, Regime::Ac).a, grid, cfg, folds, true);
  report.candidates.push_back(one_step_result(fit_a, Strategy::dtransfusion_one));
  report.candidates.push_back(two_step_result(fit_a, Strategy::dtransfusion_two));
  report.candidates.push_back(two_step_result(fit_ac, Strategy::dtransfusion_two));
  if (std::none_of(report.candidates.begin(), report.candidates.end(), [](const FitResult& r) { return r.converged; })) {
    throw NumericalError("dtransfusion_fit: no candidate converged");
  }
  report.selected = report.candidates[select_by_validation(report.candidates)];
  return report;
}

FitResult dtransfusion_fit(const TaskSample& target, std::span<const SourceMessage> messages,
                           const TuningGrid& grid, const SolverConfig& cfg, const ValidationPlan& plan) {
  return dtransfusion_fit_report(target, messages, grid, cfg, plan).selected;
}

PenaltyWeights DWeights::penalty() const {
  PenaltyWeights w;
  w.lambda0 = lambda0;
  for (double l : lambdas) w.a.push_back(lambda0 > 0.0 ? l / lambda0 : 0.0);
  return w;
}

DWeights theorem4_weights(const ProblemDims& dims, std::optional<double> sparsity, std::span<const double> h,
                          double c0, std::optional<Regime> regime) {
  dims.validate();
  if (!(c0 > 0.0)) throw std::invalid_argument("theorem4_weights: c0 must be positive");
  const int k_src = dims.num_sources;
  if (!sparsity || static_cast<int>(h.size()) != k_src) {
    throw std::invalid_argument(
        "theorem4_weights: needs the sparsity s and one shift size h_k per source; "
        "without them use the cross-validated fit");
  }
  if (!(*sparsity >= 0.0)) throw std::invalid_argument("theorem4_weights: s must be >= 0");
  for (double hk : h) {
    if (!(hk >= 0.0) || !std::isfinite(hk)) throw std::invalid_argument("theorem4_weights: h_k must be finite and >= 0");
  }

  const double log_p = std::log(static_cast<double>(dims.dim));
  const double n = static_cast<double>(dims.total);
  const double ns = static_cast<double>(dims.source_size);
  const double s = *sparsity;
  double h_sum = 0.0;
  for (double hk : h) h_sum += hk;
  const double h_bar = k_src > 0 ? ns / n * h_sum : 0.0;
  const double src_rate = k_src > 0 ? std::sqrt(log_p / ns) : 0.0;

  DWeights w;
  w.delta0 = k_src * s * log_p / n + src_rate * h_bar;
  double level = std::sqrt(log_p / n);
  if (regime == Regime::Ac && k_src > 0) level = std::sqrt(log_p / ns);
  w.lambda0 = c0 * (level + w.delta0);
  for (int k = 0; k < k_src; ++k) {
    const double hk = h[static_cast<std::size_t>(k)];
    const double dk = s * log_p / n + ns / n * src_rate * hk;
    double factor = 8.0;
    if (h_bar > 0.0) {
      if (hk == 0.0) throw std::invalid_argument("theorem4_weights: h_k = 0 with h_bar > 0 gives an unbounded weight");
      factor = std::max(8.0, h_bar / hk);
    }
    w.deltas.push_back(dk);
    w.lambdas.push_back(c0 * factor * (std::sqrt(ns / n * log_p / n) + dk));
  }
  return w;
}

CommunicationReport communication_report(std::span<const SourceMessage> messages) {
  CommunicationReport r;
  std::size_t vector_bytes = 0;
  for (const auto& m : messages) {
    r.per_node_bytes.push_back(m.payload_bytes());
    r.total_bytes += m.payload_bytes();
    vector_bytes += 8 * static_cast<std::size_t>(m.dim());
    r.raw_data_bytes += 8 * static_cast<std::size_t>(m.n_s) * (static_cast<std::size_t>(m.dim()) + 1);
  }
  r.raw_to_message_ratio = vector_bytes > 0 ? static_cast<double>(r.raw_data_bytes) / static_cast<double>(vector_bytes) : 0.0;
  return r;
}

}  // namespace tfusion
