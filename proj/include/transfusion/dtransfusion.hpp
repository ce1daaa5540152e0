#pragma once

// One-shot distributed TransFusion. Each source node ships a single
// debiased-LASSO vector; the target node fuses those pseudo-samples with its
// own data and optionally applies the local correction. Nothing in the
// aggregation API accepts source rows.

#include "transfusion/core_types.hpp"
#include "transfusion/cross_validation.hpp"
#include "transfusion/debias.hpp"
#include "transfusion/transfusion.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tfusion {

struct SourceMessage {
  static constexpr std::size_t kHeaderBytes = 16;
  static constexpr std::uint16_t kVersion = 1;

  /// Only beta_tilde and the scalar diagnostics are populated; the node-local
  /// LASSO fit and Theta stay behind.
  PseudoSample pseudo;
  Index n_s = 0;

  Index dim() const { return pseudo.beta_tilde.size(); }
  std::size_t payload_bytes() const { return kHeaderBytes + 8 * static_cast<std::size_t>(dim()); }

  /// "DTFX", u16 version, u32 p, u16 source index, u32 n_S, then p little-endian f64.
  std::vector<std::uint8_t> serialize() const;
  static SourceMessage deserialize(std::span<const std::uint8_t> bytes);
};

/// Runs on a source node: debiased LASSO, packed into a message.
SourceMessage source_precompute(const TaskSample& sample, double lambda, double mu, const SolverConfig& cfg);
/// Same with default_debias_params.
SourceMessage source_precompute(const TaskSample& sample, const SolverConfig& cfg);

/// Co-training on the pseudo-sample stack [sqrt(n_S) I ... ; X0] with responses
/// [sqrt(n_S) beta_tilde_1; ...; y0] and the centralized fusion penalty.
CoTrainResult aggregate_step1(const TaskSample& target, std::span<const SourceMessage> messages,
                              const PenaltyWeights& weights, const SolverConfig& cfg);

/// Gram statistics of the pseudo-samples, for the CV path engine.
FusedDesign fused_design_from_messages(std::span<const SourceMessage> messages, Index dim);

struct DFitReport {
  FitResult selected;
  /// dtransfusion_one, dtransfusion_two (regime A), dtransfusion_two (regime Ac).
  std::vector<FitResult> candidates;
};

/// CV-tuned one- and two-step D-TransFusion, validation-selected. K = 0 is the
/// CV-tuned target LASSO.
DFitReport dtransfusion_fit_report(const TaskSample& target, std::span<const SourceMessage> messages,
                                   const TuningGrid& grid, const SolverConfig& cfg, const ValidationPlan& plan);
FitResult dtransfusion_fit(const TaskSample& target, std::span<const SourceMessage> messages,
                           const TuningGrid& grid, const SolverConfig& cfg, const ValidationPlan& plan);

struct DWeights {
  double lambda0 = 0.0;
  /// a_k lambda_0 per source.
  std::vector<double> lambdas;
  double delta0 = 0.0;
  std::vector<double> deltas;

  PenaltyWeights penalty() const;
};

/// Theory-side weights from known sparsity s and shift sizes h_k:
///   delta_k = s log p / N + (n_S/N) sqrt(log p / n_S) h_k
///   delta_0 = K s log p / N + sqrt(log p / n_S) h_bar,  h_bar = (n_S/N) sum h_k
///   lambda_0 = c0 (sqrt(log p / N) + delta_0)
///   a_k lambda_0 = c0 max(8, h_bar / h_k) (sqrt(n_S/N log p/N) + delta_k)
/// With `regime` set, the sqrt(log p / N) term of lambda_0 becomes the regime's
/// level (sqrt(log p / n_S) for Ac), as for the two-step method.
DWeights theorem4_weights(const ProblemDims& dims, std::optional<double> sparsity, std::span<const double> h,
                          double c0 = 1.0, std::optional<Regime> regime = std::nullopt);

struct CommunicationReport {
  std::size_t total_bytes = 0;
  std::vector<std::size_t> per_node_bytes;
  int rounds = 1;
  /// Bytes needed to ship the raw source samples instead (8 n_S (p+1) per node).
  std::size_t raw_data_bytes = 0;
  /// raw_data_bytes / (8 p K): raw rows versus the bare vectors.
  double raw_to_message_ratio = 0.0;
};

CommunicationReport communication_report(std::span<const SourceMessage> messages);

}  // namespace tfusion
