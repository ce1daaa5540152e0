#include "transfusion/core_types.hpp"

#include <cmath>

namespace tfusion {

namespace {

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

}  // namespace

TaskSample::TaskSample(Matrix design, Vector responses, int task_id)
    : task_id_(task_id) {
  if (design.rows() != responses.size()) {
    throw DimensionError("TaskSample: design has " + std::to_string(design.rows()) +
                         " rows but " + std::to_string(responses.size()) + " responses");
  }
  if (design.cols() < 1) throw DimensionError("TaskSample: p must be >= 1");
  if (!all_finite(design) || !responses.allFinite()) {
    throw NumericalError("TaskSample: non-finite entries in task " + std::to_string(task_id));
  }
  if (task_id < 0) throw DimensionError("TaskSample: negative task id");
  design_ = std::make_shared<const Matrix>(std::move(design));
  responses_ = std::make_shared<const Vector>(std::move(responses));
}

TaskSample TaskSample::subset(std::span<const Index> rows) const {
  Matrix x(static_cast<Index>(rows.size()), dim());
  Vector y(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = rows[i];
    if (r < 0 || r >= this->rows()) throw DimensionError("TaskSample::subset: row out of range");
    x.row(static_cast<Index>(i)) = design_->row(r);
    y(static_cast<Index>(i)) = (*responses_)(r);
  }
  return TaskSample(std::move(x), std::move(y), task_id_);
}

TransferProblem::TransferProblem(TaskSample target, std::vector<TaskSample> sources)
    : target_(std::move(target)), sources_(std::move(sources)) {
  if (target_.task_id() != 0) throw DimensionError("TransferProblem: target must carry task id 0");
  if (!sources_.empty()) n_s_ = sources_.front().rows();
  for (const auto& s : sources_) {
    if (s.task_id() == 0) throw DimensionError("TransferProblem: task id 0 is reserved for the target");
    if (s.dim() != target_.dim()) throw DimensionError("TransferProblem: sources must share p with the target");
    if (s.rows() != n_s_) throw DimensionError("TransferProblem: all sources must have the same size");
  }
  if (total_size() <= 0) throw DimensionError("TransferProblem: N must be positive");
}

TransferProblem TransferProblem::with_target(TaskSample target) const {
  return TransferProblem(std::move(target), sources_);
}

BlockParams::BlockParams(std::vector<Vector> contrasts, Vector target_block)
    : contrasts_(std::move(contrasts)), target_(std::move(target_block)) {
  for (const auto& c : contrasts_) {
    if (c.size() != target_.size()) throw DimensionError("BlockParams: block length mismatch");
  }
}

BlockParams BlockParams::zeros(int num_sources, Index dim) {
  return BlockParams(std::vector<Vector>(static_cast<std::size_t>(num_sources), Vector::Zero(dim)),
                     Vector::Zero(dim));
}

BlockParams BlockParams::from_betas(std::span<const Vector> betas) {
  if (betas.empty()) throw DimensionError("BlockParams::from_betas: need at least the target");
  const Vector& b0 = betas[0];
  std::vector<Vector> contrasts;
  contrasts.reserve(betas.size() - 1);
  for (std::size_t k = 1; k < betas.size(); ++k) {
    if (betas[k].size() != b0.size()) throw DimensionError("BlockParams::from_betas: length mismatch");
    contrasts.emplace_back(betas[k] - b0);
  }
  return BlockParams(std::move(contrasts), b0);
}

BlockParams BlockParams::unflatten(const Vector& flat, int num_sources, Index dim) {
  if (flat.size() != (num_sources + 1) * dim) throw DimensionError("BlockParams::unflatten: wrong length");
  std::vector<Vector> contrasts;
  contrasts.reserve(static_cast<std::size_t>(num_sources));
  for (int k = 0; k < num_sources; ++k) contrasts.emplace_back(flat.segment(k * dim, dim));
  return BlockParams(std::move(contrasts), flat.segment(num_sources * dim, dim));
}

std::vector<Vector> BlockParams::betas() const {
  std::vector<Vector> out;
  out.reserve(contrasts_.size() + 1);
  out.push_back(target_);
  for (const auto& c : contrasts_) out.emplace_back(c + target_);
  return out;
}

Vector BlockParams::flatten() const {
  const Index p = dim();
  Vector flat((num_sources() + 1) * p);
  for (int k = 0; k < num_sources(); ++k) flat.segment(k * p, p) = contrasts_[static_cast<std::size_t>(k)];
  flat.segment(num_sources() * p, p) = target_;
  return flat;
}

void PenaltyWeights::validate(int num_sources) const {
  if (!(lambda0 >= 0.0) || !(tilde_lambda >= 0.0)) throw std::invalid_argument("PenaltyWeights: negative penalty");
  if (static_cast<int>(a.size()) != num_sources) throw DimensionError("PenaltyWeights: a must have length K");
  for (double ak : a) {
    if (!(ak >= 0.0)) throw std::invalid_argument("PenaltyWeights: negative fusion weight");
  }
}

std::vector<double> PenaltyWeights::block_penalties() const {
  std::vector<double> out;
  out.reserve(a.size() + 1);
  for (double ak : a) out.push_back(lambda0 * ak);
  out.push_back(lambda0);
  return out;
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::one_step: return "one_step";
    case Strategy::two_step_regime_A: return "two_step_regime_A";
    case Strategy::two_step_regime_Ac: return "two_step_regime_Ac";
    case Strategy::baseline_lasso: return "baseline_lasso";
    case Strategy::pooled: return "pooled";
    case Strategy::dtransfusion_one: return "dtransfusion_one";
    case Strategy::dtransfusion_two: return "dtransfusion_two";
  }
  return "unknown";
}

Strategy strategy_from_string(std::string_view name) {
  for (Strategy s : {Strategy::one_step, Strategy::two_step_regime_A, Strategy::two_step_regime_Ac,
                     Strategy::baseline_lasso, Strategy::pooled, Strategy::dtransfusion_one,
                     Strategy::dtransfusion_two}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown strategy tag: " + std::string(name));
}

Vector w_average(std::span<const Vector> per_task_betas, Index n_s, Index n_t) {
  if (per_task_betas.empty()) throw DimensionError("w_average: need the target block");
  const Index k_src = static_cast<Index>(per_task_betas.size()) - 1;
  if (n_t <= 0 || (k_src > 0 && n_s <= 0)) throw std::invalid_argument("w_average: sample sizes must be positive");
  const Index p = per_task_betas[0].size();
  for (const auto& b : per_task_betas) {
    if (b.size() != p) throw DimensionError("w_average: length mismatch");
  }
  const double n_total = static_cast<double>(k_src * n_s + n_t);
  Vector sum_src = Vector::Zero(p);
  for (std::size_t k = 1; k < per_task_betas.size(); ++k) sum_src += per_task_betas[k];
  return (static_cast<double>(n_s) / n_total) * sum_src +
         (static_cast<double>(n_t) / n_total) * per_task_betas[0];
}

double estimation_error(const Vector& beta_hat, const Vector& beta_star) {
  if (beta_hat.size() != beta_star.size()) throw DimensionError("estimation_error: length mismatch");
  return (beta_hat - beta_star).norm();
}

double diversity_epsilon(std::span<const Vector> contrasts, Index n_s, Index n_t) {
  if (contrasts.empty()) return 0.0;
  const Index p = contrasts[0].size();
  Vector sum = Vector::Zero(p);
  for (const auto& d : contrasts) {
    if (d.size() != p) throw DimensionError("diversity_epsilon: length mismatch");
    sum += d;
  }
  const double n_total = static_cast<double>(static_cast<Index>(contrasts.size()) * n_s + n_t);
  return (static_cast<double>(n_s) / n_total) * sum.lpNorm<1>();
}

}  // namespace tfusion
