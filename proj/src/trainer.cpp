#include "menkf/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "menkf/error.hpp"
#include "menkf/parallel.hpp"

namespace menkf {

void MenkfConfig::validate() const {
  if (ensemble_size < 2) {
    throw Error(ErrorCode::kInvalidArgument, "ensemble_size must be at least 2");
  }
  if (!(init_var > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "init_var must be positive");
  }
  if (batch_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "batch_size must be at least 1");
  }
  if (passes < 1) throw Error(ErrorCode::kInvalidArgument, "passes must be at least 1");
  if (!(jitter_var >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "jitter_var must be non-negative");
  }
  if (!(inflation > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "inflation must be positive");
  }
  if (fixed_noise_var && !(*fixed_noise_var > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fixed_noise_var must be positive");
  }
}

std::vector<Batch> make_batches(const Matrix& features_f, const Matrix& features_g,
                                const Vector& target, std::size_t batch_size) {
  const Eigen::Index m = target.size();
  if (features_f.rows() != m || features_g.rows() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "feature and target row counts differ");
  }
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size is 0");
  std::vector<Batch> out;
  const auto step = static_cast<Eigen::Index>(batch_size);
  for (Eigen::Index start = 0; start < m; start += step) {
    const Eigen::Index len = std::min(step, m - start);
    out.push_back({features_f.middleRows(start, len), features_g.middleRows(start, len),
                   target.segment(start, len)});
  }
  return out;
}

double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

double softplus(double b) {
  if (b > 30.0) return b + std::log1p(std::exp(-b));
  return std::log1p(std::exp(b));
}

double inverse_softplus(double v) {
  if (!(v > 0.0)) throw Error(ErrorCode::kInvalidArgument, "softplus range is (0, inf)");
  if (v > 30.0) return v + std::log1p(-std::exp(-v));
  return std::log(std::expm1(v));
}

Vector MemberView::weights_f() const {
  return members_.row(row_)
      .segment(static_cast<Eigen::Index>(layout_.f_offset()),
               static_cast<Eigen::Index>(layout_.n_f()))
      .transpose();
}

Vector MemberView::weights_g() const {
  return members_.row(row_)
      .segment(static_cast<Eigen::Index>(layout_.g_offset()),
               static_cast<Eigen::Index>(layout_.n_g()))
      .transpose();
}

namespace {

void pin_fixed(Matrix& members, const MenkfConfig& cfg, const StateLayout& layout) {
  if (cfg.fixed_logit) {
    members.col(static_cast<Eigen::Index>(layout.a_index())).setConstant(*cfg.fixed_logit);
  }
  if (cfg.fixed_noise_var) {
    members.col(static_cast<Eigen::Index>(layout.b_index()))
        .setConstant(inverse_softplus(*cfg.fixed_noise_var));
  }
}

void check_layout(const MenkfConfig& cfg, const StateLayout& layout) {
  if (layout.n_f() != param_count(cfg.arm_f) || layout.n_g() != param_count(cfg.arm_g)) {
    throw Error(ErrorCode::kDimensionMismatch, "layout does not match arm specs");
  }
}

}  // namespace

Ensemble init_ensemble(const MenkfConfig& cfg, const StateLayout& layout,
                       const RngStream& rng) {
  cfg.validate();
  check_layout(cfg, layout);
  const auto n = static_cast<Eigen::Index>(cfg.ensemble_size);
  const auto d = static_cast<Eigen::Index>(layout.dim());
  const double sd = std::sqrt(cfg.init_var);
  Matrix members = Matrix::Zero(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    RngStream member_rng = rng.child(static_cast<std::uint64_t>(i));
    for (Eigen::Index j = 0; j < d; ++j) {
      if (layout.is_structural_zero(static_cast<std::size_t>(j))) continue;
      members(i, j) = sd * member_rng.normal();
    }
    if (cfg.variance_init == VarianceInit::kGammaShapeScale) {
      members(i, static_cast<Eigen::Index>(layout.b_index())) =
          inverse_softplus(member_rng.gamma(100.0, 0.01));
    }
  }
  pin_fixed(members, cfg, layout);
  return Ensemble(std::move(members));
}

Matrix measure(const Matrix& members, const Matrix& features_f,
               const Matrix& features_g, const StateLayout& layout,
               const ArmSpec& arm_f, const ArmSpec& arm_g, bool parallel,
               unsigned threads) {
  if (features_f.rows() != features_g.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "arm feature row counts differ");
  }
  if (static_cast<std::size_t>(members.cols()) != layout.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "member width does not match layout");
  }
  Matrix out(members.rows(), features_f.rows());
  parallel_for(static_cast<std::size_t>(members.rows()), parallel, threads,
               [&](std::size_t idx) {
                 const auto i = static_cast<Eigen::Index>(idx);
                 const MemberView view(members, i, layout);
                 const Vector wf = view.weights_f();
                 const Vector wg = view.weights_g();
                 const double weight_g = view.weight_g();
                 const Vector pf = forward(arm_f, {wf.data(), static_cast<std::size_t>(wf.size())},
                                           features_f);
                 const Vector pg = forward(arm_g, {wg.data(), static_cast<std::size_t>(wg.size())},
                                           features_g);
                 out.row(i) = ((1.0 - weight_g) * pf + weight_g * pg).transpose();
               });
  return out;
}

Ensemble train_step(const Ensemble& e, const Batch& batch, const MenkfConfig& cfg,
                    const StateLayout& layout, const RngStream& rng,
                    StepDiagnostics* diagnostics, std::size_t batch_index) {
  check_layout(cfg, layout);
  if (static_cast<std::size_t>(e.dim()) != layout.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "ensemble width does not match layout",
                batch_index);
  }
  const Eigen::Index n = e.size();

  // Forecast: identity transition, optionally jittered and inflated.
  Matrix forecast = e.members();
  if (cfg.jitter_var > 0.0) {
    const double sd = std::sqrt(cfg.jitter_var);
    const RngStream jitter_rng = rng.child(0);
    for (Eigen::Index i = 0; i < n; ++i) {
      RngStream member_rng = jitter_rng.child(static_cast<std::uint64_t>(i));
      for (Eigen::Index j = 0; j < forecast.cols(); ++j) {
        forecast(i, j) += sd * member_rng.normal();
      }
    }
    layout.mask(forecast);
    pin_fixed(forecast, cfg, layout);
  }
  inflate(forecast, cfg.inflation);
  pin_fixed(forecast, cfg, layout);

  const Matrix predicted = measure(forecast, batch.features_f, batch.features_g, layout,
                                   cfg.arm_f, cfg.arm_g, cfg.parallel, cfg.threads);
  std::vector<double> obs_var(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    obs_var[static_cast<std::size_t>(i)] = MemberView(forecast, i, layout).noise_var();
  }

  const Ensemble prior(std::move(forecast));
  UpdateOptions opts;
  opts.parallel = cfg.parallel;
  opts.threads = cfg.threads;
  Ensemble posterior;
  try {
    posterior = enkf_update_predicted(prior, predicted, batch.target, obs_var, rng.child(1), opts);
  } catch (const Error& first) {
    if (first.code() == ErrorCode::kDimensionMismatch ||
        first.code() == ErrorCode::kInvalidArgument) {
      throw Error(first.code(), first.what(), batch_index);
    }
    const GainFactors factors = gain_factors(prior.members(), predicted);
    const double m = static_cast<double>(batch.target.size());
    opts.ridge = 1e-8 * factors.obs_cov.trace() / m;
    try {
      posterior = enkf_update_predicted(prior, predicted, batch.target, obs_var,
                                        rng.child(1), opts);
    } catch (const Error& second) {
      throw Error(second.code(), std::string("update failed after ridge retry: ") + second.what(),
                  batch_index);
    }
  }

  Matrix& updated = posterior.members();
  layout.mask(updated);
  pin_fixed(updated, cfg, layout);

  if (diagnostics != nullptr) {
    const Vector mean_pred = predicted.colwise().mean().transpose();
    diagnostics->innovation_norm = (batch.target - mean_pred).norm();
    diagnostics->arm_weight =
        sigmoid(updated.col(static_cast<Eigen::Index>(layout.a_index())).mean());
    diagnostics->noise_var =
        softplus(updated.col(static_cast<Eigen::Index>(layout.b_index())).mean());
  }
  return posterior;
}

FitResult fit_from(Ensemble e, std::span<const Batch> batches, const MenkfConfig& cfg,
                   const RngStream& rng) {
  cfg.validate();
  if (batches.empty()) throw Error(ErrorCode::kEmptyInput, "fit needs at least one batch");
  const StateLayout layout = cfg.layout();
  const RngStream step_rng = rng.child(1);
  const RngStream order_rng = rng.child(2);

  FitResult result{std::move(e), {}};
  std::vector<std::size_t> order(batches.size());
  std::uint64_t step = 0;
  for (std::size_t pass = 0; pass < cfg.passes; ++pass) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg.shuffle) {
      RngStream pass_rng = order_rng.child(pass);
      std::shuffle(order.begin(), order.end(), pass_rng.engine());
    }
    for (std::size_t b : order) {
      StepDiagnostics diag;
      result.ensemble = train_step(result.ensemble, batches[b], cfg, layout,
                                   step_rng.child(step), &diag, b);
      result.trace.rows.push_back({pass, b, diag});
      ++step;
    }
  }
  return result;
}

FitResult fit(std::span<const Batch> batches, const MenkfConfig& cfg,
              const RngStream& rng) {
  cfg.validate();
  const StateLayout layout = cfg.layout();
  return fit_from(init_ensemble(cfg, layout, rng.child(0)), batches, cfg, rng);
}

Matrix build_vec_operator(const Matrix& h, const Matrix& g) {
  return kron(g.transpose(), h);
}

Matrix linear_observation_operator(const Batch& batch, const StateLayout& layout,
                                   const ArmSpec& arm_f, const ArmSpec& arm_g,
                                   double logit_a) {
  for (const ArmSpec* arm : {&arm_f, &arm_g}) {
    if (!arm->hidden.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "linear observation operator needs arms without hidden layers");
    }
  }
  const Eigen::Index m = batch.target.size();
  const auto rows = static_cast<Eigen::Index>(layout.rows());
  const auto d = static_cast<Eigen::Index>(layout.dim());
  const Eigen::Index col_len = m + rows;  // rows of X_t
  const double w_g = sigmoid(logit_a);

  // lift: member -> vec(X_t), X_t = [ (1-s) f , s g ; member block ]
  Matrix lift = Matrix::Zero(2 * col_len, d);
  auto design = [m](const Matrix& v) {
    Matrix out(m, v.cols() + 1);
    out << v, Matrix::Ones(m, 1);
    return out;
  };
  const Matrix design_f = design(batch.features_f);
  const Matrix design_g = design(batch.features_g);
  lift.block(0, static_cast<Eigen::Index>(layout.f_offset()), m, design_f.cols()) =
      (1.0 - w_g) * design_f;
  lift.block(col_len, static_cast<Eigen::Index>(layout.g_offset()), m, design_g.cols()) =
      w_g * design_g;
  for (Eigen::Index r = 0; r < rows; ++r) {
    lift(m + r, r) = 1.0;
    lift(col_len + m + r, rows + r) = 1.0;
  }

  Matrix h = Matrix::Zero(m, col_len);
  h.leftCols(m).setIdentity();
  const Matrix g = Matrix::Ones(2, 1);
  return build_vec_operator(h, g) * lift;
}

}  // namespace menkf
