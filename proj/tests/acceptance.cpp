// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "linear_oracle.hpp"
#include "menkf/commands.hpp"
#include "menkf/enkf.hpp"
#include "menkf/io.hpp"
#include "menkf/numerics.hpp"
#include "menkf/simgen.hpp"
#include "menkf/trainer.hpp"
#include "menkf/uq.hpp"

using namespace menkf;
namespace fs = std::filesystem;

namespace {

constexpr double kOracleTol = 0.03;
constexpr double kVecTol = 1e-12;
constexpr double kGainTol = 1e-10;
constexpr double kCoverageMin = 0.85;
constexpr double kWidthMax = 0.5;
constexpr double kInformativeWeightMin = 0.9;
constexpr double kStackedLo = 0.4;
constexpr double kStackedHi = 0.6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

Matrix random_matrix(RngStream& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome oracle_equivalence() {
  const testing::LinearOracleCase c = testing::make_linear_case();
  const GaussianBelief kf = testing::kalman_posterior(c);
  const testing::OracleError big = testing::trainer_vs_kalman(c, 50000, 1, kf);
  std::vector<double> avg;
  for (std::size_t n : {500, 5000, 50000}) {
    double s = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const testing::OracleError e = testing::trainer_vs_kalman(c, n, 1000 + seed, kf);
      s += e.mean + e.cov;
    }
    avg.push_back(s / 20.0);
  }
  const bool monotone = avg[1] < avg[0] && avg[2] < avg[1];
  return {big.mean <= kOracleTol && big.cov <= kOracleTol && monotone,
          fmt("N=50000 mean err %.4f cov err %.4f; avg err N=500/5000/50000: %.4f %.4f", big.mean,
              big.cov, avg[0], avg[1]) +
              fmt(" %.4f", avg[2])};
}

Outcome vec_identity() {
  RngStream rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index m = 1 + trial % 5, rows = m + 1 + trial % 4, k = 1 + trial % 3;
    const Matrix h = random_matrix(rng, m, rows);
    const Matrix x = random_matrix(rng, rows, 2);
    const Matrix g = trial % 2 == 0 ? Matrix(Matrix::Ones(2, 1)) : random_matrix(rng, 2, k);
    const Vector lhs = build_vec_operator(h, g) * vec(x);
    const Vector rhs = vec(h * x * g);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, rhs.cwiseAbs().maxCoeff()));
  }
  return {worst <= kVecTol, fmt("max relative deviation %.3g over 1000 instances", worst)};
}

Outcome invariants() {
  RunConfig cfg;
  cfg.sim.replicates = 1;
  const RngStream root(cfg.seed);
  const BaseData base = gen_base_probs(cfg.sim, root.child(kBaseStream));
  const Dataset data = gen_replicates(cfg.sim, base, root.child(kReplicateStream))[0];
  bool ok = true;
  std::size_t checked = 0;
  for (bool nonlinear : {false, true}) {
    MenkfConfig mc = cfg.menkf;
    mc.arm_f.input_dim = static_cast<std::size_t>(data.features_f.cols());
    mc.arm_g.input_dim = static_cast<std::size_t>(data.features_g.cols());
    if (nonlinear) {
      mc.arm_f.hidden = {16};
      mc.arm_f.activation = Activation::kTanh;
      mc.jitter_var = 0.01;
    }
    const StateLayout layout = mc.layout();
    std::vector<Batch> batches = make_batches(data.features_f, data.features_g, data.target_logit, 7);
    batches.resize(10);
    Ensemble e = init_ensemble(mc, layout, RngStream(5));
    for (std::size_t k = 0; k < batches.size(); ++k) {
      e = train_step(e, batches[k], mc, layout, RngStream(6).child(k));
      for (Eigen::Index i = 0; i < e.size(); ++i) {
        MemberView v(e.members(), i, layout);
        ok &= (1.0 - v.weight_g()) + v.weight_g() == 1.0;
        ok &= v.weight_f() + v.weight_g() == 1.0;
        ok &= v.noise_var() > 0.0;
        ++checked;
      }
      for (std::size_t z : layout.structural_zeros()) ok &= e.members().col(static_cast<Eigen::Index>(z)).isZero(0.0);
    }
  }
  return {ok, fmt("%.0f member-steps checked (linear and tanh arms, 10 batches each)", static_cast<double>(checked))};
}

struct Studies {
  StudySummary well, mis, stacked;
};

const Studies& studies() {
  static const Studies s = [] {
    Studies out;
    RunConfig cfg;
    cfg.sim.scenario = Scenario::kWellSpecified;
    out.well = run_study(cfg).summary;
    cfg.sim.scenario = Scenario::kMisspecified;
    out.mis = run_study(cfg).summary;
    cfg.sim.scenario = Scenario::kStackedAverage;
    out.stacked = run_study(cfg).summary;
    return out;
  }();
  return s;
}

Outcome well_specified() {
  const StudySummary& s = studies().well;
  const bool ok = s.failed == 0 && s.coverage_pooled >= kCoverageMin && s.width_mean <= kWidthMax &&
                  s.weight_f_mean >= kInformativeWeightMin;
  return {ok, fmt("pooled coverage %.4f, avg width %.4f, informative-arm weight %.4f, failed %.0f",
                  s.coverage_pooled, s.width_mean, s.weight_f_mean, static_cast<double>(s.failed))};
}

Outcome misspecified() {
  const Studies& s = studies();
  return {s.mis.failed == 0 && s.mis.width_mean > s.well.width_mean,
          fmt("misspecified width %.4f vs well-specified %.4f", s.mis.width_mean, s.well.width_mean)};
}

Outcome stacked() {
  const StudySummary& s = studies().stacked;
  return {s.failed == 0 && s.weight_g_mean >= kStackedLo && s.weight_g_mean <= kStackedHi,
          fmt("mean arm weight %.4f (informative arm %.4f)", s.weight_g_mean, s.weight_f_mean)};
}

std::vector<std::pair<std::string, std::string>> tree(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) out.emplace_back(fs::relative(entry.path(), root).string(), io::read_file(entry.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void run_all_commands(RunConfig cfg, const fs::path& dir, bool parallel) {
  cfg.study.parallel = parallel;
  cfg.menkf.parallel = parallel;
  cfg.study.threads = parallel ? 4 : 0;
  cfg.menkf.threads = parallel ? 4 : 0;
  const SimulateResult sim = cmd_simulate(cfg, dir / "sim");
  TrainOptions opts;
  opts.split = true;
  opts.replicate = 3;
  opts.manifest = sim.manifest;
  const TrainResult tr = cmd_train(cfg, sim.files[3], dir / "train", opts);
  cmd_evaluate(cfg, tr.checkpoint_path, dir / "train" / "test.csv", dir / "eval");
  cfg.study.save_checkpoints = true;
  cmd_replicate_study(cfg, dir / "study");
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "menkf_acceptance_determinism";
  fs::remove_all(root);
  RunConfig cfg;
  cfg.sim.replicates = 10;
  run_all_commands(cfg, root / "a", false);
  run_all_commands(cfg, root / "b", false);
  run_all_commands(cfg, root / "c", true);
  const auto a = tree(root / "a"), b = tree(root / "b"), c = tree(root / "c");
  const bool ok = !a.empty() && a == b && a == c;
  fs::remove_all(root);
  return {ok, fmt("%.0f output files compared across 2 sequential runs and 1 parallel run",
                  static_cast<double>(a.size()))};
}

Outcome checkpoint_round_trip() {
  const fs::path root = fs::temp_directory_path() / "menkf_acceptance_ckpt";
  fs::remove_all(root);
  RunConfig cfg;
  cfg.sim.replicates = 1;
  const SimulateResult sim = cmd_simulate(cfg, root);
  TrainOptions opts;
  opts.split = true;
  const TrainResult tr = cmd_train(cfg, sim.files[0], root / "out", opts);
  const Dataset test = io::read_dataset_csv(root / "out" / "test.csv");
  const io::Checkpoint loaded = io::load_checkpoint(tr.checkpoint_path);
  const EvaluateResult mem = evaluate_dataset(cfg, tr.checkpoint, test);
  const EvaluateResult disk = evaluate_dataset(cfg, loaded, test);
  bool ok = test.size() == 8 && mem.summaries.size() == 8 && loaded.ensemble.members() == tr.checkpoint.ensemble.members();
  for (std::size_t i = 0; i < mem.summaries.size(); ++i) {
    ok &= mem.summaries[i].draws == disk.summaries[i].draws;
    ok &= mem.summaries[i].point == disk.summaries[i].point;
    ok &= mem.summaries[i].lo == disk.summaries[i].lo && mem.summaries[i].hi == disk.summaries[i].hi;
  }
  fs::remove_all(root);
  return {ok, fmt("%.0f test rows, %.0f members", static_cast<double>(test.size()),
                  static_cast<double>(loaded.ensemble.size()))};
}

Outcome enkf_sanity() {
  RngStream rng(4);
  // zero-noise limit, H = I
  Ensemble e(random_matrix(rng, 40, 3));
  const Vector y = Vector::LinSpaced(3, -1.0, 2.0);
  Ensemble post = enkf_update(e, y, Matrix::Identity(3, 3), std::vector<double>(40, 1e-12), RngStream(1));
  double to_obs = 0.0;
  for (Eigen::Index i = 0; i < post.size(); ++i) to_obs = std::max(to_obs, (post.member(i).transpose() - y).norm());
  const bool zero_noise = to_obs <= 1e-4;

  // zero spread
  Matrix same(6, 3);
  same.rowwise() = Eigen::RowVector3d(0.1, 0.2, 0.3);
  Ensemble flat = enkf_update(Ensemble(same), y, Matrix::Identity(3, 3), std::vector<double>(6, 1.0), RngStream(2));
  const bool zero_gain = flat.members() == same;

  // constant variance: per-member factorisation equals the direct gain
  Ensemble f(random_matrix(rng, 30, 5));
  const Matrix h = random_matrix(rng, 3, 5);
  const double nu = 0.6;
  const RngStream update_rng(3);
  Ensemble upd = enkf_update(f, y, h, std::vector<double>(30, nu), update_rng);
  const Matrix pred = f.members() * h.transpose();
  const Matrix k = direct_gain(gain_factors(f.members(), pred), nu);
  double gain_err = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    RngStream r = update_rng.child(static_cast<std::uint64_t>(i));
    Vector innov(3);
    for (Eigen::Index j = 0; j < 3; ++j) innov(j) = y(j) + std::sqrt(nu) * r.normal() - pred(i, j);
    gain_err = std::max(gain_err, (upd.member(i).transpose() - f.member(i).transpose() - k * innov).norm());
  }
  return {zero_noise && zero_gain && gain_err <= kGainTol,
          fmt("zero-noise distance %.2g, zero-spread unchanged %.0f, gain deviation %.2g", to_obs,
              zero_gain ? 1.0 : 0.0, gain_err)};
}

Outcome quantile_coverage() {
  const std::vector<double> v{1, 2, 3, 4};
  bool ok = empirical_quantile(v, 0.0) == 1.0 && empirical_quantile(v, 0.5) == 2.5 &&
            std::abs(empirical_quantile(v, 0.975) - 3.925) <= 1e-14;
  std::vector<double> probs;
  for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) probs.push_back(inverse_logit(x));
  const double expected[] = {0.1192, 0.2689, 0.5, 0.7311, 0.8808};
  for (int i = 0; i < 5; ++i) ok &= std::abs(probs[static_cast<std::size_t>(i)] - expected[i]) < 5e-5;
  const PointSummary s = summarize_draws(probs);
  ok &= std::abs(s.point - 0.5) < 1e-15;
  ok &= s.lo == empirical_quantile(probs, 0.025) && s.hi == empirical_quantile(probs, 0.975);
  ok &= summarize_draws(std::vector<double>(7, 0.4)).width == 0.0;

  PointSummary iv;
  iv.lo = 0.2;
  iv.hi = 0.8;
  ok &= coverage(std::vector<PointSummary>{iv}, std::vector<double>{0.5}) == 1.0;
  ok &= coverage(std::vector<PointSummary>{iv, iv}, std::vector<double>{0.1, 0.9}) == 0.0;
  PointSummary a, b;
  a.lo = 0.0, a.hi = 0.3, a.width = 0.3, a.point = 0.1;
  b.lo = 0.0, b.hi = 0.5, b.width = 0.5, b.point = 0.2;
  Ensemble e(Matrix::Zero(2, static_cast<Eigen::Index>(StateLayout(1, 1).dim())));
  const AdequacyReport r = adequacy(std::vector<PointSummary>{a, b}, std::vector<double>{0.1, 0.2}, e, StateLayout(1, 1));
  ok &= std::abs(r.avg_width - 0.4) < 1e-15 && r.mae == 0.0;
  return {ok, "quantile, inverse-logit, interval, coverage and adequacy examples"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"1 oracle equivalence (linear mode)", oracle_equivalence},
      {"2 vec/Kronecker identity", vec_identity},
      {"3 convexity, positivity, structural zeros", invariants},
      {"4 well-specified adequacy", well_specified},
      {"5 misspecification widens intervals", misspecified},
      {"6 stacked-target weight recovery", stacked},
      {"7 determinism (incl. parallel)", determinism},
      {"8 checkpoint round trip", checkpoint_round_trip},
      {"9 EnKF update sanity", enkf_sanity},
      {"10 quantile/coverage unit examples", quantile_coverage},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %-42s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
