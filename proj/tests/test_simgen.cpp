#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "menkf/error.hpp"
#include "menkf/simgen.hpp"
#include "menkf/uq.hpp"

using namespace menkf;

TEST_CASE("perturbation and threshold") {
  CHECK(perturb_logit(0.0, 0.0) == 0.0);
  CHECK(perturb_logit(1.0, 0.25) == 1.25);
  CHECK(threshold_label(inverse_logit(perturb_logit(logit(0.5), 0.0)), 0.5) == 0);
  CHECK(threshold_label(0.5000001, 0.5) == 1);
  CHECK(threshold_label(0.2, 0.5) == 0);
}

TEST_CASE("replicates are reproducible and parallel-invariant") {
  SimConfig cfg;
  cfg.replicates = 6;
  const BaseData base = gen_base_probs(cfg, RngStream(4));
  std::vector<Dataset> a = gen_replicates(cfg, base, RngStream(5));
  std::vector<Dataset> b = gen_replicates(cfg, base, RngStream(5));
  std::vector<Dataset> c = gen_replicates(cfg, base, RngStream(5), true, 3);
  REQUIRE(a.size() == 6);
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a[j].labels == b[j].labels);
    CHECK(a[j].labels == c[j].labels);
    CHECK(a[j].target_logit == b[j].target_logit);
    CHECK(a[j].target_logit == c[j].target_logit);
    CHECK(a[j].features_f == base.features_f);
    CHECK(a[j].size() == 74);
  }
  CHECK(gen_base_probs(cfg, RngStream(4)).true_logit == base.true_logit);
}

TEST_CASE("zero perturbation gives identical labels") {
  SimConfig cfg;
  cfg.replicates = 5;
  cfg.perturb_sd = 0.0;
  const BaseData base = gen_base_probs(cfg, RngStream(1));
  std::vector<Dataset> reps = gen_replicates(cfg, base, RngStream(2));
  for (const Dataset& d : reps) CHECK(d.labels == reps[0].labels);
}

TEST_CASE("label flips grow with perturbation") {
  std::vector<double> flips;
  for (double sd : {0.001, 0.01, 0.1}) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      SimConfig cfg;
      cfg.replicates = 20;
      cfg.perturb_sd = sd;
      cfg.points = 500;
      const BaseData base = gen_base_probs(cfg, RngStream(seed));
      std::vector<Dataset> reps = gen_replicates(cfg, base, RngStream(seed, 1));
      for (const Dataset& d : reps) {
        for (std::size_t i = 0; i < d.labels.size(); ++i) {
          total += d.labels[i] != threshold_label(base.true_prob(static_cast<Eigen::Index>(i)), 0.5);
        }
      }
    }
    flips.push_back(total);
  }
  CHECK(flips[0] <= flips[1]);
  CHECK(flips[1] <= flips[2]);
  CHECK(flips[0] < flips[2]);
}

TEST_CASE("split partitions the rows") {
  SimConfig cfg;
  cfg.replicates = 1;
  const BaseData base = gen_base_probs(cfg, RngStream(3));
  Dataset d = gen_replicates(cfg, base, RngStream(4))[0];
  RngStream r1(7);
  auto [train, test] = split(d, 66, 8, r1);
  CHECK(train.size() == 66);
  CHECK(test.size() == 8);
  std::set<double> seen;
  for (Eigen::Index i = 0; i < 66; ++i) seen.insert(train.target_logit(i));
  for (Eigen::Index i = 0; i < 8; ++i) seen.insert(test.target_logit(i));
  CHECK(seen.size() == 74);

  RngStream r2(8);
  auto [train2, test2] = split(d, 66, 8, r2);
  CHECK(train2.target_logit != train.target_logit);

  RngStream r3(9);
  auto [smoke, none] = split(d, 10, 0, r3);
  CHECK(smoke.size() == 10);
  CHECK(none.size() == 0);

  RngStream r4(1);
  CHECK_THROWS_AS(split(d, 70, 8, r4), Error);
}

TEST_CASE("linear probe ranks informativeness") {
  SimConfig cfg;
  const BaseData well = gen_base_probs(cfg, RngStream(11));
  CHECK(linear_probe_r2(well.features_f, well.true_logit) > linear_probe_r2(well.features_g, well.true_logit));
  CHECK(linear_probe_r2(well.features_f, well.true_logit) > 0.95);

  cfg.scenario = Scenario::kMisspecified;
  const BaseData mis = gen_base_probs(cfg, RngStream(11));
  CHECK(std::abs(linear_probe_r2(mis.features_f, mis.true_logit)) < 0.2);
}

TEST_CASE("linear probe on exact data") {
  Matrix x(5, 1);
  x << 1, 2, 3, 4, 5;
  Vector y = 2.0 * x.col(0).array() + 1.0;
  CHECK(linear_probe_r2(x, y) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stacked scenario averages the two probabilities") {
  SimConfig cfg;
  cfg.scenario = Scenario::kStackedAverage;
  const BaseData b = gen_base_probs(cfg, RngStream(5));
  CHECK((b.true_prob.array() > 0.0).all());
  CHECK((b.true_prob.array() < 1.0).all());
  for (Eigen::Index i = 0; i < b.true_prob.size(); ++i) {
    CHECK(b.true_prob(i) == doctest::Approx(inverse_logit(b.true_logit(i))).epsilon(1e-12));
  }
}

TEST_CASE("scenario names") {
  for (Scenario s : {Scenario::kWellSpecified, Scenario::kMisspecified, Scenario::kStackedAverage}) {
    CHECK(parse_scenario(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_scenario("nonsense"), Error);
  SimConfig bad;
  bad.points = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}
