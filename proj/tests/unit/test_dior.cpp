#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fog/dior/dataset.hpp"
#include "fog/dior/model.hpp"
#include "fog/dior/train.hpp"
#include "oracles.hpp"

using namespace fog::dior;

namespace {

const Variant kVariants[] = {Variant::source_only, Variant::naive_combined, Variant::dann, Variant::adda};

// adda with a real-side extractor that differs from the sim one.
DiorModel model_for(Variant v, std::uint64_t seed, int C = 4) {
  DiorModel m = init_model(v, C, seed);
  if (v == Variant::adda) {
    m.real_features = init_model(v, C, seed + 1000).features;
    m.sim_pretrained = true;
  }
  return m;
}

ShiftConfig small_fixture(std::uint64_t seed) {
  ShiftConfig c;
  c.seed = seed;
  c.n_sim = 400;
  c.n_real = 200;
  return c;
}

bool same_trace(const std::vector<EpochMetrics>& a, const std::vector<EpochMetrics>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].epoch != b[i].epoch || a[i].lambda != b[i].lambda || a[i].L_y != b[i].L_y || a[i].L_d != b[i].L_d ||
        a[i].disc_accuracy != b[i].disc_accuracy)
      return false;
  return true;
}

}  // namespace

TEST_CASE("variant names") {
  CHECK(parse_variant("naive") == Variant::naive_combined);
  CHECK(parse_variant("source_only") == Variant::source_only);
  CHECK(to_string(Variant::adda) == "adda");
  CHECK_THROWS(parse_variant("cyclegan"));
}

TEST_CASE("default fixture sizes, splits and class centers") {
  const auto d = make_shifted_dataset(ShiftConfig{});
  CHECK(d.num_classes == 4);
  CHECK(d.sim_train.size() == 1200);
  CHECK(d.sim_eval.size() == 800);
  CHECK(d.real_train.size() == 240);
  CHECK(d.real_eval.size() == 160);
  const double th = 30.0 * std::numbers::pi / 180.0;
  for (int c = 0; c < 4; ++c) {
    const double a = 2 * std::numbers::pi * c / 4;
    const double sx = 2 * std::cos(a), sy = 2 * std::sin(a);
    CHECK(d.sim_centers[c].x() == doctest::Approx(sx).epsilon(1e-12));
    CHECK(d.sim_centers[c].y() == doctest::Approx(sy).epsilon(1e-12));
    const double rx = std::cos(th) * sx - std::sin(th) * sy + 0.5;
    const double ry = std::sin(th) * sx + std::cos(th) * sy - 0.3;
    CHECK(d.real_centers[c].x() == doctest::Approx(rx).epsilon(1e-12));
    CHECK(d.real_centers[c].y() == doctest::Approx(ry).epsilon(1e-12));
  }
  int labeled = 0;
  for (const auto& p : d.real_train) labeled += p.labeled;
  CHECK(labeled == 24);
  for (const auto& p : d.sim_train) CHECK(p.labeled);
  for (const auto& p : d.sim_train) CHECK(p.domain == Domain::sim);
  for (const auto& p : d.real_eval) CHECK(p.domain == Domain::real);
}

TEST_CASE("blob samples sit around their centers with the configured spread") {
  ShiftConfig cfg;
  cfg.n_sim = 8000;
  cfg.n_real = 8000;
  const auto d = make_shifted_dataset(cfg);
  for (const auto* split : {&d.sim_train, &d.real_train}) {
    const auto& centers = split == &d.sim_train ? d.sim_centers : d.real_centers;
    std::vector<Eigen::Vector2d> sum(4, Eigen::Vector2d::Zero());
    std::vector<double> ss(4, 0.0);
    std::vector<int> n(4, 0);
    for (const auto& p : *split) {
      sum[p.label] += p.x;
      ss[p.label] += (p.x - centers[p.label]).squaredNorm();
      ++n[p.label];
    }
    for (int c = 0; c < 4; ++c) {
      CHECK((sum[c] / n[c] - centers[c]).norm() < 0.05);
      CHECK(std::sqrt(ss[c] / (2 * n[c])) == doctest::Approx(0.35).epsilon(0.05));
    }
  }
}

TEST_CASE("no shift means identically distributed domains") {
  ShiftConfig cfg;
  cfg.rotation_deg = 0;
  cfg.translation = {0, 0};
  const auto d = make_shifted_dataset(cfg);
  for (int c = 0; c < 4; ++c) CHECK((d.sim_centers[c] - d.real_centers[c]).norm() == 0.0);
}

TEST_CASE("datasets are deterministic in the seed") {
  const auto a = make_shifted_dataset(ShiftConfig{});
  const auto b = make_shifted_dataset(ShiftConfig{});
  ShiftConfig other;
  other.seed = 2;
  const auto c = make_shifted_dataset(other);
  REQUIRE(a.sim_train.size() == b.sim_train.size());
  bool equal = true, differs = false;
  for (std::size_t i = 0; i < a.sim_train.size(); ++i) {
    equal &= a.sim_train[i].x == b.sim_train[i].x && a.sim_train[i].label == b.sim_train[i].label;
    differs |= a.sim_train[i].x != c.sim_train[i].x;
  }
  CHECK(equal);
  CHECK(differs);
}

TEST_CASE("invalid dataset configs are rejected") {
  ShiftConfig cfg;
  cfg.num_classes = 1;
  CHECK_THROWS_AS(make_shifted_dataset(cfg), DatasetError);
  cfg = ShiftConfig{};
  cfg.n_real = cfg.n_sim + 1;
  CHECK_THROWS_AS(make_shifted_dataset(cfg), DatasetError);
}

TEST_CASE("zero classifier gives the maximum-entropy cross-entropy") {
  auto m = init_model(Variant::naive_combined, 4, 1);
  m.classifier.out.W.setZero();
  m.classifier.out.b.setZero();
  const auto l = forward_loss(m, oracle::random_batch(3, 64, 4), 0.0);
  CHECK(l.L_y == doctest::Approx(std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("forward loss matches the scalar recomputation") {
  for (auto v : kVariants) {
    for (std::uint64_t s = 1; s <= 5; ++s) {
      const auto m = model_for(v, s);
      const auto b = oracle::random_batch(100 + s, 37, 4);
      for (double lambda : {0.0, 0.3, 1.0}) {
        const auto got = forward_loss(m, b, lambda);
        const auto want = oracle::scalar_forward(m, b, lambda);
        CAPTURE(to_string(v));
        CHECK(got.L_y == doctest::Approx(want.L_y).epsilon(1e-12));
        CHECK(got.L_d == doctest::Approx(want.L_d).epsilon(1e-12));
        CHECK(got.L_g == doctest::Approx(want.L_g).epsilon(1e-12));
        CHECK(got.total == doctest::Approx(want.total).epsilon(1e-12));
        CHECK(got.L_y >= 0);
        CHECK(got.L_d >= 0);
        CHECK(got.L_g >= 0);
      }
    }
  }
}

TEST_CASE("analytic gradients match central differences") {
  for (auto v : kVariants) {
    for (std::uint64_t s = 1; s <= 3; ++s) {
      const auto m = model_for(v, s);
      const auto b = oracle::random_batch(200 + s, 24, 4);
      const auto r = oracle::check_gradients(m, b, 0.7);
      CAPTURE(to_string(v));
      CAPTURE(r.worst);
      CHECK(r.checked > 400);
      CHECK(r.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("lambda = 0 removes the domain term from the features") {
  const auto b = oracle::random_batch(9, 50, 4);
  auto dann = model_for(Variant::dann, 4);
  auto naive = dann;
  naive.variant = Variant::naive_combined;
  CHECK(forward_loss(dann, b, 0.0).total == forward_loss(naive, b, 0.0).total);
  const auto gd = backward_grads(dann, b, 0.0);
  const auto gn = backward_grads(naive, b, 0.0);
  CHECK(gd.features == gn.features);
  CHECK(gd.classifier == gn.classifier);
  CHECK(gd.discriminator == gn.discriminator);
  // With lambda > 0 the features do see the domain loss.
  CHECK_FALSE(backward_grads(dann, b, 0.5).features == gn.features);
}

TEST_CASE("gradient reversal junction") {
  GradientReversal g{0.8};
  Eigen::MatrixXd f = Eigen::MatrixXd::Random(8, 5);
  CHECK(g.forward(f) == f);
  CHECK(g.backward(f).isApprox(-0.8 * f));
}

TEST_CASE("adda gradients leave the frozen parts at zero") {
  const auto m = model_for(Variant::adda, 2);
  const auto g = backward_grads(m, oracle::random_batch(4, 40, 4), 0.5);
  CHECK(g.features.hidden.W.isZero(0));
  CHECK(g.features.out.W.isZero(0));
  CHECK(g.classifier.out.W.isZero(0));
  CHECK_FALSE(g.real_features.hidden.W.isZero(0));
}

TEST_CASE("softmax columns sum to one and the discriminator stays in (0, 1)") {
  for (auto v : kVariants) {
    const auto m = model_for(v, 6);
    Eigen::Matrix2Xd x = Eigen::Matrix2Xd::Random(2, 500) * 6.0;
    for (auto d : {Domain::sim, Domain::real}) {
      const auto p = predict_proba(m, x, d);
      for (Eigen::Index c = 0; c < p.cols(); ++c) CHECK(std::abs(p.col(c).sum() - 1.0) < 1e-12);
      const auto q = discriminate(m, x, d);
      CHECK(q.minCoeff() > 0.0);
      CHECK(q.maxCoeff() < 1.0);
    }
  }
}

TEST_CASE("non-finite weights raise a numeric error") {
  auto m = init_model(Variant::dann, 4, 1);
  m.features.hidden.W(0, 0) = std::nan("");
  CHECK_THROWS_AS(forward_loss(m, oracle::random_batch(1, 8, 4), 0.5), NumericError);
}

TEST_CASE("lambda ramp") {
  CHECK(lambda_schedule(0.0, 1.0) == 0.0);
  CHECK(lambda_schedule(1.0, 1.0) == doctest::Approx(2.0 / (1.0 + std::exp(-10.0)) - 1.0).epsilon(1e-15));
  CHECK(lambda_schedule(0.5, 2.0) == doctest::Approx(2.0 * (2.0 / (1.0 + std::exp(-5.0)) - 1.0)));
}

TEST_CASE("zero epochs leave the model unchanged") {
  const auto d = make_shifted_dataset(small_fixture(1));
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto m = init_model(Variant::dann, 4, 5);
  const auto r = train(m, d, cfg);
  CHECK(r.model == m);
  CHECK(r.trace.empty());
}

TEST_CASE("training is deterministic per seed") {
  const auto d = make_shifted_dataset(small_fixture(2));
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.seed = 7;
  for (auto v : kVariants) {
    const auto a = train_variant(v, d, cfg);
    const auto b = train_variant(v, d, cfg);
    CHECK(a.model == b.model);
    CHECK(same_trace(a.trace, b.trace));
    REQUIRE(a.trace.size() == 4);
    CHECK(a.trace.back().lambda > a.trace.front().lambda);
  }
}

TEST_CASE("lambda = 0 dann training is bit-identical to naive combined") {
  const auto d = make_shifted_dataset(small_fixture(3));
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 11;
  auto dann = init_model(Variant::dann, 4, cfg.seed);
  auto naive = init_model(Variant::naive_combined, 4, cfg.seed);
  dann.lambda_max = 0.0;
  naive.lambda_max = 0.0;
  REQUIRE(dann.features == naive.features);
  const auto a = train(dann, d, cfg);
  const auto b = train(naive, d, cfg);
  CHECK(a.model.features == b.model.features);
  CHECK(a.model.classifier == b.model.classifier);
  CHECK(a.model.discriminator == b.model.discriminator);
  CHECK(same_trace(a.trace, b.trace));
}

TEST_CASE("adda adaptation keeps the sim extractor and classifier frozen") {
  const auto d = make_shifted_dataset(small_fixture(4));
  TrainConfig cfg;
  cfg.epochs = 5;
  const auto pre = pretrain_for_adda(d, cfg);
  CHECK(pre.sim_pretrained);
  CHECK(pre.real_features == pre.features);
  const auto r = train(pre, d, cfg);
  CHECK(r.model.features == pre.features);
  CHECK(r.model.classifier == pre.classifier);
  CHECK_FALSE(r.model.real_features == pre.real_features);

  auto raw = init_model(Variant::adda, 4, 1);
  CHECK_THROWS(train(raw, d, cfg));
}

TEST_CASE("source-only on unshifted data transfers") {
  ShiftConfig sc = small_fixture(5);
  sc.rotation_deg = 0;
  sc.translation = {0, 0};
  const auto d = make_shifted_dataset(sc);
  TrainConfig cfg;
  cfg.epochs = 30;
  const auto r = train_variant(Variant::source_only, d, cfg);
  const double sim = evaluate_accuracy(r.model, d, Split::sim_eval);
  const double real = evaluate_accuracy(r.model, d, Split::real_eval);
  CHECK(sim > 0.9);
  CHECK(std::abs(sim - real) < 0.06);
}

TEST_CASE("mix_eval is the count-weighted mean of the eval splits") {
  const auto d = make_shifted_dataset(small_fixture(6));
  TrainConfig cfg;
  cfg.epochs = 3;
  const auto r = train_variant(Variant::dann, d, cfg);
  const double sim = evaluate_accuracy(r.model, d, Split::sim_eval);
  const double real = evaluate_accuracy(r.model, d, Split::real_eval);
  const double ns = static_cast<double>(d.sim_eval.size()), nr = static_cast<double>(d.real_eval.size());
  CHECK(evaluate_accuracy(r.model, d, Split::mix_eval) == doctest::Approx((ns * sim + nr * real) / (ns + nr)));
}

TEST_CASE("a perfect memorizer scores 1 and empty splits are errors") {
  const auto d = make_shifted_dataset(small_fixture(7));
  CHECK(accuracy(d.sim_train, [](const Point& p) { return p.label; }) == 1.0);
  ShiftedDataset empty;
  empty.num_classes = 4;
  CHECK_THROWS_AS(evaluate_accuracy(init_model(Variant::dann, 4, 1), empty, Split::real_eval), DatasetError);
}

TEST_CASE("model JSON round-trips exactly") {
  for (auto v : kVariants) {
    const auto m = model_for(v, 8);
    CHECK(model_from_json(model_to_json(m)) == m);
  }
}
