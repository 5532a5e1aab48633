#include "fog/dior/train.hpp"

#include <cmath>

#include "fog/simcore/rng.hpp"

namespace fog::dior {

using nlohmann::json;

double lambda_schedule(double progress, double lambda_max) {
  return lambda_max * (2.0 / (1.0 + std::exp(-10.0 * progress)) - 1.0);
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::sim_eval: return "sim_eval";
    case Split::real_eval: return "real_eval";
    case Split::mix_eval: return "mix_eval";
  }
  return "?";
}

namespace {

template <typename T>
void shuffle(std::vector<T>& v, simcore::RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

struct Momentum {
  GradientSet velocity;
  bool initialized = false;
};

void step_layer(Dense& param, Dense& vel, const Dense& grad, double lr, double mu) {
  vel.W = mu * vel.W + grad.W;
  vel.b = mu * vel.b + grad.b;
  param.W -= lr * vel.W;
  param.b -= lr * vel.b;
}

void step_extractor(FeatureExtractor& p, FeatureExtractor& v, const FeatureExtractor& g, double lr, double mu) {
  step_layer(p.hidden, v.hidden, g.hidden, lr, mu);
  step_layer(p.out, v.out, g.out, lr, mu);
}

void zero_layer(Dense& v, const Dense& like) {
  v.W = Eigen::MatrixXd::Zero(like.W.rows(), like.W.cols());
  v.b = Eigen::VectorXd::Zero(like.b.size());
}

void init_velocity(Momentum& m, const DiorModel& model) {
  zero_layer(m.velocity.features.hidden, model.features.hidden);
  zero_layer(m.velocity.features.out, model.features.out);
  zero_layer(m.velocity.real_features.hidden, model.real_features.hidden);
  zero_layer(m.velocity.real_features.out, model.real_features.out);
  zero_layer(m.velocity.classifier.out, model.classifier.out);
  zero_layer(m.velocity.discriminator.hidden, model.discriminator.hidden);
  zero_layer(m.velocity.discriminator.out, model.discriminator.out);
  m.initialized = true;
}

void apply(DiorModel& model, Momentum& mom, const GradientSet& g, double lr, double mu) {
  if (!mom.initialized) init_velocity(mom, model);
  if (model.variant == Variant::adda) {
    step_extractor(model.real_features, mom.velocity.real_features, g.real_features, lr, mu);
  } else {
    step_extractor(model.features, mom.velocity.features, g.features, lr, mu);
    step_layer(model.classifier.out, mom.velocity.classifier.out, g.classifier.out, lr, mu);
  }
  step_layer(model.discriminator.hidden, mom.velocity.discriminator.hidden, g.discriminator.hidden, lr, mu);
  step_layer(model.discriminator.out, mom.velocity.discriminator.out, g.discriminator.out, lr, mu);
}

std::vector<Point> eval_union(const ShiftedDataset& d) {
  std::vector<Point> all = d.sim_eval;
  all.insert(all.end(), d.real_eval.begin(), d.real_eval.end());
  return all;
}

}  // namespace

TrainResult train(DiorModel model, const ShiftedDataset& data, const TrainConfig& cfg) {
  if (model.variant == Variant::adda && !model.sim_pretrained)
    throw Error("train: adda needs a sim-pretrained model (see pretrain_for_adda)");
  if (model.num_classes != data.num_classes) throw Error("train: model and dataset disagree on class count");
  if (cfg.batch_size == 0) throw Error("train: batch_size must be positive");
  if (cfg.epochs < 0) throw Error("train: epochs must be >= 0");
  if (data.sim_train.empty() || data.real_train.empty()) throw DatasetError("train: empty training split");

  TrainResult result{std::move(model), {}};
  if (cfg.epochs == 0) return result;
  DiorModel& m = result.model;

  simcore::RngStream rng(cfg.seed, "dior/train/batches");
  std::vector<Point> sim = data.sim_train;
  std::vector<Point> real = data.real_train;
  std::size_t real_cursor = real.size();  // forces a shuffle on first use

  const std::size_t steps_per_epoch = (sim.size() + cfg.batch_size - 1) / cfg.batch_size;
  const double total_steps = static_cast<double>(steps_per_epoch) * cfg.epochs;
  std::size_t global_step = 0;
  Momentum mom;

  std::vector<Point> batch_points;
  batch_points.reserve(2 * cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(sim, rng);
    double sum_ly = 0.0, sum_ld = 0.0, lam = 0.0;
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      batch_points.clear();
      const std::size_t begin = s * cfg.batch_size;
      const std::size_t end = std::min(sim.size(), begin + cfg.batch_size);
      batch_points.insert(batch_points.end(), sim.begin() + static_cast<std::ptrdiff_t>(begin),
                          sim.begin() + static_cast<std::ptrdiff_t>(end));
      for (std::size_t k = 0; k < cfg.batch_size; ++k) {
        if (real_cursor == real.size()) {
          shuffle(real, rng);
          real_cursor = 0;
        }
        batch_points.push_back(real[real_cursor++]);
      }
      lam = lambda_schedule(static_cast<double>(global_step) / total_steps, m.lambda_max);
      LossBreakdown loss;
      GradientSet g;
      try {
        g = backward_grads(m, make_batch(batch_points), lam, loss);
      } catch (const NumericError& e) {
        throw DivergenceError(std::string("train diverged at epoch ") + std::to_string(epoch) + ": " + e.what(),
                              result.trace);
      }
      apply(m, mom, g, cfg.lr, cfg.momentum);
      sum_ly += loss.L_y;
      sum_ld += loss.L_d;
      ++global_step;
    }
    EpochMetrics em;
    em.epoch = epoch;
    em.lambda = lam;
    em.L_y = sum_ly / static_cast<double>(steps_per_epoch);
    em.L_d = sum_ld / static_cast<double>(steps_per_epoch);
    em.disc_accuracy = discriminator_accuracy(m, data.sim_eval, data.real_eval);
    result.trace.push_back(em);
    if (!std::isfinite(em.L_y) || !std::isfinite(em.L_d))
      throw DivergenceError("train diverged at epoch " + std::to_string(epoch), result.trace);
  }
  return result;
}

DiorModel pretrain_for_adda(const ShiftedDataset& data, const TrainConfig& cfg) {
  DiorModel m = init_model(Variant::source_only, data.num_classes, cfg.seed);
  m = train(std::move(m), data, cfg).model;
  m.variant = Variant::adda;
  m.real_features = m.features;
  m.sim_pretrained = true;
  return m;
}

TrainResult train_variant(Variant variant, const ShiftedDataset& data, const TrainConfig& cfg) {
  if (variant == Variant::adda) return train(pretrain_for_adda(data, cfg), data, cfg);
  return train(init_model(variant, data.num_classes, cfg.seed), data, cfg);
}

double accuracy(const std::vector<Point>& points, const std::function<int(const Point&)>& predict) {
  if (points.empty()) throw DatasetError("accuracy: empty split");
  std::size_t correct = 0;
  for (const auto& p : points)
    if (predict(p) == p.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(points.size());
}

double evaluate_accuracy(const DiorModel& model, const ShiftedDataset& data, Split which) {
  const std::vector<Point>& pts = which == Split::sim_eval ? data.sim_eval : data.real_eval;
  if (which == Split::mix_eval) {
    return accuracy(eval_union(data), [&](const Point& p) { return predict(model, p.x, p.domain); });
  }
  return accuracy(pts, [&](const Point& p) { return predict(model, p.x, p.domain); });
}

double discriminator_accuracy(const DiorModel& model, const std::vector<Point>& sim,
                              const std::vector<Point>& real) {
  if (sim.empty() || real.empty()) throw DatasetError("discriminator_accuracy: empty split");
  auto frac = [&](const std::vector<Point>& pts, Domain d) {
    const Batch b = make_batch(pts, false);
    const Eigen::VectorXd q = discriminate(model, b.x, d);
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < q.size(); ++i)
      if ((q(i) > 0.5) == (d == Domain::sim)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(pts.size());
  };
  return 0.5 * (frac(sim, Domain::sim) + frac(real, Domain::real));
}

FinalMetrics final_metrics(const DiorModel& model, const ShiftedDataset& data) {
  return FinalMetrics{evaluate_accuracy(model, data, Split::sim_eval), evaluate_accuracy(model, data, Split::real_eval),
                      evaluate_accuracy(model, data, Split::mix_eval),
                      discriminator_accuracy(model, data.sim_eval, data.real_eval)};
}

json metrics_to_json(const TrainResult& result, const FinalMetrics& final, const TrainConfig& cfg) {
  json trace = json::array();
  for (const auto& e : result.trace)
    trace.push_back(
        {{"epoch", e.epoch}, {"lambda", e.lambda}, {"L_y", e.L_y}, {"L_d", e.L_d}, {"disc_accuracy", e.disc_accuracy}});
  return {{"variant", to_string(result.model.variant)},
          {"config",
           {{"epochs", cfg.epochs},
            {"lr", cfg.lr},
            {"momentum", cfg.momentum},
            {"batch_size", cfg.batch_size},
            {"seed", cfg.seed},
            {"lambda_max", result.model.lambda_max}}},
          {"trace", trace},
          {"final",
           {{"sim_eval", final.sim_eval},
            {"real_eval", final.real_eval},
            {"mix_eval", final.mix_eval},
            {"disc_accuracy", final.disc_accuracy}}}};
}

namespace {

json dense_to_json(const Dense& d) {
  json w = json::array();
  for (Eigen::Index r = 0; r < d.W.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < d.W.cols(); ++c) row.push_back(d.W(r, c));
    w.push_back(row);
  }
  json b = json::array();
  for (Eigen::Index r = 0; r < d.b.size(); ++r) b.push_back(d.b(r));
  return {{"W", w}, {"b", b}};
}

Dense dense_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  Dense d(rows, cols);
  const auto& w = j.at("W");
  const auto& b = j.at("b");
  if (w.size() != static_cast<std::size_t>(rows) || b.size() != static_cast<std::size_t>(rows))
    throw Error("dior weights: layer shape mismatch");
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (w[r].size() != static_cast<std::size_t>(cols)) throw Error("dior weights: layer shape mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) d.W(r, c) = w[r][c].get<double>();
    d.b(r) = b[r].get<double>();
  }
  return d;
}

json extractor_to_json(const FeatureExtractor& f) {
  return {{"hidden", dense_to_json(f.hidden)}, {"out", dense_to_json(f.out)}};
}

FeatureExtractor extractor_from_json(const json& j) {
  return FeatureExtractor{dense_from_json(j.at("hidden"), 16, 2), dense_from_json(j.at("out"), 8, 16)};
}

}  // namespace

json model_to_json(const DiorModel& m) {
  return {{"variant", to_string(m.variant)},
          {"num_classes", m.num_classes},
          {"lambda_max", m.lambda_max},
          {"sim_pretrained", m.sim_pretrained},
          {"features", extractor_to_json(m.features)},
          {"real_features", extractor_to_json(m.real_features)},
          {"classifier", dense_to_json(m.classifier.out)},
          {"discriminator",
           {{"hidden", dense_to_json(m.discriminator.hidden)}, {"out", dense_to_json(m.discriminator.out)}}}};
}

DiorModel model_from_json(const json& j) {
  try {
    DiorModel m;
    m.variant = parse_variant(j.at("variant").get<std::string>());
    m.num_classes = j.at("num_classes").get<int>();
    if (m.num_classes < 2) throw Error("dior weights: num_classes < 2");
    m.lambda_max = j.value("lambda_max", 1.0);
    m.sim_pretrained = j.value("sim_pretrained", false);
    m.features = extractor_from_json(j.at("features"));
    m.real_features = j.contains("real_features") ? extractor_from_json(j.at("real_features")) : m.features;
    m.classifier.out = dense_from_json(j.at("classifier"), m.num_classes, 8);
    m.discriminator.hidden = dense_from_json(j.at("discriminator").at("hidden"), 8, 8);
    m.discriminator.out = dense_from_json(j.at("discriminator").at("out"), 1, 8);
    return m;
  } catch (const json::exception& e) {
    throw Error(std::string("dior weights: ") + e.what());
  }
}

}  // namespace fog::dior
