#include "fog/dior/dataset.hpp"

#include <cmath>
#include <numbers>

#include "fog/simcore/rng.hpp"

namespace fog::dior {

Eigen::Vector2d sim_center(int c, int num_classes, double radius) {
  const double angle = 2.0 * std::numbers::pi * c / num_classes;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

Eigen::Vector2d shift_point(const Eigen::Vector2d& p, double rotation_deg, const Eigen::Vector2d& translation) {
  const double a = rotation_deg * std::numbers::pi / 180.0;
  return Eigen::Vector2d{std::cos(a) * p.x() - std::sin(a) * p.y(), std::sin(a) * p.x() + std::cos(a) * p.y()} +
         translation;
}

namespace {

template <typename T>
void shuffle(std::vector<T>& v, simcore::RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

std::vector<Point> sample_domain(const std::vector<Eigen::Vector2d>& centers, std::size_t n, double std,
                                 Domain domain, simcore::RngStream& rng) {
  std::vector<Point> out;
  out.reserve(n);
  const int C = static_cast<int>(centers.size());
  for (std::size_t i = 0; i < n; ++i) {
    Point p;
    p.label = static_cast<int>(i % C);
    p.domain = domain;
    const double dx = rng.standard_normal();
    const double dy = rng.standard_normal();
    p.x = centers[p.label] + std * Eigen::Vector2d{dx, dy};
    out.push_back(p);
  }
  shuffle(out, rng);
  return out;
}

}  // namespace

ShiftedDataset make_shifted_dataset(const ShiftConfig& cfg) {
  if (cfg.num_classes < 2) throw DatasetError("make_shifted_dataset: need at least 2 classes");
  if (cfg.n_sim < cfg.n_real) throw DatasetError("make_shifted_dataset: n_sim must be >= n_real");
  if (!(cfg.labeled_real_fraction >= 0.0 && cfg.labeled_real_fraction <= 1.0))
    throw DatasetError("make_shifted_dataset: labeled_real_fraction must lie in [0, 1]");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    throw DatasetError("make_shifted_dataset: train_fraction must lie in (0, 1)");

  ShiftedDataset ds;
  ds.num_classes = cfg.num_classes;
  for (int c = 0; c < cfg.num_classes; ++c) {
    ds.sim_centers.push_back(sim_center(c, cfg.num_classes, cfg.radius));
    ds.real_centers.push_back(shift_point(ds.sim_centers.back(), cfg.rotation_deg, cfg.translation));
  }

  simcore::RngStream sim_rng(cfg.seed, "dior/data/sim");
  simcore::RngStream real_rng(cfg.seed, "dior/data/real");
  auto sim = sample_domain(ds.sim_centers, cfg.n_sim, cfg.blob_std, Domain::sim, sim_rng);
  auto real = sample_domain(ds.real_centers, cfg.n_real, cfg.blob_std, Domain::real, real_rng);

  auto split = [&](std::vector<Point>& all, std::vector<Point>& train, std::vector<Point>& eval) {
    const auto n_train = static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(all.size())));
    train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
    eval.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train), all.end());
  };
  split(sim, ds.sim_train, ds.sim_eval);
  split(real, ds.real_train, ds.real_eval);

  // The real split is already shuffled, so its first k points are a uniform
  // random subset.
  const auto n_labeled =
      static_cast<std::size_t>(std::llround(cfg.labeled_real_fraction * static_cast<double>(ds.real_train.size())));
  for (std::size_t i = 0; i < ds.real_train.size(); ++i) ds.real_train[i].labeled = i < n_labeled;
  return ds;
}

}  // namespace fog::dior
