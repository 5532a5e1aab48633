#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "fog/error.hpp"

namespace fog::dior {

enum class Domain : std::uint8_t { sim = 0, real = 1 };

struct Point {
  Eigen::Vector2d x;
  int label = 0;         // ground truth, always present
  Domain domain = Domain::sim;
  bool labeled = true;   // whether training may see `label`
};

struct ShiftConfig {
  std::uint64_t seed = 1;
  int num_classes = 4;
  std::size_t n_sim = 2000;
  std::size_t n_real = 400;
  double rotation_deg = 30.0;
  Eigen::Vector2d translation{0.5, -0.3};
  double labeled_real_fraction = 0.1;
  double blob_std = 0.35;
  double radius = 2.0;
  double train_fraction = 0.6;
};

/// Two-domain toy problem: class c is a Gaussian blob around
/// radius * (cos 2pi c/C, sin 2pi c/C) in sim; the real domain rotates and
/// translates the blob centers. Each domain is split train/eval; only
/// labeled_real_fraction of real_train exposes its labels.
struct ShiftedDataset {
  int num_classes = 0;
  std::vector<Eigen::Vector2d> sim_centers;
  std::vector<Eigen::Vector2d> real_centers;
  std::vector<Point> sim_train;
  std::vector<Point> sim_eval;
  std::vector<Point> real_train;
  std::vector<Point> real_eval;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

/// Deterministic in cfg.seed. Labels cycle 0..C-1 so classes are balanced.
ShiftedDataset make_shifted_dataset(const ShiftConfig& cfg);

/// Blob centers before and after the domain shift.
Eigen::Vector2d sim_center(int c, int num_classes, double radius);
Eigen::Vector2d shift_point(const Eigen::Vector2d& p, double rotation_deg, const Eigen::Vector2d& translation);

}  // namespace fog::dior
