#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "fog/dior/dataset.hpp"
#include "fog/error.hpp"
#include "fog/simcore/rng.hpp"

namespace fog::dior {

enum class Variant { source_only, naive_combined, dann, adda };

std::string_view to_string(Variant v);
/// Accepts the long names and the CLI short forms source|naive|dann|adda.
Variant parse_variant(std::string_view text);

/// Affine layer y = W x + b.
struct Dense {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;

  Dense() = default;
  Dense(Eigen::Index out, Eigen::Index in) : W(Eigen::MatrixXd::Zero(out, in)), b(Eigen::VectorXd::Zero(out)) {}
  bool operator==(const Dense& o) const { return W == o.W && b == o.b; }
};

/// 2 -> 16 -> 8, tanh after both layers.
struct FeatureExtractor {
  Dense hidden{16, 2};
  Dense out{8, 16};
  bool operator==(const FeatureExtractor&) const = default;
};

/// 8 -> C logits, softmax.
struct Classifier {
  Dense out;
  bool operator==(const Classifier&) const = default;
};

/// 8 -> 8 (tanh) -> 1 logit, sigmoid. Predicts P(domain == sim).
struct Discriminator {
  Dense hidden{8, 8};
  Dense out{1, 8};
  bool operator==(const Discriminator&) const = default;
};

struct DiorModel {
  Variant variant = Variant::dann;
  int num_classes = 4;
  FeatureExtractor features;       // shared, or the sim-side extractor for adda
  FeatureExtractor real_features;  // adda only: the adapted real-side extractor
  Classifier classifier;
  Discriminator discriminator;
  double lambda_max = 1.0;
  bool sim_pretrained = false;  // adda: features/classifier trained on sim and frozen

  bool operator==(const DiorModel&) const = default;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Glorot-uniform weights, zero biases. Each sub-network draws from its own
/// stream, so the variant does not change the shared initial weights.
DiorModel init_model(Variant variant, int num_classes, std::uint64_t seed);

/// Points are columns of `x`. label < 0 means "no label visible".
struct Batch {
  Eigen::Matrix2Xd x;
  std::vector<int> label;
  std::vector<Domain> domain;

  std::size_t size() const { return label.size(); }
};

Batch make_batch(const std::vector<Point>& points, bool hide_unlabeled = true);

struct LossBreakdown {
  double L_y = 0.0;  // cross-entropy over the labeled points the variant trains on
  double L_d = 0.0;  // domain BCE of the discriminator over every point
  double L_g = 0.0;  // adda: generator BCE with inverted (sim) targets on real points
  double total = 0.0;
};

/// Gradients, laid out like the parameters they belong to.
struct GradientSet {
  FeatureExtractor features;
  FeatureExtractor real_features;
  Classifier classifier;
  Discriminator discriminator;
};

/// Loss terms at adversarial coefficient `lambda`:
///   source_only: total = L_y over labeled sim points
///   naive:       total = L_y over labeled sim and real points
///   dann:        total = L_y + lambda * L_d, with the domain loss reaching the
///                features through a gradient-reversal junction
///   adda:        total = L_y (labeled real, through real_features) + lambda * L_g
/// L_d is always the discriminator's own objective. Throws NumericError on
/// non-finite weights or losses.
LossBreakdown forward_loss(const DiorModel& model, const Batch& batch, double lambda);

/// Exact gradients of the per-group objectives:
///   features:      dL_y - lambda * dL_d   (dann; reversed domain gradient)
///                  dL_y                   (source_only, naive)
///                  zero                   (adda: frozen)
///   real_features: d(L_y + lambda * L_g)  (adda only)
///   classifier:    dL_y                   (zero for adda: frozen)
///   discriminator: dL_d                   (never reversed)
GradientSet backward_grads(const DiorModel& model, const Batch& batch, double lambda);
/// Same, also returning the losses of the shared forward pass.
GradientSet backward_grads(const DiorModel& model, const Batch& batch, double lambda, LossBreakdown& loss);

/// Column-wise softmax of class probabilities for each point, using the
/// domain-appropriate extractor.
Eigen::MatrixXd predict_proba(const DiorModel& model, const Eigen::Matrix2Xd& x, Domain domain);
/// P(domain == sim) for each point.
Eigen::VectorXd discriminate(const DiorModel& model, const Eigen::Matrix2Xd& x, Domain domain);
int predict(const DiorModel& model, const Eigen::Vector2d& x, Domain domain);

/// Gradient-reversal junction: identity forward, -lambda * upstream backward.
struct GradientReversal {
  double lambda = 0.0;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& features) const { return features; }
  Eigen::MatrixXd backward(const Eigen::MatrixXd& upstream) const { return -lambda * upstream; }
};

}  // namespace fog::dior
