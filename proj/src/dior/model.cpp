#include "fog/dior/model.hpp"

#include <cmath>
#include <string>

namespace fog::dior {

using Eigen::ArrayXXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::source_only: return "source_only";
    case Variant::naive_combined: return "naive_combined";
    case Variant::dann: return "dann";
    case Variant::adda: return "adda";
  }
  return "?";
}

Variant parse_variant(std::string_view text) {
  if (text == "source" || text == "source_only") return Variant::source_only;
  if (text == "naive" || text == "naive_combined") return Variant::naive_combined;
  if (text == "dann") return Variant::dann;
  if (text == "adda") return Variant::adda;
  throw Error("unknown variant '" + std::string(text) + "'");
}

namespace {

void glorot(Dense& layer, simcore::RngStream& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(layer.W.rows() + layer.W.cols()));
  for (Eigen::Index r = 0; r < layer.W.rows(); ++r)
    for (Eigen::Index c = 0; c < layer.W.cols(); ++c) layer.W(r, c) = limit * (2.0 * rng.uniform01() - 1.0);
  layer.b.setZero();
}

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

MatrixXd affine(const Dense& l, const MatrixXd& x) { return (l.W * x).colwise() + l.b; }

bool finite(const Dense& l) { return l.W.allFinite() && l.b.allFinite(); }

bool finite(const DiorModel& m) {
  return finite(m.features.hidden) && finite(m.features.out) && finite(m.real_features.hidden) &&
         finite(m.real_features.out) && finite(m.classifier.out) && finite(m.discriminator.hidden) &&
         finite(m.discriminator.out);
}

struct ExtractorPass {
  MatrixXd h1;  // tanh(W1 x + b1)
  MatrixXd f;   // tanh(W2 h1 + b2)
};

ExtractorPass extract(const FeatureExtractor& F, const MatrixXd& x) {
  ExtractorPass p;
  p.h1 = affine(F.hidden, x).array().tanh().matrix();
  p.f = affine(F.out, p.h1).array().tanh().matrix();
  return p;
}

void extractor_backward(const FeatureExtractor& F, const MatrixXd& x, const ExtractorPass& p, const MatrixXd& df,
                        FeatureExtractor& grad) {
  const MatrixXd dz2 = (df.array() * (1.0 - p.f.array().square())).matrix();
  grad.out.W = dz2 * p.h1.transpose();
  grad.out.b = dz2.rowwise().sum();
  const MatrixXd dh1 = F.out.W.transpose() * dz2;
  const MatrixXd dz1 = (dh1.array() * (1.0 - p.h1.array().square())).matrix();
  grad.hidden.W = dz1 * x.transpose();
  grad.hidden.b = dz1.rowwise().sum();
}

MatrixXd softmax_cols(const MatrixXd& logits) {
  MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    const VectorXd e = (logits.col(c).array() - m).exp().matrix();
    p.col(c) = e / e.sum();
  }
  return p;
}

bool trains_label(Variant v, Domain d) {
  switch (v) {
    case Variant::source_only: return d == Domain::sim;
    case Variant::naive_combined:
    case Variant::dann: return true;
    case Variant::adda: return d == Domain::real;
  }
  return false;
}

/// Everything the backward pass needs from one forward evaluation.
struct Pass {
  Eigen::Index n = 0;
  MatrixXd x;
  // adda routes real columns through real_features; otherwise all columns
  // use `features`. Kept as two passes over column subsets.
  std::vector<Eigen::Index> sim_cols, real_cols;
  ExtractorPass shared;  // non-adda
  MatrixXd x_sim, x_real;
  ExtractorPass sim_pass, real_pass;  // adda
  MatrixXd f;                         // 8 x n features, column order of the batch
  MatrixXd probs;                     // C x n
  MatrixXd dlogits;                   // C x n, dL_y / dlogits
  MatrixXd g;                         // discriminator hidden activations, 8 x n
  VectorXd q;                         // sigmoid outputs, n
  VectorXd o;                         // discriminator logits, n
  LossBreakdown loss;
};

Pass run_forward(const DiorModel& m, const Batch& batch, double lambda) {
  if (batch.size() == 0) throw Error("forward_loss: empty batch");
  if (!finite(m)) throw NumericError("forward_loss: non-finite weights");
  Pass p;
  p.n = static_cast<Eigen::Index>(batch.size());
  p.x = batch.x;

  if (m.variant == Variant::adda) {
    for (Eigen::Index i = 0; i < p.n; ++i)
      (batch.domain[i] == Domain::sim ? p.sim_cols : p.real_cols).push_back(i);
    p.x_sim.resize(2, static_cast<Eigen::Index>(p.sim_cols.size()));
    p.x_real.resize(2, static_cast<Eigen::Index>(p.real_cols.size()));
    for (std::size_t k = 0; k < p.sim_cols.size(); ++k) p.x_sim.col(k) = p.x.col(p.sim_cols[k]);
    for (std::size_t k = 0; k < p.real_cols.size(); ++k) p.x_real.col(k) = p.x.col(p.real_cols[k]);
    p.sim_pass = extract(m.features, p.x_sim);
    p.real_pass = extract(m.real_features, p.x_real);
    p.f.resize(8, p.n);
    for (std::size_t k = 0; k < p.sim_cols.size(); ++k) p.f.col(p.sim_cols[k]) = p.sim_pass.f.col(k);
    for (std::size_t k = 0; k < p.real_cols.size(); ++k) p.f.col(p.real_cols[k]) = p.real_pass.f.col(k);
  } else {
    p.shared = extract(m.features, p.x);
    p.f = p.shared.f;
  }

  // Classification.
  p.probs = softmax_cols(affine(m.classifier.out, p.f));
  p.dlogits = MatrixXd::Zero(p.probs.rows(), p.n);
  std::size_t labeled = 0;
  for (Eigen::Index i = 0; i < p.n; ++i)
    if (batch.label[i] >= 0 && trains_label(m.variant, batch.domain[i])) ++labeled;
  double ly = 0.0;
  if (labeled > 0) {
    const double inv = 1.0 / static_cast<double>(labeled);
    for (Eigen::Index i = 0; i < p.n; ++i) {
      const int y = batch.label[i];
      if (y < 0 || !trains_label(m.variant, batch.domain[i])) continue;
      if (y >= m.num_classes) throw Error("forward_loss: label out of range");
      ly -= std::log(p.probs(y, i));
      p.dlogits.col(i) = p.probs.col(i) * inv;
      p.dlogits(y, i) -= inv;
    }
    ly *= inv;
  }

  // Domain discrimination; target 1 for sim, 0 for real.
  p.g = affine(m.discriminator.hidden, p.f).array().tanh().matrix();
  p.o = affine(m.discriminator.out, p.g).row(0).transpose();
  p.q.resize(p.n);
  double ld = 0.0, lg = 0.0;
  std::size_t n_real = 0;
  for (Eigen::Index i = 0; i < p.n; ++i) {
    const double t = batch.domain[i] == Domain::sim ? 1.0 : 0.0;
    p.q(i) = sigmoid(p.o(i));
    ld += softplus(p.o(i)) - t * p.o(i);
    if (batch.domain[i] == Domain::real) {
      lg += softplus(-p.o(i));
      ++n_real;
    }
  }
  ld /= static_cast<double>(p.n);
  if (n_real > 0) lg /= static_cast<double>(n_real);

  p.loss.L_y = ly;
  p.loss.L_d = ld;
  p.loss.L_g = m.variant == Variant::adda ? lg : 0.0;
  switch (m.variant) {
    case Variant::source_only:
    case Variant::naive_combined: p.loss.total = ly; break;
    case Variant::dann: p.loss.total = ly + lambda * ld; break;
    case Variant::adda: p.loss.total = ly + lambda * lg; break;
  }
  if (!std::isfinite(p.loss.total) || !std::isfinite(ld)) throw NumericError("forward_loss: non-finite loss");
  return p;
}

/// Backprop a gradient on the discriminator logits down to the features.
MatrixXd discriminator_input_grad(const DiorModel& m, const Pass& p, const Eigen::RowVectorXd& dlogit) {
  const MatrixXd dg = m.discriminator.out.W.transpose() * dlogit;
  const MatrixXd da = (dg.array() * (1.0 - p.g.array().square())).matrix();
  return m.discriminator.hidden.W.transpose() * da;
}

MatrixXd gather(const MatrixXd& m, const std::vector<Eigen::Index>& cols) {
  MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(k) = m.col(cols[k]);
  return out;
}

void zero_like(FeatureExtractor& g, const FeatureExtractor& ref) {
  g.hidden.W = MatrixXd::Zero(ref.hidden.W.rows(), ref.hidden.W.cols());
  g.hidden.b = VectorXd::Zero(ref.hidden.b.size());
  g.out.W = MatrixXd::Zero(ref.out.W.rows(), ref.out.W.cols());
  g.out.b = VectorXd::Zero(ref.out.b.size());
}

}  // namespace

DiorModel init_model(Variant variant, int num_classes, std::uint64_t seed) {
  if (num_classes < 2) throw Error("init_model: need at least 2 classes");
  DiorModel m;
  m.variant = variant;
  m.num_classes = num_classes;
  m.classifier.out = Dense(num_classes, 8);
  simcore::RngStream f_rng(seed, "dior/init/features");
  simcore::RngStream c_rng(seed, "dior/init/classifier");
  simcore::RngStream d_rng(seed, "dior/init/discriminator");
  glorot(m.features.hidden, f_rng);
  glorot(m.features.out, f_rng);
  glorot(m.classifier.out, c_rng);
  glorot(m.discriminator.hidden, d_rng);
  glorot(m.discriminator.out, d_rng);
  m.real_features = m.features;
  return m;
}

Batch make_batch(const std::vector<Point>& points, bool hide_unlabeled) {
  Batch b;
  b.x.resize(2, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    b.x.col(static_cast<Eigen::Index>(i)) = points[i].x;
    b.label.push_back(hide_unlabeled && !points[i].labeled ? -1 : points[i].label);
    b.domain.push_back(points[i].domain);
  }
  return b;
}

LossBreakdown forward_loss(const DiorModel& model, const Batch& batch, double lambda) {
  return run_forward(model, batch, lambda).loss;
}

GradientSet backward_grads(const DiorModel& model, const Batch& batch, double lambda) {
  LossBreakdown unused;
  return backward_grads(model, batch, lambda, unused);
}

GradientSet backward_grads(const DiorModel& m, const Batch& batch, double lambda, LossBreakdown& loss) {
  const Pass p = run_forward(m, batch, lambda);
  loss = p.loss;
  GradientSet g;

  // Classifier head.
  g.classifier.out.W = p.dlogits * p.f.transpose();
  g.classifier.out.b = p.dlogits.rowwise().sum();
  const MatrixXd df_y = m.classifier.out.W.transpose() * p.dlogits;

  // Discriminator, always on the unreversed domain loss.
  Eigen::RowVectorXd dlogit_d(p.n);
  for (Eigen::Index i = 0; i < p.n; ++i) {
    const double t = batch.domain[i] == Domain::sim ? 1.0 : 0.0;
    dlogit_d(i) = (p.q(i) - t) / static_cast<double>(p.n);
  }
  {
    const MatrixXd dg = m.discriminator.out.W.transpose() * dlogit_d;
    const MatrixXd da = (dg.array() * (1.0 - p.g.array().square())).matrix();
    g.discriminator.out.W = dlogit_d * p.g.transpose();
    g.discriminator.out.b = VectorXd::Constant(1, dlogit_d.sum());
    g.discriminator.hidden.W = da * p.f.transpose();
    g.discriminator.hidden.b = da.rowwise().sum();
  }

  if (m.variant == Variant::adda) {
    // Frozen sim side.
    zero_like(g.features, m.features);
    g.classifier.out.W.setZero();
    g.classifier.out.b.setZero();

    Eigen::RowVectorXd dlogit_g = Eigen::RowVectorXd::Zero(p.n);
    if (!p.real_cols.empty()) {
      const double inv = 1.0 / static_cast<double>(p.real_cols.size());
      for (auto i : p.real_cols) dlogit_g(i) = (p.q(i) - 1.0) * inv;
    }
    MatrixXd df = df_y;
    if (lambda != 0.0) df += lambda * discriminator_input_grad(m, p, dlogit_g);
    if (p.real_cols.empty()) {
      zero_like(g.real_features, m.real_features);
    } else {
      extractor_backward(m.real_features, p.x_real, p.real_pass, gather(df, p.real_cols), g.real_features);
    }
    return g;
  }

  MatrixXd df = df_y;
  if (m.variant == Variant::dann && lambda != 0.0) {
    const GradientReversal grl{lambda};
    df += grl.backward(discriminator_input_grad(m, p, dlogit_d));
  }
  extractor_backward(m.features, p.x, p.shared, df, g.features);
  zero_like(g.real_features, m.real_features);
  return g;
}

Eigen::MatrixXd predict_proba(const DiorModel& model, const Eigen::Matrix2Xd& x, Domain domain) {
  const FeatureExtractor& F =
      model.variant == Variant::adda && domain == Domain::real ? model.real_features : model.features;
  return softmax_cols(affine(model.classifier.out, extract(F, x).f));
}

Eigen::VectorXd discriminate(const DiorModel& model, const Eigen::Matrix2Xd& x, Domain domain) {
  const FeatureExtractor& F =
      model.variant == Variant::adda && domain == Domain::real ? model.real_features : model.features;
  const MatrixXd g = affine(model.discriminator.hidden, extract(F, x).f).array().tanh().matrix();
  const VectorXd o = affine(model.discriminator.out, g).row(0).transpose();
  return o.unaryExpr([](double z) { return sigmoid(z); });
}

int predict(const DiorModel& model, const Eigen::Vector2d& x, Domain domain) {
  Eigen::Matrix2Xd col(2, 1);
  col.col(0) = x;
  Eigen::Index best = 0;
  predict_proba(model, col, domain).col(0).maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace fog::dior
