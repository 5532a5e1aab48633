#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fog/dior/dataset.hpp"
#include "fog/dior/model.hpp"

namespace fog::dior {

struct TrainConfig {
  int epochs = 200;
  double lr = 0.05;
  double momentum = 0.9;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;
};

struct EpochMetrics {
  int epoch = 0;
  double lambda = 0.0;
  double L_y = 0.0;  // mean over the epoch's steps
  double L_d = 0.0;
  double disc_accuracy = 0.0;  // balanced, on the eval splits
};

struct TrainResult {
  DiorModel model;
  std::vector<EpochMetrics> trace;
};

class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::vector<EpochMetrics> trace)
      : NumericError(what), trace_(std::move(trace)) {}
  const std::vector<EpochMetrics>& trace() const { return trace_; }

 private:
  std::vector<EpochMetrics> trace_;
};

/// lambda_p = lambda_max * (2 / (1 + exp(-10 p)) - 1), p in [0, 1].
double lambda_schedule(double progress, double lambda_max);

/// Minibatch SGD with momentum. Every step pairs batch_size sim points (one
/// pass over sim_train per epoch) with batch_size real points drawn from a
/// reshuffled cycle over real_train. The discriminator trains in every
/// variant - on detached features unless the variant is adversarial - so its
/// accuracy is comparable across variants. adda requires
/// model.sim_pretrained and leaves features/classifier untouched.
TrainResult train(DiorModel model, const ShiftedDataset& data, const TrainConfig& cfg);

/// adda stage one: source-only training on sim, then the real extractor is
/// initialized from the sim one and the sim side is marked frozen.
DiorModel pretrain_for_adda(const ShiftedDataset& data, const TrainConfig& cfg);

/// init_model + train, with the adda pretraining stage when needed. The
/// initial weights are seeded from cfg.seed.
TrainResult train_variant(Variant variant, const ShiftedDataset& data, const TrainConfig& cfg);

enum class Split { sim_eval, real_eval, mix_eval };

std::string_view to_string(Split s);

/// Fraction of argmax-correct labels. mix_eval is the union of both eval
/// splits. Throws DatasetError on an empty split.
double evaluate_accuracy(const DiorModel& model, const ShiftedDataset& data, Split which);

/// Fraction of points for which `predict` returns the true label.
double accuracy(const std::vector<Point>& points, const std::function<int(const Point&)>& predict);

/// Mean of the per-domain accuracies of the discriminator (0.5 = chance).
double discriminator_accuracy(const DiorModel& model, const std::vector<Point>& sim,
                              const std::vector<Point>& real);

struct FinalMetrics {
  double sim_eval = 0.0;
  double real_eval = 0.0;
  double mix_eval = 0.0;
  double disc_accuracy = 0.0;
};

FinalMetrics final_metrics(const DiorModel& model, const ShiftedDataset& data);

nlohmann::json metrics_to_json(const TrainResult& result, const FinalMetrics& final, const TrainConfig& cfg);

nlohmann::json model_to_json(const DiorModel& model);
DiorModel model_from_json(const nlohmann::json& j);

}  // namespace fog::dior
