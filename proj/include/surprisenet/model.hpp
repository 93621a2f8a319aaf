#pragma once

#include <optional>
#include <string>
#include <vector>

#include "surprisenet/masked.hpp"
#include "surprisenet/tape.hpp"
#include "surprisenet/tensor.hpp"

namespace surprisenet {

enum class Variant { AE, VAE };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct ModelConfig {
  int64_t input_dim = 0;
  std::vector<int64_t> hidden_dims;  // encoder widths; decoder mirrors them
  int64_t latent_dim = 0;
  int64_t class_count = 0;  // shared head over every class of the scenario
  Variant variant = Variant::AE;
  float kl_weight = 0.001f;

  void validate() const;
};

// Evaluation-mode outputs of one forward pass.
struct ForwardResult {
  Tensor reconstruction;
  Tensor logits;
  Tensor latent;
  Tensor mu;       // VAE only
  Tensor log_var;  // VAE only
  std::vector<float> per_instance_rec_loss;
};

// Tape handles from a training-mode pass.
struct TrainForward {
  Var input;
  Var reconstruction;
  Var logits;
  Var latent;
  Var mu;
  Var log_var;
  struct ParamRef {
    const MaskedLinearLayer* layer;
    Var w;
    Var b;
  };
  std::vector<ParamRef> params;  // canonical layer order
};

struct LossBreakdown {
  Var total_var;
  float total = 0.f;
  float reconstruction = 0.f;
  float classification = 0.f;
  float kl = 0.f;
};

// Encoder-decoder-classifier over masked layers. The encoder and decoder
// form the auto-encoder; the classifier reads the latent code, so every
// forward pass yields both a reconstruction and logits.
class HybridModel {
 public:
  HybridModel(ModelConfig cfg, int total_tasks_planned);

  const ModelConfig& config() const { return cfg_; }
  TaskRegistry& registry() { return registry_; }
  const TaskRegistry& registry() const { return registry_; }

  std::vector<MaskedLinearLayer*> layers();
  std::vector<const MaskedLinearLayer*> layers() const;
  const std::vector<std::string>& layer_names() const { return layer_names_; }

  // Draws fresh values for every free weight; assigned weights are untouched.
  void init_free_parameters(Rng& rng);

  // phase Evaluate walks the task-k subset deterministically (VAE uses
  // z = mu); phase Full ignores masks (baselines).
  ForwardResult forward(const Tensor& x, TaskId k, Phase phase = Phase::Evaluate) const;

  // Training pass on a tape. VAE requires noise of shape [n, latent_dim].
  TrainForward forward_train(GradientTape& tape, const Tensor& x, TaskId k, Phase phase,
                             const Tensor* vae_noise) const;

  // L = L_rec + L_cls (+ kl_weight * KL for the VAE variant).
  LossBreakdown training_loss(GradientTape& tape, const TrainForward& fwd, const std::vector<int>& labels) const;

  // L = L_cls only — plain cross-entropy fine-tuning for the sequential
  // baseline. The reconstruction term is still reported for the logs but
  // carries no gradient.
  LossBreakdown classification_loss(GradientTape& tape, const TrainForward& fwd,
                                    const std::vector<int>& labels) const;

  int64_t parameter_count() const;

 private:
  ModelConfig cfg_;
  TaskRegistry registry_;
  std::vector<MaskedLinearLayer> enc_hidden_;
  MaskedLinearLayer enc_mu_;
  std::optional<MaskedLinearLayer> enc_log_var_;
  std::vector<MaskedLinearLayer> dec_hidden_;
  MaskedLinearLayer dec_out_;
  MaskedLinearLayer classifier_;
  std::vector<std::string> layer_names_;
};

}  // namespace surprisenet
