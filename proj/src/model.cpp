#include "surprisenet/model.hpp"

#include <utility>

#include "surprisenet/ops.hpp"

namespace surprisenet {

std::string variant_name(Variant v) { return v == Variant::AE ? "ae" : "vae"; }

Variant variant_from_name(const std::string& name) {
  if (name == "ae") return Variant::AE;
  if (name == "vae") return Variant::VAE;
  throw TensorError("unknown model variant '" + name + "' (expected ae or vae)");
}

void ModelConfig::validate() const {
  if (input_dim <= 0) throw TensorError("ModelConfig: input_dim must be positive");
  if (latent_dim <= 0) throw TensorError("ModelConfig: latent_dim must be positive");
  if (class_count <= 0) throw TensorError("ModelConfig: class_count must be positive");
  for (int64_t d : hidden_dims) {
    if (d <= 0) throw TensorError("ModelConfig: hidden dims must be positive");
  }
  if (kl_weight < 0.f) throw TensorError("ModelConfig: kl_weight must be non-negative");
}

namespace {

MaskedLinearLayer make_layer(int64_t in, int64_t out) { return MaskedLinearLayer(in, out); }

ModelConfig validated(ModelConfig cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

HybridModel::HybridModel(ModelConfig cfg, int total_tasks_planned)
    : cfg_(validated(std::move(cfg))),
      enc_mu_(make_layer(cfg_.hidden_dims.empty() ? cfg_.input_dim : cfg_.hidden_dims.back(), cfg_.latent_dim)),
      dec_out_(make_layer(cfg_.hidden_dims.empty() ? cfg_.latent_dim : cfg_.hidden_dims.front(), cfg_.input_dim)),
      classifier_(make_layer(cfg_.latent_dim, cfg_.class_count)) {
  if (total_tasks_planned < 1 || total_tasks_planned > kMaxTasks) {
    throw TensorError("HybridModel: planned task count outside [1, " + std::to_string(kMaxTasks) + "]");
  }
  registry_.total_tasks_planned = total_tasks_planned;

  int64_t prev = cfg_.input_dim;
  for (size_t i = 0; i < cfg_.hidden_dims.size(); ++i) {
    enc_hidden_.push_back(make_layer(prev, cfg_.hidden_dims[i]));
    layer_names_.push_back("enc_" + std::to_string(i));
    prev = cfg_.hidden_dims[i];
  }
  layer_names_.push_back("latent_mu");
  if (cfg_.variant == Variant::VAE) {
    enc_log_var_.emplace(make_layer(prev, cfg_.latent_dim));
    layer_names_.push_back("latent_log_var");
  }
  prev = cfg_.latent_dim;
  for (size_t i = cfg_.hidden_dims.size(); i > 0; --i) {
    dec_hidden_.push_back(make_layer(prev, cfg_.hidden_dims[i - 1]));
    layer_names_.push_back("dec_" + std::to_string(cfg_.hidden_dims.size() - i));
    prev = cfg_.hidden_dims[i - 1];
  }
  layer_names_.push_back("dec_out");
  layer_names_.push_back("classifier");
}

std::vector<MaskedLinearLayer*> HybridModel::layers() {
  std::vector<MaskedLinearLayer*> out;
  for (auto& l : enc_hidden_) out.push_back(&l);
  out.push_back(&enc_mu_);
  if (enc_log_var_) out.push_back(&*enc_log_var_);
  for (auto& l : dec_hidden_) out.push_back(&l);
  out.push_back(&dec_out_);
  out.push_back(&classifier_);
  return out;
}

std::vector<const MaskedLinearLayer*> HybridModel::layers() const {
  std::vector<const MaskedLinearLayer*> out;
  for (auto& l : enc_hidden_) out.push_back(&l);
  out.push_back(&enc_mu_);
  if (enc_log_var_) out.push_back(&*enc_log_var_);
  for (auto& l : dec_hidden_) out.push_back(&l);
  out.push_back(&dec_out_);
  out.push_back(&classifier_);
  return out;
}

void HybridModel::init_free_parameters(Rng& rng) {
  for (MaskedLinearLayer* l : layers()) l->init_free_weights(rng);
}

int64_t HybridModel::parameter_count() const {
  int64_t n = 0;
  for (const MaskedLinearLayer* l : layers()) n += l->weight_count() + l->out_dim();
  return n;
}

ForwardResult HybridModel::forward(const Tensor& x, TaskId k, Phase phase) const {
  if (x.rank() != 2 || x.cols() != cfg_.input_dim) {
    throw TensorError("forward: input width does not match input_dim " + std::to_string(cfg_.input_dim));
  }
  if (phase != Phase::Evaluate && phase != Phase::Full) {
    throw TensorError("forward: evaluation entry point got a training phase");
  }
  ForwardResult r;
  Tensor h = x;
  for (const auto& l : enc_hidden_) h = ops::relu(l.forward_visible(h, k, registry_, phase));
  Tensor mu = enc_mu_.forward_visible(h, k, registry_, phase);
  if (cfg_.variant == Variant::VAE) {
    r.mu = mu;
    r.log_var = enc_log_var_->forward_visible(h, k, registry_, phase);
  }
  r.latent = std::move(mu);  // deterministic evaluation: z = mu
  Tensor d = r.latent;
  for (const auto& l : dec_hidden_) d = ops::relu(l.forward_visible(d, k, registry_, phase));
  r.reconstruction = dec_out_.forward_visible(d, k, registry_, phase);
  r.logits = classifier_.forward_visible(r.latent, k, registry_, phase);
  r.per_instance_rec_loss = ops::per_row_mse(x, r.reconstruction);
  return r;
}

TrainForward HybridModel::forward_train(GradientTape& tape, const Tensor& x, TaskId k, Phase phase,
                                        const Tensor* vae_noise) const {
  if (x.rank() != 2 || x.cols() != cfg_.input_dim) {
    throw TensorError("forward_train: input width does not match input_dim " + std::to_string(cfg_.input_dim));
  }
  TrainForward f;
  f.input = tape.constant(x);
  Var h = f.input;
  auto run = [&](const MaskedLinearLayer& l, Var in) {
    Var w, b;
    Var out = l.forward_visible(tape, in, k, phase, registry_, w, b);
    f.params.push_back({&l, w, b});
    return out;
  };
  for (const auto& l : enc_hidden_) h = tape.relu(run(l, h));
  f.mu = run(enc_mu_, h);
  if (cfg_.variant == Variant::VAE) {
    f.log_var = run(*enc_log_var_, h);
    if (!vae_noise) throw TensorError("forward_train: VAE training requires injected noise");
    f.latent = tape.reparameterize(f.mu, f.log_var, *vae_noise);
  } else {
    f.latent = f.mu;
  }
  Var d = f.latent;
  for (const auto& l : dec_hidden_) d = tape.relu(run(l, d));
  f.reconstruction = run(dec_out_, d);
  f.logits = run(classifier_, f.latent);
  return f;
}

LossBreakdown HybridModel::training_loss(GradientTape& tape, const TrainForward& fwd,
                                         const std::vector<int>& labels) const {
  LossBreakdown out;
  Var rec = tape.mse(fwd.reconstruction, fwd.input);
  Var cls = tape.cross_entropy(fwd.logits, labels);
  out.reconstruction = tape.value(rec).item();
  out.classification = tape.value(cls).item();
  Var total = tape.add(rec, cls);
  if (cfg_.variant == Variant::VAE) {
    Var kl = tape.kl_standard_normal(fwd.mu, fwd.log_var);
    out.kl = tape.value(kl).item();
    total = tape.add(total, tape.scale(kl, cfg_.kl_weight));
  }
  out.total_var = total;
  out.total = tape.value(total).item();
  return out;
}

LossBreakdown HybridModel::classification_loss(GradientTape& tape, const TrainForward& fwd,
                                               const std::vector<int>& labels) const {
  LossBreakdown out;
  Var rec = tape.mse(fwd.reconstruction, fwd.input);
  Var cls = tape.cross_entropy(fwd.logits, labels);
  out.reconstruction = tape.value(rec).item();
  out.classification = tape.value(cls).item();
  out.total_var = cls;
  out.total = out.classification;
  return out;
}

}  // namespace surprisenet
