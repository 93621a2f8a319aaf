#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/helpers.hpp"
#include "support/oracles.hpp"
#include "surprisenet/adam.hpp"
#include "surprisenet/data.hpp"
#include "surprisenet/model.hpp"
#include "surprisenet/ops.hpp"

using namespace surprisenet;

namespace {

ModelConfig small_cfg(Variant variant = Variant::AE) {
  ModelConfig cfg;
  cfg.input_dim = 6;
  cfg.hidden_dims = {10};
  cfg.latent_dim = 3;
  cfg.class_count = 4;
  cfg.variant = variant;
  return cfg;
}

Tensor normal_tensor(std::vector<int64_t> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

}  // namespace

TEST_CASE("config validation rejects degenerate dimensions") {
  ModelConfig cfg = small_cfg();
  cfg.input_dim = 0;
  CHECK_THROWS_AS(HybridModel(cfg, 1), TensorError);

  cfg = small_cfg();
  cfg.latent_dim = -1;
  CHECK_THROWS_AS(HybridModel(cfg, 1), TensorError);

  cfg = small_cfg();
  cfg.class_count = 0;
  CHECK_THROWS_AS(HybridModel(cfg, 1), TensorError);

  cfg = small_cfg();
  cfg.hidden_dims = {8, 0};
  CHECK_THROWS_AS(HybridModel(cfg, 1), TensorError);
}

TEST_CASE("variant names round-trip") {
  CHECK(variant_name(Variant::AE) == "ae");
  CHECK(variant_name(Variant::VAE) == "vae");
  CHECK(variant_from_name("ae") == Variant::AE);
  CHECK(variant_from_name("vae") == Variant::VAE);
  CHECK_THROWS_AS(variant_from_name("gan"), TensorError);
}

TEST_CASE("layer naming follows the encoder/latent/decoder/classifier order") {
  HybridModel ae(small_cfg(), 1);
  const auto& names = ae.layer_names();
  REQUIRE(names.size() == 5);
  CHECK(names[0] == "enc_0");
  CHECK(names[1] == "latent_mu");
  CHECK(names[2] == "dec_0");
  CHECK(names[3] == "dec_out");
  CHECK(names[4] == "classifier");

  HybridModel vae(small_cfg(Variant::VAE), 1);
  const auto& vnames = vae.layer_names();
  REQUIRE(vnames.size() == 6);
  CHECK(vnames[2] == "latent_log_var");
  CHECK(vae.layers().size() == vnames.size());
}

TEST_CASE("parameter count matches the architecture arithmetic") {
  HybridModel model(small_cfg(), 1);
  // enc 6->10, mu 10->3, dec 3->10, out 10->6, cls 3->4; weights + biases
  const int64_t want = (6 * 10 + 10) + (10 * 3 + 3) + (3 * 10 + 10) + (10 * 6 + 6) + (3 * 4 + 4);
  CHECK(model.parameter_count() == want);
}

TEST_CASE("untrained model with all weights free emits pure bias propagation") {
  HybridModel model(small_cfg(), 1);  // weights zero, all free, biases zero
  auto layers = model.layers();
  const auto& names = model.layer_names();
  for (size_t i = 0; i < layers.size(); ++i) {
    if (names[i] == "dec_out") layers[i]->live_bias() = Tensor({6}, {1, 2, 3, 4, 5, 6});
    if (names[i] == "classifier") layers[i]->live_bias() = Tensor({4}, {9, 8, 7, 6});
  }

  Rng rng(201);
  Tensor x = testutil::random_tensor({3, 6}, rng);
  ForwardResult out = model.forward(x, 0, Phase::Evaluate);
  for (int64_t r = 0; r < 3; ++r) {
    for (int64_t c = 0; c < 6; ++c) CHECK(out.reconstruction(r, c) == static_cast<float>(c + 1));
    CHECK(out.logits(r, 0) == 9.f);
    CHECK(out.logits(r, 3) == 6.f);
  }
}

TEST_CASE("forward rejects inputs of the wrong width") {
  HybridModel model(small_cfg(), 1);
  Tensor bad({2, 5});
  CHECK_THROWS_AS(model.forward(bad, 0), TensorError);
}

TEST_CASE("vae evaluation is deterministic: two calls, identical results") {
  HybridModel model(small_cfg(Variant::VAE), 1);
  Rng init = Rng::derive(202, "init/task0");
  model.init_free_parameters(init);

  Rng rng(203);
  Tensor x = testutil::random_tensor({4, 6}, rng);
  ForwardResult a = model.forward(x, 0, Phase::Full);  // non-tape forward: z = mu, no sampling
  ForwardResult b = model.forward(x, 0, Phase::Full);
  CHECK(testutil::bit_equal(a.reconstruction, b.reconstruction));
  CHECK(testutil::bit_equal(a.logits, b.logits));
  CHECK(testutil::bit_equal(a.latent, a.mu));
}

TEST_CASE("vae training forward requires injected noise") {
  HybridModel model(small_cfg(Variant::VAE), 1);
  Rng init = Rng::derive(204, "init/task0");
  model.init_free_parameters(init);
  Rng rng(205);
  Tensor x = testutil::random_tensor({2, 6}, rng);
  GradientTape tape;
  CHECK_THROWS_AS(model.forward_train(tape, x, 0, Phase::Train, nullptr), TensorError);

  Tensor wrong_shape({2, 2});
  GradientTape tape2;
  CHECK_THROWS_AS(model.forward_train(tape2, x, 0, Phase::Train, &wrong_shape), TensorError);
}

TEST_CASE("per-instance reconstruction losses average to the batch loss") {
  HybridModel model(small_cfg(), 1);
  Rng init = Rng::derive(206, "init/task0");
  model.init_free_parameters(init);

  Rng rng(207);
  Tensor x = testutil::random_tensor({5, 6}, rng);
  ForwardResult out = model.forward(x, 0, Phase::Full);
  REQUIRE(out.per_instance_rec_loss.size() == 5);
  double mean = 0.0;
  for (float v : out.per_instance_rec_loss) mean += v;
  mean /= 5.0;
  CHECK(ops::mse(x, out.reconstruction) == doctest::Approx(mean).epsilon(1e-6));
}

TEST_CASE("training loss equals independently recomputed components") {
  HybridModel model(small_cfg(), 1);
  Rng init = Rng::derive(208, "init/task0");
  model.init_free_parameters(init);
  model.registry().trained_since_freeze = true;

  Rng rng(209);
  Tensor x = testutil::random_tensor({4, 6}, rng);
  std::vector<int> labels = {0, 1, 2, 3};

  GradientTape tape;
  TrainForward fwd = model.forward_train(tape, x, 0, Phase::Train, nullptr);
  LossBreakdown loss = model.training_loss(tape, fwd, labels);

  const Tensor& recon = tape.value(fwd.reconstruction);
  const Tensor& logits = tape.value(fwd.logits);
  const float want_rec = ops::mse(x, recon);
  const float want_cls = ops::cross_entropy(logits, labels);
  CHECK(loss.reconstruction == doctest::Approx(want_rec).epsilon(1e-6));
  CHECK(loss.classification == doctest::Approx(want_cls).epsilon(1e-6));
  CHECK(loss.total == doctest::Approx(want_rec + want_cls).epsilon(1e-6));
  CHECK(loss.kl == 0.f);
}

TEST_CASE("training loss rejects labels outside the head") {
  HybridModel model(small_cfg(), 1);
  Rng init = Rng::derive(210, "init/task0");
  model.init_free_parameters(init);
  Rng rng(211);
  Tensor x = testutil::random_tensor({2, 6}, rng);
  GradientTape tape;
  TrainForward fwd = model.forward_train(tape, x, 0, Phase::Train, nullptr);
  std::vector<int> bad = {0, 4};  // class_count is 4
  CHECK_THROWS_AS(model.training_loss(tape, fwd, bad), TensorError);
}

TEST_CASE("a zero-weight vae degenerates to the matching ae loss") {
  // Same architecture, kl_weight 0, zero noise: the sampled z collapses to mu
  // and the KL contributes nothing, so the loss must match an AE carrying
  // identical weights.
  ModelConfig vae_cfg = small_cfg(Variant::VAE);
  vae_cfg.kl_weight = 0.f;
  HybridModel vae(vae_cfg, 1);
  Rng init = Rng::derive(212, "init/task0");
  vae.init_free_parameters(init);

  HybridModel ae(small_cfg(Variant::AE), 1);
  // copy shared-layer weights by name
  auto vae_layers = vae.layers();
  auto ae_layers = ae.layers();
  const auto& vnames = vae.layer_names();
  const auto& anames = ae.layer_names();
  for (size_t ai = 0; ai < ae_layers.size(); ++ai) {
    const auto it = std::find(vnames.begin(), vnames.end(), anames[ai]);
    REQUIRE(it != vnames.end());
    const size_t vi = static_cast<size_t>(it - vnames.begin());
    ae_layers[ai]->weights() = vae_layers[vi]->weights();
    ae_layers[ai]->live_bias() = vae_layers[vi]->live_bias();
    ae_layers[ai]->assignment() = vae_layers[vi]->assignment();
  }

  Rng rng(213);
  Tensor x = testutil::random_tensor({3, 6}, rng);
  std::vector<int> labels = {1, 0, 2};
  Tensor zero_noise({3, 3});

  GradientTape vt;
  TrainForward vf = vae.forward_train(vt, x, 0, Phase::Train, &zero_noise);
  LossBreakdown vl = vae.training_loss(vt, vf, labels);

  GradientTape at;
  TrainForward af = ae.forward_train(at, x, 0, Phase::Train, nullptr);
  LossBreakdown al = ae.training_loss(at, af, labels);

  CHECK(vl.total == doctest::Approx(al.total).epsilon(1e-6));
  CHECK(vl.reconstruction == doctest::Approx(al.reconstruction).epsilon(1e-6));
  CHECK(vl.classification == doctest::Approx(al.classification).epsilon(1e-6));
}

TEST_CASE("reconstruction loss reaches only the autoencoder, classification only the classifier") {
  HybridModel model(small_cfg(), 1);
  Rng init = Rng::derive(214, "init/task0");
  model.init_free_parameters(init);

  Rng rng(215);
  Tensor x = testutil::random_tensor({3, 6}, rng);
  std::vector<int> labels = {0, 1, 2};
  const auto& names = model.layer_names();

  auto zero_grad = [](const Tensor& g) {
    for (int64_t i = 0; i < g.size(); ++i) {
      if (g[i] != 0.f) return false;
    }
    return true;
  };

  {
    GradientTape tape;
    TrainForward fwd = model.forward_train(tape, x, 0, Phase::Train, nullptr);
    tape.backward(tape.mse(fwd.reconstruction, fwd.input));
    for (size_t i = 0; i < fwd.params.size(); ++i) {
      const bool is_classifier = names[i] == "classifier";
      const Tensor gw = tape.grad(fwd.params[i].w);
      if (is_classifier) {
        CHECK(zero_grad(gw));
        CHECK(zero_grad(tape.grad(fwd.params[i].b)));
      }
    }
  }
  {
    GradientTape tape;
    TrainForward fwd = model.forward_train(tape, x, 0, Phase::Train, nullptr);
    tape.backward(tape.cross_entropy(fwd.logits, labels));
    bool classifier_touched = false;
    for (size_t i = 0; i < fwd.params.size(); ++i) {
      const Tensor gw = tape.grad(fwd.params[i].w);
      if (names[i] == "dec_out" || names[i].rfind("dec_", 0) == 0) {
        CHECK(zero_grad(gw));
      }
      if (names[i] == "classifier") classifier_touched = !zero_grad(gw);
    }
    CHECK(classifier_touched);
  }
}

TEST_CASE("two hundred optimization steps halve the loss on a fixed batch") {
  Dataset data = synth_clusters(4, 6, 40, 4.0, 216);
  ModelConfig cfg = small_cfg();
  HybridModel model(cfg, 1);
  Rng init = Rng::derive(217, "init/task0");
  model.init_free_parameters(init);
  model.registry().trained_since_freeze = true;

  // fixed 32-instance batch, strided so every class appears (the partition
  // groups rows by class)
  const int64_t stride = data.train.size() / 32;
  REQUIRE(stride >= 1);
  Tensor x({32, 6});
  std::vector<int> labels(32);
  for (int64_t i = 0; i < 32; ++i) {
    const int64_t row = i * stride;
    for (int64_t j = 0; j < 6; ++j) x(i, j) = data.train.features(row, j);
    labels[static_cast<size_t>(i)] = data.train.labels[static_cast<size_t>(row)];
  }

  AdamConfig opt;
  opt.learning_rate = 1e-2f;
  auto layers = model.layers();
  std::vector<AdamState> w_states(layers.size()), b_states(layers.size());

  float first = -1.f, last = -1.f;
  for (int step = 0; step < 200; ++step) {
    GradientTape tape;
    TrainForward fwd = model.forward_train(tape, x, 0, Phase::Train, nullptr);
    LossBreakdown loss = model.training_loss(tape, fwd, labels);
    if (step == 0) first = loss.total;
    last = loss.total;
    tape.backward(loss.total_var);
    for (size_t li = 0; li < layers.size(); ++li) {
      Tensor gw = tape.grad(fwd.params[li].w);
      layers[li]->gate_gradients(gw, 0);
      adam_step(layers[li]->weights(), gw, w_states[li], opt);
      Tensor gb = tape.grad(fwd.params[li].b);
      adam_step(layers[li]->live_bias(), gb, b_states[li], opt);
    }
  }
  INFO("loss went " << first << " -> " << last);
  CHECK(last <= 0.5f * first);
}

TEST_CASE("an autoencoder overfits a single constant instance to near-zero error") {
  ModelConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden_dims = {8};
  cfg.latent_dim = 2;
  cfg.class_count = 2;
  HybridModel model(cfg, 1);
  Rng init = Rng::derive(218, "init/task0");
  model.init_free_parameters(init);
  model.registry().trained_since_freeze = true;

  Tensor x({1, 4}, {0.5f, -0.25f, 0.75f, 0.1f});
  std::vector<int> labels = {1};

  AdamConfig opt;
  opt.learning_rate = 5e-3f;
  auto layers = model.layers();
  std::vector<AdamState> w_states(layers.size()), b_states(layers.size());
  for (int step = 0; step < 600; ++step) {
    GradientTape tape;
    TrainForward fwd = model.forward_train(tape, x, 0, Phase::Train, nullptr);
    LossBreakdown loss = model.training_loss(tape, fwd, labels);
    tape.backward(loss.total_var);
    for (size_t li = 0; li < layers.size(); ++li) {
      Tensor gw = tape.grad(fwd.params[li].w);
      layers[li]->gate_gradients(gw, 0);
      adam_step(layers[li]->weights(), gw, w_states[li], opt);
      Tensor gb = tape.grad(fwd.params[li].b);
      adam_step(layers[li]->live_bias(), gb, b_states[li], opt);
    }
  }

  ForwardResult out = model.forward(x, 0, Phase::Full);
  REQUIRE(out.per_instance_rec_loss.size() == 1);
  CHECK(out.per_instance_rec_loss[0] < 1e-3f);
}
