#include <cmath>
#include <numbers>

#include "doctest.h"
#include "disentangle/error.hpp"
#include "disentangle/pipeline.hpp"
#include "disentangle/synth.hpp"
#include "support.hpp"

using namespace disentangle;

namespace {

// Expected symmetric InfoNCE of a batch whose embeddings are i.i.d. uniform
// angles on the unit circle, identical in both views: the best a perfectly
// aligned 2-D encoder can do without controlling the batch spread.
double circle_floor(std::size_t n, double tau, std::size_t trials) {
  Prng rng(99);
  double total = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Matrix e(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
      e(i, 0) = std::cos(a);
      e(i, 1) = std::sin(a);
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -1e300;
      std::vector<double> l(n);
      for (std::size_t j = 0; j < n; ++j) {
        l[j] = (e(i, 0) * e(j, 0) + e(i, 1) * e(j, 1)) / tau;
        mx = std::max(mx, l[j]);
      }
      double s = 0.0;
      for (double v : l) s += std::exp(v - mx);
      loss += mx + std::log(s) - l[i];
    }
    total += loss / static_cast<double>(n);
  }
  return total / static_cast<double>(trials);
}

ExperimentConfig small_config(Method m, std::size_t epochs) {
  ExperimentConfig cfg;
  cfg.method = m;
  cfg.epochs = epochs;
  cfg.lr = 1e-3;
  cfg.arch.width = 32;
  cfg.arch.layers = 3;
  cfg.arch.z_dim = 4;
  cfg.arch.posterior_width = 16;
  cfg.arch.posterior_layers = 2;
  return cfg;
}

}  // namespace

TEST_CASE("shared encoders align identical modalities") {
  auto cfg = small_config(Method::clip_only, 200);
  Prng rng(1);
  const Matrix x = gauss_sample(rng, 512, 4);
  const auto m = train_shared(cfg, x, x, rng);
  REQUIRE(m.loss_trace.size() == 200);
  const double floor = circle_floor(cfg.batch_size, cfg.tau, 50);
  CHECK(m.loss_trace.back() <= 0.5 * m.loss_trace.front());
  CHECK(m.loss_trace.back() <= floor + 0.3);
}

TEST_CASE("shared encoders on independent modalities stay at the no-signal floor") {
  auto cfg = small_config(Method::clip_only, 30);
  Prng rng(2);
  const Matrix a = gauss_sample(rng, 1024, 4), b = gauss_sample(rng, 1024, 4);
  const auto m = train_shared(cfg, a, b, rng);
  CHECK(std::abs(m.loss_trace.back() - std::log(128.0)) < 0.1);
}

TEST_CASE("shared training is reproducible and checks sample count") {
  auto cfg = small_config(Method::clip_only, 3);
  Prng data(3);
  const Matrix a = gauss_sample(data, 256, 3), b = gauss_sample(data, 256, 3);
  Prng r1(9), r2(9);
  CHECK(train_shared(cfg, a, b, r1).loss_trace == train_shared(cfg, a, b, r2).loss_trace);
  Prng r3(9);
  CHECK_THROWS_AS(train_shared(cfg, Matrix(100, 3), Matrix(100, 3), r3), ArgumentError);
}

TEST_CASE("specific training engages the method's networks") {
  const auto batch = synth::generate({synth::Setting::s1, 256, 4});
  for (Method m : {Method::indiseek, Method::factorizedcl, Method::infodisen}) {
    auto cfg = small_config(m, 2);
    Prng rng(5);
    std::size_t calls = 0;
    const auto model = train_specific(cfg, 0.5, batch.x1, batch.c1, rng, [&](const EpochLog&, const MlpNet&) { ++calls; });
    CHECK(calls == 2);
    CHECK(model.history.size() == 2);
    CHECK(model.decoder.has_value() == (m == Method::indiseek));
    CHECK(model.posterior.has_value() == (m != Method::infodisen));
    CHECK(model.fusion_head.has_value() == (m != Method::indiseek));
    CHECK(model.projection.has_value() == (m == Method::infodisen));
    const auto& rep = model.history.back().report;
    CHECK(rep.total == doctest::Approx(rep.entanglement_term + 0.25 * rep.capture_term).epsilon(1e-12));
  }
}

TEST_CASE("specific training is reproducible") {
  const auto batch = synth::generate({synth::Setting::s2, 256, 6});
  auto cfg = small_config(Method::indiseek, 2);
  Prng a(7), b(7);
  const auto ma = train_specific(cfg, 0.1, batch.x1, batch.c1, a);
  const auto mb = train_specific(cfg, 0.1, batch.x1, batch.c1, b);
  CHECK(parameter_checksum(ma.h) == parameter_checksum(mb.h));
  CHECK(ma.history.back().report.total == mb.history.back().report.total);
}

TEST_CASE("lambda zero trains the entanglement term alone") {
  const auto batch = synth::generate({synth::Setting::s1, 1024, 8});
  auto cfg = small_config(Method::indiseek, 200);
  Prng rng(11);
  const auto model = train_specific(cfg, 0.0, batch.x1, batch.c1, rng);
  for (const auto& e : model.history) {
    CHECK(e.report.capture_term == 0.0);
    CHECK(e.report.total == e.report.entanglement_term);
  }
  const double early = model.history[20].report.entanglement_term;
  const double late = model.history.back().report.entanglement_term;
  CHECK(std::abs(late) < 0.25);
  CHECK(std::abs(late) < 0.2 * early);
}

TEST_CASE("non-finite data diverges with diagnostics") {
  auto batch = synth::generate({synth::Setting::s1, 256, 9});
  batch.x1(3, 2) = std::nan("");
  auto cfg = small_config(Method::indiseek, 2);
  Prng rng(1);
  try {
    train_specific(cfg, 0.1, batch.x1, batch.c1, rng);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() == 0);
  }
}
