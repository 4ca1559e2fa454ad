#include "disentangle/pipeline.hpp"

#include <cmath>

#include "disentangle/error.hpp"

namespace disentangle {

namespace {

std::size_t batches_per_epoch(std::size_t n, std::size_t batch) { return n / batch; }

std::span<const std::size_t> batch_slice(const std::vector<std::size_t>& perm, std::size_t b,
                                         std::size_t batch) {
  return {perm.data() + b * batch, batch};
}

}  // namespace

SharedModel train_shared(const ExperimentConfig& cfg, const Matrix& x1, const Matrix& x2, Prng& rng) {
  if (x1.rows() != x2.rows()) {
    throw ArgumentError("train_shared: modalities have different sample counts (" + std::to_string(x1.rows()) +
                        " vs " + std::to_string(x2.rows()) + ")");
  }
  if (x1.rows() < cfg.batch_size) {
    throw ArgumentError("train_shared: " + std::to_string(x1.rows()) + " samples but batch size " +
                        std::to_string(cfg.batch_size));
  }
  Prng init_rng = rng.stream(0);
  Prng shuffle_rng = rng.stream(1);
  const auto& a = cfg.arch;
  SharedModel m{init_net(init_rng, mlp_dims(x1.cols(), a.width, a.layers, a.shared_dim)),
                init_net(init_rng, mlp_dims(x2.cols(), a.width, a.layers, a.shared_dim)),
                {}};
  const AdamConfig adam{cfg.lr};
  AdamState opt1(m.f1, adam);
  AdamState opt2(m.f2, adam);
  const std::size_t nb = batches_per_epoch(x1.rows(), cfg.batch_size);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto perm = permutation(shuffle_rng, x1.rows());
    double acc = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const auto idx = batch_slice(perm, b, cfg.batch_size);
      auto e1 = forward(m.f1, gather_rows(x1, idx));
      auto e2 = forward(m.f2, gather_rows(x2, idx));
      const auto nce = infonce(e1.output, e2.output, cfg.tau);
      acc += nce.value;
      const auto g1 = backward(m.f1, e1.tape, nce.grad_a);
      const auto g2 = backward(m.f2, e2.tape, nce.grad_b);
      adam_step(m.f1, g1, opt1);
      adam_step(m.f2, g2, opt2);
    }
    const double mean = acc / static_cast<double>(nb);
    if (!std::isfinite(mean)) throw DivergenceError("train_shared: non-finite InfoNCE", epoch, 0.0, mean);
    m.loss_trace.push_back(mean);
  }
  return m;
}

SpecificModel train_specific(const ExperimentConfig& cfg, double lambda, const Matrix& x, const Matrix& c,
                             Prng& rng, const EpochCallback& on_epoch) {
  if (x.rows() != c.rows()) {
    throw ArgumentError("train_specific: x has " + std::to_string(x.rows()) + " rows but c has " +
                        std::to_string(c.rows()));
  }
  if (x.rows() < cfg.batch_size) {
    throw ArgumentError("train_specific: " + std::to_string(x.rows()) + " samples but batch size " +
                        std::to_string(cfg.batch_size));
  }
  if (cfg.method == Method::clip_only) throw ArgumentError("train_specific: CLIP-only runs have no stage 2");
  if (lambda < 0.0) throw ArgumentError("train_specific: lambda must be >= 0");

  Prng init_rng = rng.stream(0);
  Prng shuffle_rng = rng.stream(1);
  Prng club_rng = rng.stream(2);
  const auto& a = cfg.arch;
  const std::size_t d = x.cols();
  const std::size_t dc = c.cols();
  const std::size_t p = a.z_dim;
  const AdamConfig adam{cfg.lr};

  SpecificModel m;
  m.method = cfg.method;
  m.lambda = lambda;
  m.h = init_net(init_rng, mlp_dims(d, a.width, a.layers, p));
  AdamState h_opt(m.h, adam);

  std::optional<AdamState> dec_opt, fus_opt, emb_opt, proj_opt;
  const bool uses_club = cfg.method == Method::indiseek || cfg.method == Method::factorizedcl;
  if (uses_club) {
    m.posterior = VariationalPosterior::create(init_rng, dc, p, AdamConfig{cfg.posterior_lr > 0.0 ? cfg.posterior_lr : cfg.lr}, a.posterior_width,
                                               a.posterior_layers, a.posterior_covariance);
  }
  if (cfg.method == Method::indiseek) {
    m.decoder = init_net(init_rng, mlp_dims(p + dc, a.width, a.layers, d));
    dec_opt.emplace(*m.decoder, adam);
  } else {
    m.fusion_head = init_net(init_rng, mlp_dims(dc + p, a.width, a.layers, a.embed_dim));
    m.x_embedder = init_net(init_rng, mlp_dims(d, a.width, a.embedder_layers, a.embed_dim));
    fus_opt.emplace(*m.fusion_head, adam);
    emb_opt.emplace(*m.x_embedder, adam);
    if (cfg.method == Method::infodisen && p != dc) {
      m.projection = init_net(init_rng, {p, dc});
      proj_opt.emplace(*m.projection, adam);
    }
  }

  const std::size_t nb = batches_per_epoch(x.rows(), cfg.batch_size);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto perm = permutation(shuffle_rng, x.rows());
    LossReport acc{};
    for (std::size_t b = 0; b < nb; ++b) {
      const auto idx = batch_slice(perm, b, cfg.batch_size);
      const Matrix xb = gather_rows(x, idx);
      const Matrix cb = gather_rows(c, idx);
      auto fh = forward(m.h, xb);
      const Matrix& z = fh.output;

      LossReport rep;
      Matrix grad_z;
      switch (cfg.method) {
        case Method::indiseek: {
          auto r = indiseek_loss(z, cb, *m.posterior, *m.decoder, xb, lambda, club_rng);
          rep = r.report;
          grad_z = std::move(r.grad_z);
          if (!r.decoder.weights.empty()) adam_step(*m.decoder, r.decoder, *dec_opt);
          break;
        }
        case Method::factorizedcl: {
          auto r = factorizedcl_loss(z, cb, *m.posterior, *m.fusion_head, *m.x_embedder, xb, lambda, cfg.tau,
                                     club_rng);
          rep = r.report;
          grad_z = std::move(r.grad_z);
          if (!r.fusion_head.weights.empty()) {
            adam_step(*m.fusion_head, r.fusion_head, *fus_opt);
            adam_step(*m.x_embedder, r.x_embedder, *emb_opt);
          }
          break;
        }
        case Method::infodisen: {
          auto r = infodisen_loss(z, cb, *m.fusion_head, *m.x_embedder, xb, lambda, cfg.tau,
                                  m.projection ? &*m.projection : nullptr);
          rep = r.report;
          grad_z = std::move(r.grad_z);
          if (!r.fusion_head.weights.empty()) {
            adam_step(*m.fusion_head, r.fusion_head, *fus_opt);
            adam_step(*m.x_embedder, r.x_embedder, *emb_opt);
          }
          if (m.projection) adam_step(*m.projection, r.projection, *proj_opt);
          break;
        }
        case Method::clip_only:
          break;
      }
      if (!std::isfinite(rep.total)) {
        throw DivergenceError("train_specific: non-finite loss at epoch " + std::to_string(epoch) +
                                  " (entanglement " + std::to_string(rep.entanglement_term) + ", capture " +
                                  std::to_string(rep.capture_term) + ")",
                              epoch, rep.entanglement_term, rep.capture_term);
      }
      // The posterior is fitted after the estimate so that it is never scored
      // on the rows it was just fitted to.
      if (uses_club) {
        for (std::size_t k = 0; k < cfg.posterior_steps; ++k) fit_posterior_step(*m.posterior, z, cb);
      }
      const auto gh = backward(m.h, fh.tape, grad_z);
      adam_step(m.h, gh, h_opt);
      acc.total += rep.total;
      acc.entanglement_term += rep.entanglement_term;
      acc.capture_term += rep.capture_term;
    }
    const double inv = 1.0 / static_cast<double>(nb);
    EpochLog log{epoch, make_report(acc.entanglement_term * inv, acc.capture_term * inv, lambda,
                                    cfg.method == Method::indiseek ? 0.0 : cfg.tau)};
    m.history.push_back(log);
    if (on_epoch) on_epoch(log, m.h);
  }
  return m;
}

}  // namespace disentangle
