#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "disentangle/adam.hpp"
#include "disentangle/config.hpp"
#include "disentangle/losses.hpp"
#include "disentangle/mlp.hpp"
#include "disentangle/prng.hpp"

namespace disentangle {

// Stage 1: shared encoders f1, f2 trained with symmetric InfoNCE.
struct SharedModel {
  MlpNet f1;
  MlpNet f2;
  std::vector<double> loss_trace;  // mean InfoNCE per epoch
};

struct EpochLog {
  std::size_t epoch = 0;
  LossReport report;  // averaged over the epoch's minibatches
};

// Stage 2: one modality-specific encoder h and the auxiliaries its objective
// needs. Which optionals are engaged depends on the method.
struct SpecificModel {
  Method method = Method::indiseek;
  double lambda = 0.0;
  MlpNet h;
  std::optional<MlpNet> decoder;                // IndiSeek
  std::optional<VariationalPosterior> posterior;  // IndiSeek, FactorizedCL
  std::optional<MlpNet> fusion_head;            // FactorizedCL, InfoDisen
  std::optional<MlpNet> x_embedder;             // FactorizedCL, InfoDisen
  std::optional<MlpNet> projection;             // InfoDisen when z_dim != c dim
  std::vector<EpochLog> history;
};

// Invoked after every epoch with the log and the encoder as it stands.
using EpochCallback = std::function<void(const EpochLog&, const MlpNet& h)>;

// Every epoch is one pass over a fresh shuffle of the rows drawn from the
// rng; the trailing partial batch is dropped. Throws ArgumentError when
// there are fewer rows than batch_size.
SharedModel train_shared(const ExperimentConfig& cfg, const Matrix& x1, const Matrix& x2, Prng& rng);

// Trains h on x with the shared features c held fixed, using cfg.method at
// the given lambda. Per minibatch: the loss is evaluated with the posterior as
// it stands, then (CLUB methods) the posterior takes cfg.posterior_steps fit
// steps on the detached (z, c) pair, then h and every capture-side network
// take one Adam step. Throws DivergenceError on a non-finite loss.
SpecificModel train_specific(const ExperimentConfig& cfg, double lambda, const Matrix& x, const Matrix& c,
                             Prng& rng, const EpochCallback& on_epoch = {});

}  // namespace disentangle
