#pragma once

#include <span>
#include <vector>

#include "disentangle/adam.hpp"
#include "disentangle/matrix.hpp"
#include "disentangle/mlp.hpp"
#include "disentangle/posterior.hpp"
#include "disentangle/prng.hpp"

namespace disentangle {

// ---------------------------------------------------------------------------
// InfoNCE
// ---------------------------------------------------------------------------

// Cosine-similarity logits: L(i, j) = <a_i/|a_i|, b_j/|b_j|> / tau.
// Throws DegenerateInputError on a zero-norm row.
Matrix infonce_logits(const Matrix& emb_a, const Matrix& emb_b, double tau);

struct InfoNceResult {
  double value = 0.0;
  Matrix grad_a;
  Matrix grad_b;
};

// Symmetric InfoNCE: average of the row-wise (a -> b) and column-wise (b -> a)
// cross-entropies of the N x N logits, each averaged over the N positives on
// the diagonal. log N - value is the usual mutual-information lower bound.
InfoNceResult infonce(const Matrix& emb_a, const Matrix& emb_b, double tau);

// ---------------------------------------------------------------------------
// Orthogonal and reconstruction terms
// ---------------------------------------------------------------------------

struct PairGradResult {
  double value = 0.0;
  Matrix grad_z;
  Matrix grad_c;
};

// mean_i <z_i/|z_i|, c_i/|c_i|>, in [-1, 1].
PairGradResult orthogonal_loss(const Matrix& z, const Matrix& c);

struct ReconstructionResult {
  double value = 0.0;
  Gradients decoder;  // decoder.input is dropped in favour of grad_z / grad_c
  Matrix grad_z;
  Matrix grad_c;
};

// mean_i |decoder([z_i, c_i]) - x_i|^2.
ReconstructionResult reconstruction_loss(const MlpNet& decoder, const Matrix& z, const Matrix& c,
                                         const Matrix& x);

// ---------------------------------------------------------------------------
// Combined objectives
// ---------------------------------------------------------------------------

// total = entanglement_term + (lambda / 2) * capture_term.
struct LossReport {
  double total = 0.0;
  double entanglement_term = 0.0;
  double capture_term = 0.0;
  double lambda = 0.0;
  double tau = 0.0;  // 0 when the objective has no temperature
};

LossReport make_report(double entanglement, double capture, double lambda, double tau = 0.0);

// Gradients below are of report.total. At lambda == 0 the capture term is not
// evaluated: capture_term is 0 and the capture-side network gradients are
// empty.
struct IndiSeekResult {
  LossReport report;
  Matrix grad_z;
  Gradients decoder;
};

IndiSeekResult indiseek_loss(const Matrix& z, const Matrix& c, const VariationalPosterior& post,
                             const MlpNet& decoder, const Matrix& x, double lambda, Prng& rng);

struct ContrastiveCaptureResult {
  LossReport report;
  Matrix grad_z;
  Gradients fusion_head;
  Gradients x_embedder;
  Gradients projection;  // InfoDisen with a z -> c projection only
};

// fusion_head consumes [c, z]; x_embedder consumes x; both map into the same
// embedding space.
ContrastiveCaptureResult factorizedcl_loss(const Matrix& z, const Matrix& c,
                                           const VariationalPosterior& post, const MlpNet& fusion_head,
                                           const MlpNet& x_embedder, const Matrix& x, double lambda,
                                           double tau, Prng& rng);

// projection may be null when z and c share a dimension; otherwise it is a
// learnable map applied to z for the orthogonal term only.
ContrastiveCaptureResult infodisen_loss(const Matrix& z, const Matrix& c, const MlpNet& fusion_head,
                                        const MlpNet& x_embedder, const Matrix& x, double lambda,
                                        double tau, const MlpNet* projection = nullptr);

}  // namespace disentangle
