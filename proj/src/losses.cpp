#include "disentangle/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "disentangle/error.hpp"

namespace disentangle {

namespace {

struct Normalized {
  Matrix unit;
  std::vector<double> norms;
};

Normalized normalize_rows(const Matrix& m, const char* who) {
  Normalized out{m, std::vector<double>(m.rows())};
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = out.unit.row(r);
    double ss = 0.0;
    for (double x : row) ss += x * x;
    const double norm = std::sqrt(ss);
    if (!(norm > 0.0)) {
      throw DegenerateInputError(std::string(who) + ": row " + std::to_string(r) + " has zero norm");
    }
    out.norms[r] = norm;
    for (double& x : row) x /= norm;
  }
  return out;
}

// Pulls a gradient on normalised rows back to the raw rows.
Matrix normalize_backward(const Normalized& n, const Matrix& grad_unit) {
  Matrix out(grad_unit.rows(), grad_unit.cols());
  for (std::size_t r = 0; r < grad_unit.rows(); ++r) {
    auto u = n.unit.row(r);
    auto g = grad_unit.row(r);
    double dot = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) dot += u[c] * g[c];
    auto dst = out.row(r);
    for (std::size_t c = 0; c < u.size(); ++c) dst[c] = (g[c] - u[c] * dot) / n.norms[r];
  }
  return out;
}

void require_rows(const char* who, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw InvariantError(std::string(who) + ": row count mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}





}  // namespace

// ---------------------------------------------------------------------------

Matrix infonce_logits(const Matrix& emb_a, const Matrix& emb_b, double tau) {
  if (!(tau > 0.0)) throw ArgumentError("infonce: tau must be positive");
  if (emb_a.cols() != emb_b.cols()) {
    throw InvariantError("infonce: embedding dims differ " + emb_a.shape_string() + " vs " +
                         emb_b.shape_string());
  }
  const auto a = normalize_rows(emb_a, "infonce");
  const auto b = normalize_rows(emb_b, "infonce");
  return scale(matmul_nt(a.unit, b.unit), 1.0 / tau);
}

InfoNceResult infonce(const Matrix& emb_a, const Matrix& emb_b, double tau) {
  require_rows("infonce", emb_a, emb_b);
  const std::size_t n = emb_a.rows();
  if (n < 2) throw ArgumentError("infonce: need at least 2 pairs, got " + std::to_string(n));
  if (!(tau > 0.0)) throw ArgumentError("infonce: tau must be positive");
  if (emb_a.cols() != emb_b.cols()) {
    throw InvariantError("infonce: embedding dims differ " + emb_a.shape_string() + " vs " +
                         emb_b.shape_string());
  }
  const auto a = normalize_rows(emb_a, "infonce");
  const auto b = normalize_rows(emb_b, "infonce");
  Matrix logits = scale(matmul_nt(a.unit, b.unit), 1.0 / tau);

  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix grad_logits(n, n);
  double row_loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto l = logits.row(i);
    const double mx = *std::max_element(l.begin(), l.end());
    double z = 0.0;
    for (double v : l) z += std::exp(v - mx);
    const double lse = mx + std::log(z);
    row_loss += lse - l[i];
    for (std::size_t j = 0; j < n; ++j) {
      grad_logits(i, j) += 0.5 * inv_n * (std::exp(l[j] - lse) - (i == j ? 1.0 : 0.0));
    }
  }
  double col_loss = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double mx = logits(0, j);
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits(i, j));
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += std::exp(logits(i, j) - mx);
    const double lse = mx + std::log(z);
    col_loss += lse - logits(j, j);
    for (std::size_t i = 0; i < n; ++i) {
      grad_logits(i, j) += 0.5 * inv_n * (std::exp(logits(i, j) - lse) - (i == j ? 1.0 : 0.0));
    }
  }

  InfoNceResult res;
  res.value = 0.5 * inv_n * (row_loss + col_loss);
  const Matrix grad_unit_a = scale(matmul(grad_logits, b.unit), 1.0 / tau);
  const Matrix grad_unit_b = scale(matmul_tn(grad_logits, a.unit), 1.0 / tau);
  res.grad_a = normalize_backward(a, grad_unit_a);
  res.grad_b = normalize_backward(b, grad_unit_b);
  return res;
}

// ---------------------------------------------------------------------------

// ---------------------------------------------------------------------------

PairGradResult orthogonal_loss(const Matrix& z, const Matrix& c) {
  require_rows("orthogonal_loss", z, c);
  if (z.cols() != c.cols()) {
    throw InvariantError("orthogonal_loss: z " + z.shape_string() + " and c " + c.shape_string() +
                         " must share a dimension");
  }
  if (z.rows() == 0) throw ArgumentError("orthogonal_loss: empty batch");
  const auto zn = normalize_rows(z, "orthogonal_loss");
  const auto cn = normalize_rows(c, "orthogonal_loss");
  const double inv_n = 1.0 / static_cast<double>(z.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto a = zn.unit.row(i);
    auto b = cn.unit.row(i);
    for (std::size_t d = 0; d < a.size(); ++d) total += a[d] * b[d];
  }
  PairGradResult res;
  res.value = total * inv_n;
  res.grad_z = normalize_backward(zn, scale(cn.unit, inv_n));
  res.grad_c = normalize_backward(cn, scale(zn.unit, inv_n));
  return res;
}

ReconstructionResult reconstruction_loss(const MlpNet& decoder, const Matrix& z, const Matrix& c,
                                         const Matrix& x) {
  require_rows("reconstruction_loss", z, c);
  require_rows("reconstruction_loss", z, x);
  if (decoder.input_dim() != z.cols() + c.cols() || decoder.output_dim() != x.cols()) {
    throw InvariantError("reconstruction_loss: decoder maps " + std::to_string(decoder.input_dim()) +
                         " -> " + std::to_string(decoder.output_dim()) + " but z " + z.shape_string() +
                         ", c " + c.shape_string() + ", x " + x.shape_string());
  }
  if (z.rows() == 0) throw ArgumentError("reconstruction_loss: empty batch");
  auto fw = forward(decoder, hconcat(z, c));
  Matrix resid = elementwise(BinaryOp::sub, fw.output, x);
  const double inv_n = 1.0 / static_cast<double>(z.rows());
  ReconstructionResult res;
  res.value = frobenius_sq(resid) * inv_n;
  res.decoder = backward(decoder, fw.tape, scale(resid, 2.0 * inv_n));
  res.grad_z = col_block(res.decoder.input, 0, z.cols());
  res.grad_c = col_block(res.decoder.input, z.cols(), c.cols());
  res.decoder.input = Matrix();
  return res;
}

// ---------------------------------------------------------------------------

LossReport make_report(double entanglement, double capture, double lambda, double tau) {
  return LossReport{entanglement + 0.5 * lambda * capture, entanglement, capture, lambda, tau};
}

namespace {

void scale_grads(Gradients& g, double s) {
  for (auto& w : g.weights) w = scale(w, s);
  for (auto& b : g.biases) b = scale(b, s);
  if (!g.input.empty()) g.input = scale(g.input, s);
}

struct CaptureTerm {
  double value = 0.0;
  Matrix grad_z;
  Gradients fusion_head;
  Gradients x_embedder;
};

// InfoNCE(fusion_head([c, z]), x_embedder(x)) scaled by weight; gradients of
// the scaled value.
CaptureTerm contrastive_capture(const Matrix& z, const Matrix& c, const MlpNet& fusion_head,
                                const MlpNet& x_embedder, const Matrix& x, double tau, double weight) {
  require_rows("contrastive capture", z, x);
  if (fusion_head.input_dim() != c.cols() + z.cols()) {
    throw InvariantError("fusion head expects " + std::to_string(fusion_head.input_dim()) +
                         " inputs, got c " + c.shape_string() + " and z " + z.shape_string());
  }
  auto fh = forward(fusion_head, hconcat(c, z));
  auto fx = forward(x_embedder, x);
  auto nce = infonce(fh.output, fx.output, tau);
  CaptureTerm out;
  out.value = nce.value;
  out.fusion_head = backward(fusion_head, fh.tape, scale(nce.grad_a, weight));
  out.x_embedder = backward(x_embedder, fx.tape, scale(nce.grad_b, weight));
  out.grad_z = col_block(out.fusion_head.input, c.cols(), z.cols());
  out.fusion_head.input = Matrix();
  out.x_embedder.input = Matrix();
  return out;
}

}  // namespace

IndiSeekResult indiseek_loss(const Matrix& z, const Matrix& c, const VariationalPosterior& post,
                             const MlpNet& decoder, const Matrix& x, double lambda, Prng& rng) {
  if (lambda < 0.0) throw ArgumentError("indiseek_loss: lambda must be >= 0");
  auto club = nce_club(z, c, post, rng, false);
  IndiSeekResult res;
  res.grad_z = std::move(club.grad_z);
  double capture = 0.0;
  if (lambda > 0.0) {
    auto rec = reconstruction_loss(decoder, z, c, x);
    capture = rec.value;
    axpy(res.grad_z, 0.5 * lambda, rec.grad_z);
    res.decoder = std::move(rec.decoder);
    scale_grads(res.decoder, 0.5 * lambda);
  }
  res.report = make_report(club.value, capture, lambda);
  return res;
}

ContrastiveCaptureResult factorizedcl_loss(const Matrix& z, const Matrix& c,
                                           const VariationalPosterior& post, const MlpNet& fusion_head,
                                           const MlpNet& x_embedder, const Matrix& x, double lambda,
                                           double tau, Prng& rng) {
  if (lambda < 0.0) throw ArgumentError("factorizedcl_loss: lambda must be >= 0");
  auto club = nce_club(z, c, post, rng, false);
  ContrastiveCaptureResult res;
  res.grad_z = std::move(club.grad_z);
  double capture = 0.0;
  if (lambda > 0.0) {
    auto cap = contrastive_capture(z, c, fusion_head, x_embedder, x, tau, 0.5 * lambda);
    capture = cap.value;
    axpy(res.grad_z, 1.0, cap.grad_z);
    res.fusion_head = std::move(cap.fusion_head);
    res.x_embedder = std::move(cap.x_embedder);
  }
  res.report = make_report(club.value, capture, lambda, tau);
  return res;
}

ContrastiveCaptureResult infodisen_loss(const Matrix& z, const Matrix& c, const MlpNet& fusion_head,
                                        const MlpNet& x_embedder, const Matrix& x, double lambda,
                                        double tau, const MlpNet* projection) {
  if (lambda < 0.0) throw ArgumentError("infodisen_loss: lambda must be >= 0");
  ContrastiveCaptureResult res;
  double ortho = 0.0;
  if (projection != nullptr) {
    auto fp = forward(*projection, z);
    auto o = orthogonal_loss(fp.output, c);
    ortho = o.value;
    res.projection = backward(*projection, fp.tape, o.grad_z);
    res.grad_z = std::move(res.projection.input);
    res.projection.input = Matrix();
  } else {
    auto o = orthogonal_loss(z, c);
    ortho = o.value;
    res.grad_z = std::move(o.grad_z);
  }
  double capture = 0.0;
  if (lambda > 0.0) {
    auto cap = contrastive_capture(z, c, fusion_head, x_embedder, x, tau, 0.5 * lambda);
    capture = cap.value;
    axpy(res.grad_z, 1.0, cap.grad_z);
    res.fusion_head = std::move(cap.fusion_head);
    res.x_embedder = std::move(cap.x_embedder);
  }
  res.report = make_report(ortho, capture, lambda, tau);
  return res;
}

}  // namespace disentangle
