#include "disentangle/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "disentangle/error.hpp"

namespace disentangle {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

bool inside_clamp(double raw) { return raw > kLogVarMin && raw < kLogVarMax; }

std::size_t offdiag_count(std::size_t p) { return p * (p - 1) / 2; }

void check_shapes(const char* who, const VariationalPosterior& post, const Matrix& z, const Matrix& c) {
  if (z.rows() != c.rows()) {
    throw InvariantError(std::string(who) + ": row count mismatch " + z.shape_string() + " vs " +
                         c.shape_string());
  }
  if (c.cols() != post.c_dim() || z.cols() != post.z_dim()) {
    throw InvariantError(std::string(who) + ": posterior maps " + std::to_string(post.c_dim()) + " -> " +
                         std::to_string(post.z_dim()) + " but got c " + c.shape_string() + " and z " +
                         z.shape_string());
  }
}

// Outputs of the posterior nets for one batch of c rows.
struct Heads {
  Matrix mean;
  Matrix raw_logvar;
  Matrix offdiag;  // empty for a diagonal posterior
};

// Per-row log density and its gradients. Gradients are scaled by `weight`
// and accumulated into whichever outputs are non-null.
class RowKernel {
 public:
  explicit RowKernel(std::size_t p) : p_(p), l_(p * p), v_(p), w_(p) {}

  double operator()(std::span<const double> z, std::span<const double> mu, std::span<const double> raw,
                    const double* off, double weight, double* gz, double* gmu, double* gs, double* goff) {
    const std::size_t p = p_;
    double logdet_half = 0.0;
    if (!off) {
      double quad = 0.0;
      for (std::size_t d = 0; d < p; ++d) {
        const double s = std::clamp(raw[d], kLogVarMin, kLogVarMax);
        const double r = z[d] - mu[d];
        const double iv = std::exp(-s);
        quad += r * r * iv;
        logdet_half += 0.5 * s;
        if (gz) gz[d] -= weight * r * iv;
        if (gmu) gmu[d] += weight * r * iv;
        if (gs && inside_clamp(raw[d])) gs[d] += weight * 0.5 * (r * r * iv - 1.0);
      }
      return -0.5 * quad - logdet_half - 0.5 * static_cast<double>(p) * kLog2Pi;
    }
    // v = L^-1 r, w = L^-T v = Sigma^-1 r
    for (std::size_t i = 0; i < p; ++i) {
      const double s = std::clamp(raw[i], kLogVarMin, kLogVarMax);
      logdet_half += 0.5 * s;
      double acc = z[i] - mu[i];
      for (std::size_t j = 0; j < i; ++j) {
        l_[i * p + j] = off[i * (i - 1) / 2 + j];
        acc -= l_[i * p + j] * v_[j];
      }
      l_[i * p + i] = std::exp(0.5 * s);
      v_[i] = acc / l_[i * p + i];
    }
    for (std::size_t i = p; i-- > 0;) {
      double acc = v_[i];
      for (std::size_t k = i + 1; k < p; ++k) acc -= l_[k * p + i] * w_[k];
      w_[i] = acc / l_[i * p + i];
    }
    double quad = 0.0;
    for (std::size_t i = 0; i < p; ++i) quad += v_[i] * v_[i];
    for (std::size_t i = 0; i < p; ++i) {
      if (gz) gz[i] -= weight * w_[i];
      if (gmu) gmu[i] += weight * w_[i];
      if (gs && inside_clamp(raw[i])) gs[i] += weight * 0.5 * (w_[i] * v_[i] * l_[i * p + i] - 1.0);
      if (goff) {
        for (std::size_t j = 0; j < i; ++j) goff[i * (i - 1) / 2 + j] += weight * w_[i] * v_[j];
      }
    }
    return -0.5 * quad - logdet_half - 0.5 * static_cast<double>(p) * kLog2Pi;
  }

 private:
  std::size_t p_;
  std::vector<double> l_, v_, w_;
};

const double* off_row(const Heads& h, std::size_t r) {
  return h.offdiag.empty() ? nullptr : h.offdiag.row(r).data();
}

double* row_ptr(Matrix& m, std::size_t r) { return m.empty() ? nullptr : m.row(r).data(); }

}  // namespace

VariationalPosterior::VariationalPosterior(MlpNet mean, MlpNet logvar, AdamConfig adam,
                                           std::optional<MlpNet> offdiag)
    : mean_net(std::move(mean)), logvar_net(std::move(logvar)), offdiag_net(std::move(offdiag)) {
  if (mean_net.input_dim() != logvar_net.input_dim() || mean_net.output_dim() != logvar_net.output_dim()) {
    throw InvariantError("VariationalPosterior: mean and log-variance nets disagree on dims");
  }
  if (offdiag_net && (offdiag_net->input_dim() != mean_net.input_dim() ||
                      offdiag_net->output_dim() != offdiag_count(mean_net.output_dim()))) {
    throw InvariantError("VariationalPosterior: off-diagonal net must map c_dim -> p(p-1)/2");
  }
  mean_opt = AdamState(mean_net, adam);
  logvar_opt = AdamState(logvar_net, adam);
  if (offdiag_net) offdiag_opt.emplace(*offdiag_net, adam);
}

VariationalPosterior VariationalPosterior::create(Prng& rng, std::size_t c_dim, std::size_t z_dim,
                                                  AdamConfig adam, std::size_t width, std::size_t layers,
                                                  Covariance cov) {
  MlpNet mean = init_net(rng, mlp_dims(c_dim, width, layers, z_dim));
  MlpNet logvar = init_net(rng, mlp_dims(c_dim, width, layers, z_dim));
  std::optional<MlpNet> off;
  if (cov == Covariance::full && z_dim > 1) {
    off = init_net(rng, mlp_dims(c_dim, width, layers, offdiag_count(z_dim)));
    for (double& w : off->mutable_weights().back().values()) w = 0.0;
  }
  return VariationalPosterior(std::move(mean), std::move(logvar), adam, std::move(off));
}

std::vector<double> log_density(const VariationalPosterior& post, const Matrix& z, const Matrix& c) {
  check_shapes("log_density", post, z, c);
  const Heads h{predict(post.mean_net, c), predict(post.logvar_net, c),
                post.offdiag_net ? predict(*post.offdiag_net, c) : Matrix{}};
  RowKernel k(z.cols());
  std::vector<double> out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    out[i] = k(z.row(i), h.mean.row(i), h.raw_logvar.row(i), off_row(h, i), 0.0, nullptr, nullptr, nullptr,
               nullptr);
  }
  return out;
}

ClubResult nce_club(const Matrix& z, const Matrix& c, const VariationalPosterior& post, Prng& rng,
                    bool want_grad_c) {
  if (z.rows() < 2) throw ArgumentError("nce_club: need at least 2 rows for a derangement");
  const auto perm = derangement(rng, z.rows());
  return nce_club(z, c, post, perm, want_grad_c);
}

ClubResult nce_club(const Matrix& z, const Matrix& c, const VariationalPosterior& post,
                    std::span<const std::size_t> perm, bool want_grad_c) {
  check_shapes("nce_club", post, z, c);
  const std::size_t n = z.rows();
  const std::size_t p = z.cols();
  if (n < 2) throw ArgumentError("nce_club: need at least 2 rows for a derangement");
  if (perm.size() != n) throw InvariantError("nce_club: permutation length does not match batch");

  // q is evaluated once per c row; the negative pairs reuse those rows.
  std::optional<ForwardResult> fm, fv, fo;
  Heads h;
  if (want_grad_c) {
    fm = forward(post.mean_net, c);
    fv = forward(post.logvar_net, c);
    h.mean = fm->output;
    h.raw_logvar = fv->output;
    if (post.offdiag_net) {
      fo = forward(*post.offdiag_net, c);
      h.offdiag = fo->output;
    }
  } else {
    h.mean = predict(post.mean_net, c);
    h.raw_logvar = predict(post.logvar_net, c);
    if (post.offdiag_net) h.offdiag = predict(*post.offdiag_net, c);
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  ClubResult res;
  res.grad_z = Matrix(n, p);
  Matrix grad_mean, grad_logvar, grad_off;
  if (want_grad_c) {
    grad_mean = Matrix(n, p);
    grad_logvar = Matrix(n, p);
    if (post.offdiag_net) grad_off = Matrix(n, offdiag_count(p));
  }
  RowKernel k(p);
  double pos = 0.0;
  double neg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = perm[i];
    double* gz = res.grad_z.row(i).data();
    pos += k(z.row(i), h.mean.row(i), h.raw_logvar.row(i), off_row(h, i), inv_n, gz, row_ptr(grad_mean, i),
             row_ptr(grad_logvar, i), row_ptr(grad_off, i));
    neg += k(z.row(i), h.mean.row(j), h.raw_logvar.row(j), off_row(h, j), -inv_n, gz, row_ptr(grad_mean, j),
             row_ptr(grad_logvar, j), row_ptr(grad_off, j));
  }
  res.positive = pos * inv_n;
  res.negative = neg * inv_n;
  res.value = res.positive - res.negative;
  if (want_grad_c) {
    const auto gm = backward(post.mean_net, fm->tape, grad_mean);
    const auto gv = backward(post.logvar_net, fv->tape, grad_logvar);
    res.grad_c = elementwise(BinaryOp::add, gm.input, gv.input);
    if (fo) res.grad_c = elementwise(BinaryOp::add, res.grad_c, backward(*post.offdiag_net, fo->tape, grad_off).input);
  }
  return res;
}

double fit_posterior_step(VariationalPosterior& post, const Matrix& z, const Matrix& c) {
  check_shapes("fit_posterior_step", post, z, c);
  const std::size_t n = z.rows();
  const std::size_t p = z.cols();
  auto fm = forward(post.mean_net, c);
  auto fv = forward(post.logvar_net, c);
  std::optional<ForwardResult> fo;
  if (post.offdiag_net) fo = forward(*post.offdiag_net, c);
  const double inv_n = 1.0 / static_cast<double>(n);
  // Gradients of the negative mean log-likelihood.
  Matrix grad_mean(n, p);
  Matrix grad_logvar(n, p);
  Matrix grad_off = fo ? Matrix(n, offdiag_count(p)) : Matrix{};
  RowKernel k(p);
  double ll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ll += k(z.row(i), fm.output.row(i), fv.output.row(i), fo ? fo->output.row(i).data() : nullptr, -inv_n,
            nullptr, grad_mean.row(i).data(), grad_logvar.row(i).data(), row_ptr(grad_off, i));
  }
  const auto gm = backward(post.mean_net, fm.tape, grad_mean);
  const auto gv = backward(post.logvar_net, fv.tape, grad_logvar);
  adam_step(post.mean_net, gm, post.mean_opt);
  adam_step(post.logvar_net, gv, post.logvar_opt);
  if (fo) adam_step(*post.offdiag_net, backward(*post.offdiag_net, fo->tape, grad_off), *post.offdiag_opt);
  return ll * inv_n;
}

}  // namespace disentangle
