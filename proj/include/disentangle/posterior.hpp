#pragma once

#include <optional>
#include <span>
#include <vector>

#include "disentangle/adam.hpp"
#include "disentangle/matrix.hpp"
#include "disentangle/mlp.hpp"
#include "disentangle/prng.hpp"

namespace disentangle {

inline constexpr double kLogVarMin = -8.0;
inline constexpr double kLogVarMax = 8.0;

enum class Covariance { diagonal, full };

// Gaussian q(z | c) = N(mean_net(c), L(c) L(c)^T) with L lower triangular,
// L_dd = exp(s_d / 2), s = clamp(logvar_net(c)), and the strictly lower
// entries (row-major) from offdiag_net(c). Without offdiag_net the covariance
// is diag(exp(s)). Owns its optimiser state; nothing outside
// fit_posterior_step updates it.
struct VariationalPosterior {
  MlpNet mean_net;
  MlpNet logvar_net;
  std::optional<MlpNet> offdiag_net;
  AdamState mean_opt;
  AdamState logvar_opt;
  std::optional<AdamState> offdiag_opt;

  VariationalPosterior() = default;
  VariationalPosterior(MlpNet mean, MlpNet logvar, AdamConfig adam = {},
                       std::optional<MlpNet> offdiag = std::nullopt);

  // Every net: layers weight matrices of the given width, fed by c. The
  // off-diagonal net starts with a zero output layer, so q starts diagonal.
  static VariationalPosterior create(Prng& rng, std::size_t c_dim, std::size_t z_dim,
                                     AdamConfig adam = {}, std::size_t width = 64,
                                     std::size_t layers = 3, Covariance cov = Covariance::diagonal);

  std::size_t c_dim() const { return mean_net.input_dim(); }
  std::size_t z_dim() const { return mean_net.output_dim(); }
  Covariance covariance() const { return offdiag_net ? Covariance::full : Covariance::diagonal; }
};

// Row-wise log q(z_i | c_i).
std::vector<double> log_density(const VariationalPosterior& post, const Matrix& z, const Matrix& c);

struct ClubResult {
  double value = 0.0;
  double positive = 0.0;  // mean log q(z_i | c_i)
  double negative = 0.0;  // mean log q(z_i | c_perm(i))
  Matrix grad_z;
  Matrix grad_c;  // empty unless requested
};

// mean_i log q(z_i | c_i) - mean_i log q(z_i | c_perm(i)) with perm a uniform
// derangement drawn from rng. The posterior is read, never updated.
ClubResult nce_club(const Matrix& z, const Matrix& c, const VariationalPosterior& post, Prng& rng,
                    bool want_grad_c = true);
// Same, with the negative pairing supplied by the caller.
ClubResult nce_club(const Matrix& z, const Matrix& c, const VariationalPosterior& post,
                    std::span<const std::size_t> perm, bool want_grad_c = true);

// One Adam ascent step on mean_i log q(z_i | c_i) over the posterior's own
// parameters. Returns the mean log-likelihood evaluated before the update.
double fit_posterior_step(VariationalPosterior& post, const Matrix& z, const Matrix& c);

}  // namespace disentangle
