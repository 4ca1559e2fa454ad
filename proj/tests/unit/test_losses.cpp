#include <cmath>
#include <numbers>

#include "doctest.h"
#include "disentangle/adam.hpp"
#include "disentangle/error.hpp"
#include "disentangle/losses.hpp"
#include "gradient_suite.hpp"
#include "support.hpp"

using namespace disentangle;

namespace {

// Correlated Gaussian pairs: z_j = rho c_j + sqrt(1 - rho^2) e_j.
std::pair<Matrix, Matrix> gaussian_pairs(Prng& rng, std::size_t n, std::size_t d, double rho) {
  Matrix c = gauss_sample(rng, n, d);
  Matrix e = gauss_sample(rng, n, d);
  Matrix z = scale(c, rho);
  axpy(z, std::sqrt(1.0 - rho * rho), e);
  return {z, c};
}

VariationalPosterior fitted_posterior(const Matrix& z, const Matrix& c, std::size_t steps, double lr,
                                      std::uint64_t seed = 1) {
  Prng rng(seed);
  auto post = VariationalPosterior::create(rng, c.cols(), z.cols(), AdamConfig{lr}, 32, 3);
  for (std::size_t s = 0; s < steps; ++s) fit_posterior_step(post, z, c);
  return post;
}

double cosine(const Matrix& a, const Matrix& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a.values()[i] * b.values()[i];
    aa += a.values()[i] * a.values()[i];
    bb += b.values()[i] * b.values()[i];
  }
  return ab / std::sqrt(aa * bb);
}

}  // namespace

TEST_CASE("infonce closed form on orthogonal unit embeddings") {
  const Matrix e = identity(4);
  const auto r = infonce(e, e, 1.0);
  const double expected = -std::log(std::exp(1.0) / (std::exp(1.0) + 3.0));
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(infonce_logits(e, e, 0.5)(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("infonce bounds and errors") {
  Prng rng(1);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + rng.below(30);
    const double tau = 0.05 + rng.uniform();
    const auto r = infonce(gauss_sample(rng, n, 4), gauss_sample(rng, n, 4), tau);
    CHECK(r.value >= 0.0);
    CHECK(std::isfinite(r.value));
  }
  CHECK_THROWS_AS(infonce(Matrix{{1, 0}}, Matrix{{1, 0}}, 1.0), ArgumentError);
  CHECK_THROWS_AS(infonce(Matrix{{1, 0}, {0, 0}}, Matrix{{1, 0}, {0, 1}}, 1.0), DegenerateInputError);
  CHECK_THROWS_AS(infonce(identity(2), identity(2), 0.0), ArgumentError);
}

TEST_CASE("nce_club is exactly zero when the posterior ignores c") {
  Prng rng(2);
  auto post = VariationalPosterior::create(rng, 2, 3, {}, 8, 2);
  for (auto& w : post.mean_net.mutable_weights()) w = Matrix(w.rows(), w.cols());
  for (auto& w : post.logvar_net.mutable_weights()) w = Matrix(w.rows(), w.cols());
  post.mean_net.mutable_biases().back() = Matrix{{0.3, -0.2, 1.0}};
  const Matrix z = gauss_sample(rng, 50, 3), c = gauss_sample(rng, 50, 2);
  for (int t = 0; t < 5; ++t) CHECK(nce_club(z, c, post, rng).value == 0.0);
  CHECK_THROWS_AS(nce_club(Matrix(1, 3), Matrix(1, 2), post, rng), ArgumentError);
}

TEST_CASE("nce_club near zero for independent pairs") {
  Prng rng(3);
  const auto [z, _] = gaussian_pairs(rng, 1024, 2, 0.0);
  const Matrix c = gauss_sample(rng, 1024, 2);
  const auto post = fitted_posterior(z, c, 500, 1e-3);
  const Matrix z_new = gauss_sample(rng, 1024, 2), c_new = gauss_sample(rng, 1024, 2);
  CHECK(std::abs(nce_club(z_new, c_new, post, rng).value) < 0.05);
}

TEST_CASE("nce_club upper-bounds correlated Gaussian MI") {
  Prng rng(4);
  const auto [z, c] = gaussian_pairs(rng, 1024, 1, 0.9);
  const auto post = fitted_posterior(z, c, 500, 1e-3);
  const auto [z_new, c_new] = gaussian_pairs(rng, 1024, 1, 0.9);
  CHECK(nce_club(z_new, c_new, post, rng).value >= -0.5 * std::log(1.0 - 0.81) - 0.1);
}

TEST_CASE("posterior fit shrinks the variance when z equals c") {
  Prng rng(5);
  const Matrix c = gauss_sample(rng, 256, 2);
  auto post = fitted_posterior(c, c, 2000, 3e-3);
  const auto ll = log_density(post, c, c);
  CHECK(testsupport::mean(ll) / 2.0 >= 2.0);
  const double ceiling = 0.5 * (-kLogVarMin - std::log(2 * std::numbers::pi));
  for (double v : ll) CHECK(v <= 2.0 * ceiling + 1e-9);
}

TEST_CASE("posterior mean ignores independent c") {
  Prng rng(6);
  const Matrix z = gauss_sample(rng, 1024, 2);
  const Matrix c = gauss_sample(rng, 1024, 2);
  const auto post = fitted_posterior(z, c, 500, 1e-3);
  const Matrix mu = predict(post.mean_net, gauss_sample(rng, 1024, 2));
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(testsupport::column_var(mu, j) < 0.1 * testsupport::column_var(z, j));
  }
}

TEST_CASE("posterior fit is deterministic") {
  Prng rng(7);
  const auto [z, c] = gaussian_pairs(rng, 64, 2, 0.5);
  const auto a = fitted_posterior(z, c, 10, 1e-3);
  const auto b = fitted_posterior(z, c, 10, 1e-3);
  CHECK(a.mean_net.weights() == b.mean_net.weights());
  CHECK(log_density(a, z, c) == log_density(b, z, c));
}

TEST_CASE("log_density matches the diagonal Gaussian formula") {
  Prng rng(8);
  const auto post = VariationalPosterior::create(rng, 2, 3, {}, 8, 2);
  const Matrix z = gauss_sample(rng, 5, 3), c = gauss_sample(rng, 5, 2);
  const Matrix mu = predict(post.mean_net, c), s = predict(post.logvar_net, c);
  const auto ld = log_density(post, z, c);
  for (std::size_t i = 0; i < 5; ++i) {
    double expected = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
      const double sd = std::clamp(s(i, d), kLogVarMin, kLogVarMax);
      const double r = z(i, d) - mu(i, d);
      expected += -0.5 * (r * r * std::exp(-sd) + sd + std::log(2 * std::numbers::pi));
    }
    CHECK(ld[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("full covariance starts diagonal") {
  Prng a(9), b(9);
  const auto diag = VariationalPosterior::create(a, 2, 3, {}, 8, 2, Covariance::diagonal);
  const auto full = VariationalPosterior::create(b, 2, 3, {}, 8, 2, Covariance::full);
  CHECK(full.covariance() == Covariance::full);
  Prng rng(10);
  const Matrix z = gauss_sample(rng, 6, 3), c = gauss_sample(rng, 6, 2);
  const auto ld = log_density(diag, z, c), lf = log_density(full, z, c);
  for (std::size_t i = 0; i < 6; ++i) CHECK(lf[i] == doctest::Approx(ld[i]).epsilon(1e-12));
}

TEST_CASE("orthogonal loss special cases") {
  Prng rng(11);
  const Matrix c = gauss_sample(rng, 8, 3);
  CHECK(orthogonal_loss(c, c).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(orthogonal_loss(scale(c, -1.0), c).value == doctest::Approx(-1.0).epsilon(1e-12));
  const Matrix a{{1, 0}, {0, 2}}, b{{0, 3}, {-1, 0}};
  CHECK(std::abs(orthogonal_loss(a, b).value) <= 1e-12);
  CHECK_THROWS_AS(orthogonal_loss(Matrix{{0, 0}}, Matrix{{1, 0}}), DegenerateInputError);
}

TEST_CASE("reconstruction loss special cases") {
  Prng rng(12);
  const Matrix x = gauss_sample(rng, 10000, 6);
  const Matrix c(10000, 2);
  MlpNet zero({8, 6});
  CHECK(std::abs(reconstruction_loss(zero, x, c, x).value - 6.0) < 0.25);

  MlpNet exact({8, 6});
  Matrix w(8, 6);
  for (std::size_t j = 0; j < 6; ++j) w(j, j) = 1.0;
  exact.mutable_weights()[0] = w;
  CHECK(reconstruction_loss(exact, x, c, x).value == 0.0);
  CHECK_THROWS_AS(reconstruction_loss(exact, x, Matrix(5, 2), x), InvariantError);
}

TEST_CASE("trained linear decoder reaches the noise floor") {
  Prng rng(13);
  const double sigma = 0.5;
  const std::size_t d = 3, n = 2000;
  const Matrix z = gauss_sample(rng, n, d);
  Matrix x = z;
  axpy(x, sigma, gauss_sample(rng, n, d));
  const Matrix c(n, 1);
  MlpNet dec = init_net(rng, {d + 1, d});
  AdamState opt(dec, AdamConfig{1e-2});
  double loss = 0.0;
  for (int s = 0; s < 1500; ++s) {
    auto r = reconstruction_loss(dec, z, c, x);
    loss = r.value;
    adam_step(dec, r.decoder, opt);
  }
  CHECK(std::abs(loss - sigma * sigma * d) < 0.1 * sigma * sigma * d);
}

TEST_CASE("indiseek degenerate and dominant lambda") {
  Prng rng(14);
  const auto post = VariationalPosterior::create(rng, 2, 3, {}, 8, 2);
  MlpNet dec = init_net(rng, {5, 8, 4});
  const Matrix z = gauss_sample(rng, 16, 3), c = gauss_sample(rng, 16, 2), x = gauss_sample(rng, 16, 4);

  Prng a(1), b(1);
  const auto r0 = indiseek_loss(z, c, post, dec, x, 0.0, a);
  const auto club = nce_club(z, c, post, b, false);
  CHECK(r0.report.total == club.value);
  CHECK(r0.report.capture_term == 0.0);
  CHECK(r0.decoder.weights.empty());

  Prng e(2);
  const auto big = indiseek_loss(z, c, post, dec, x, 1e6, e);
  const auto rec = reconstruction_loss(dec, z, c, x);
  CHECK(cosine(big.grad_z, rec.grad_z) > 0.99);
  CHECK(big.report.total == doctest::Approx(big.report.entanglement_term + 5e5 * big.report.capture_term));
  Prng f(3);
  CHECK_THROWS_AS(indiseek_loss(z, c, post, dec, x, -1.0, f), ArgumentError);
}

TEST_CASE("factorizedcl and infodisen degenerate lambda") {
  Prng rng(15);
  const auto post = VariationalPosterior::create(rng, 2, 2, {}, 8, 2);
  MlpNet head = init_net(rng, {4, 8, 4});
  MlpNet emb = init_net(rng, {3, 8, 4});
  const Matrix z = gauss_sample(rng, 10, 2), c = gauss_sample(rng, 10, 2), x = gauss_sample(rng, 10, 3);
  Prng a(4), b(4);
  CHECK(factorizedcl_loss(z, c, post, head, emb, x, 0.0, 0.1, a).report.total ==
        nce_club(z, c, post, b, false).value);

  const Matrix zc{{1, 0}, {0, 1}}, cc{{0, 2}, {-3, 0}};
  const Matrix xx = gauss_sample(rng, 2, 3);
  CHECK(std::abs(infodisen_loss(zc, cc, head, emb, xx, 0.0, 0.1).report.total) <= 1e-12);
  CHECK(infodisen_loss(zc, zc, head, emb, xx, 0.0, 0.1).report.total == doctest::Approx(1.0));
  const auto full = infodisen_loss(z, c, head, emb, x, 2.0, 0.1);
  CHECK(full.report.total == doctest::Approx(full.report.entanglement_term + full.report.capture_term));
}

TEST_CASE("every loss passes finite-difference gradient checks") {
  for (const auto& c : testsupport::run_gradient_suite(100)) {
    INFO(c.name, " analytic ", c.report.worst_analytic, " numeric ", c.report.worst_numeric);
    CHECK(c.report.checked >= 100);
    CHECK(c.report.worst < 1e-4);
  }
}
