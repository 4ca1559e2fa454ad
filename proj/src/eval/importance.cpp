#include "disentangle/eval/importance.hpp"

#include "disentangle/error.hpp"

namespace disentangle::eval {

ImportanceProfile masking_importance(const RepresentationMap& psi, const Matrix& probes) {
  if (probes.rows() == 0) throw ArgumentError("masking_importance: need at least one probe");
  const std::size_t d = probes.cols();
  const std::size_t m = probes.rows();
  const Matrix base = psi(probes);
  if (base.rows() != m) throw InvariantError("masking_importance: map changed the batch size");

  ImportanceProfile prof;
  prof.probes = m;
  prof.raw_zeta.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    Matrix masked = probes;
    for (std::size_t i = 0; i < m; ++i) masked(i, j) = 0.0;
    const Matrix out = psi(masked);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      auto a = base.row(i);
      auto b = out.row(i);
      double sq = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        sq += diff * diff;
      }
      acc += sq;
    }
    prof.raw_zeta[j] = acc / static_cast<double>(m);
  }

  double total = 0.0;
  for (double v : prof.raw_zeta) total += v;
  if (!(total > 0.0)) throw DegenerateInputError("masking_importance: map ignores every input coordinate");
  prof.zeta_hat.resize(d);
  for (std::size_t j = 0; j < d; ++j) prof.zeta_hat[j] = prof.raw_zeta[j] / total;
  return prof;
}

ImportanceProfile masking_importance(const RepresentationMap& psi, std::size_t d, std::size_t m,
                                     Prng& rng) {
  if (m == 0) throw ArgumentError("masking_importance: M must be >= 1");
  if (d == 0) throw ArgumentError("masking_importance: d must be >= 1");
  return masking_importance(psi, uniform_sample(rng, m, d, kProbeLow, kProbeHigh));
}

}  // namespace disentangle::eval
