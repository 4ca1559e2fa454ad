#include "disentangle/eval/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "disentangle/error.hpp"

namespace disentangle::eval {

std::vector<std::vector<std::size_t>> knn_indices(const Matrix& points, std::size_t k) {
  const std::size_t n = points.rows();
  if (k == 0 || k >= n) {
    throw ArgumentError("knn: need 0 < k < n, got k=" + std::to_string(k) + " n=" + std::to_string(n));
  }
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    auto qi = points.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      auto pj = points.row(j);
      double d2 = 0.0;
      for (std::size_t c = 0; c < qi.size(); ++c) {
        const double d = qi[c] - pj[c];
        d2 += d * d;
      }
      cand.emplace_back(d2, j);
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    out[i].reserve(k);
    for (std::size_t t = 0; t < k; ++t) out[i].push_back(cand[t].second);
  }
  return out;
}

KnnThetaResult knn_theta(const Matrix& z_a, const Matrix& z_b, const std::vector<std::string>& labels,
                         std::size_t k, double eps) {
  const std::size_t n = z_a.rows();
  if (z_b.rows() != n || labels.size() != n) {
    throw InvariantError("knn_theta: z_a, z_b and labels must have equal row counts");
  }
  if (!(eps > 0.0)) throw ArgumentError("knn_theta: eps must be positive");
  const auto na = knn_indices(z_a, k);
  const auto nb = knn_indices(z_b, k);

  KnnThetaResult res;
  res.per_sample.resize(n);
  std::map<std::string, std::pair<double, std::size_t>> by_label;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t same_a = 0, same_b = 0;
    for (std::size_t j : na[i]) same_a += labels[j] == labels[i];
    for (std::size_t j : nb[i]) same_b += labels[j] == labels[i];
    NeighborScore& s = res.per_sample[i];
    s.beta_a = static_cast<double>(same_a) / static_cast<double>(k);
    s.beta_b = static_cast<double>(same_b) / static_cast<double>(k);
    s.theta = std::log((s.beta_a + eps) / (s.beta_b + eps));
    auto& acc = by_label[labels[i]];
    acc.first += s.theta;
    acc.second += 1;
  }
  for (const auto& [label, acc] : by_label) {
    res.ranking.push_back({label, acc.first / static_cast<double>(acc.second), acc.second});
  }
  std::stable_sort(res.ranking.begin(), res.ranking.end(),
                   [](const LabelTheta& a, const LabelTheta& b) { return a.mean_theta > b.mean_theta; });
  return res;
}

}  // namespace disentangle::eval
