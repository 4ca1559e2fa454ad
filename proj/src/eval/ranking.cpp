#include "disentangle/eval/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "disentangle/error.hpp"

namespace disentangle::eval {

bool RankVector::has_ties() const {
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

RankVector rank_average(std::span<const double> scores) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  RankVector out;
  out.ranks.assign(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) out.ranks[order[k]] = avg;
    i = j;
  }
  return out;
}

namespace {

void check_pair(const RankVector& r, const RankVector& r_star) {
  if (r.size() != r_star.size()) {
    throw ArgumentError("spearman: rank vectors differ in length (" + std::to_string(r.size()) + " vs " +
                        std::to_string(r_star.size()) + ")");
  }
  if (r.size() < 2) throw ArgumentError("spearman: need at least 2 ranks");
}

}  // namespace

double spearman_pearson_form(const RankVector& r, const RankVector& r_star) {
  check_pair(r, r_star);
  const auto n = static_cast<double>(r.size());
  // Average ranks always have mean (L + 1) / 2.
  const double mean = 0.5 * (n + 1.0);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double a = r.ranks[i] - mean;
    const double b = r_star.ranks[i] - mean;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInputError("spearman: constant ranks have no correlation");
  return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

double spearman_closed_form(const RankVector& r, const RankVector& r_star) {
  check_pair(r, r_star);
  const auto n = static_cast<double>(r.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = r.ranks[i] - r_star.ranks[i];
    d2 += d * d;
  }
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

double spearman_rho(const RankVector& r, const RankVector& r_star) {
  check_pair(r, r_star);
  if (r.has_ties() || r_star.has_ties()) return spearman_pearson_form(r, r_star);
  return spearman_closed_form(r, r_star);
}

double spearman_rho(std::span<const double> scores_a, std::span<const double> scores_b) {
  return spearman_rho(rank_average(scores_a), rank_average(scores_b));
}

}  // namespace disentangle::eval
