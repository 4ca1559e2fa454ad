#pragma once

#include <span>
#include <vector>

namespace disentangle::eval {

// 1-based ranks; tied values share the average of the ranks they span, so
// the ranks always sum to L(L+1)/2.
struct RankVector {
  std::vector<double> ranks;

  std::size_t size() const noexcept { return ranks.size(); }
  bool has_ties() const;
};

RankVector rank_average(std::span<const double> scores);

// Pearson correlation of the two rank vectors. Valid with ties.
double spearman_pearson_form(const RankVector& r, const RankVector& r_star);
// 1 - 6 sum (R_i - R*_i)^2 / (L (L^2 - 1)). Exact only without ties.
double spearman_closed_form(const RankVector& r, const RankVector& r_star);

// Closed form when neither vector has ties, Pearson-on-ranks otherwise.
// Throws ArgumentError for mismatched lengths or L < 2 and
// DegenerateInputError when either rank vector is constant.
double spearman_rho(const RankVector& r, const RankVector& r_star);

double spearman_rho(std::span<const double> scores_a, std::span<const double> scores_b);

}  // namespace disentangle::eval
