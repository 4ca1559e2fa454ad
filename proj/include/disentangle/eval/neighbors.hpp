#pragma once

#include <string>
#include <vector>

#include "disentangle/matrix.hpp"

namespace disentangle::eval {

inline constexpr double kThetaEpsilon = 1e-3;

// Exact k nearest neighbours by Euclidean distance, the query row itself
// excluded. Equal distances are ordered by lower row index. Result row i
// lists neighbour indices nearest first.
std::vector<std::vector<std::size_t>> knn_indices(const Matrix& points, std::size_t k);

struct NeighborScore {
  double beta_a = 0.0;
  double beta_b = 0.0;
  double theta = 0.0;  // log((beta_a + eps) / (beta_b + eps))
};

struct LabelTheta {
  std::string label;
  double mean_theta = 0.0;
  std::size_t count = 0;
};

struct KnnThetaResult {
  std::vector<NeighborScore> per_sample;
  // Labels by decreasing mean theta; equal means ordered by label.
  std::vector<LabelTheta> ranking;
};

// beta_a / beta_b are the fractions of each sample's k neighbours (in z_a
// and z_b respectively) that share its label. Throws ArgumentError if
// k >= n or k == 0.
KnnThetaResult knn_theta(const Matrix& z_a, const Matrix& z_b, const std::vector<std::string>& labels,
                         std::size_t k = 10, double eps = kThetaEpsilon);

}  // namespace disentangle::eval
