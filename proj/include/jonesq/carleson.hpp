#pragma once

#include "jonesq/decomposition.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace jonesq {

struct CarlesonTerm {
  int cube = -1;          ///< index into the Gamma tree or the stopped tree
  double value = 0.0;     ///< alpha(B_Q) or beta_2(Q)
  double weight = 0.0;    ///< l(Q)^n or mu(Q)
  double contribution = 0.0;
};

struct CarlesonSum {
  double sum = 0.0;
  double normalizer = 0.0;  ///< l(R)^n or mu(3R)
  double ratio = 0.0;       ///< sum / normalizer (0 when the normalizer vanishes)
  std::vector<CarlesonTerm> terms;
};

/// sum over good Gamma-cubes Q of R, down to `depth` levels below R, of alpha(B_Q)^2 l(Q)^n.
CarlesonSum carleson_sum_alpha(const DiscreteMeasure& measure, const SpatialIndex& index,
                               const GammaTree& tree, int root, int depth, int n,
                               const AlphaConfig& config = {}, unsigned workers = 1);

/// sum over the good cubes of the stopped tree of beta_2(Q)^2 mu(Q), with beta_2(Q) integrated
/// over 3Q and normalised by l(Q)^n.
CarlesonSum carleson_sum_beta(const DiscreteMeasure& measure, const SpatialIndex& index,
                              const StoppedTree& tree, int n, unsigned workers = 1);

nlohmann::json to_json(const CarlesonSum& sum);

}  // namespace jonesq
