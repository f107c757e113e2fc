#include "jonesq/carleson.hpp"

#include "jonesq/parallel.hpp"

#include <cmath>

namespace jonesq {

namespace {

void accumulate(CarlesonSum& s) {
  // Fixed cube order keeps the floating-point sum independent of the worker count.
  for (const auto& t : s.terms) s.sum += t.contribution;
  s.ratio = s.normalizer > 0.0 ? s.sum / s.normalizer : 0.0;
}

}  // namespace

CarlesonSum carleson_sum_alpha(const DiscreteMeasure& measure, const SpatialIndex& index,
                               const GammaTree& tree, int root, int depth, int n,
                               const AlphaConfig& config, unsigned workers) {
  CarlesonSum out;
  out.normalizer = std::pow(tree.cubes.at(static_cast<std::size_t>(root)).side, n);
  for (int c : tree.subtree(root, depth))
    if (tree.cubes[static_cast<std::size_t>(c)].good) out.terms.push_back({c, 0.0, 0.0, 0.0});
  parallel_for(out.terms.size(), workers, [&](std::size_t k) {
    CarlesonTerm& t = out.terms[k];
    const GammaCube& q = tree.cubes[static_cast<std::size_t>(t.cube)];
    t.value = alpha(measure, index, q.ball, n, config).value;
    t.weight = std::pow(q.side, n);
    t.contribution = t.value * t.value * t.weight;
  });
  accumulate(out);
  return out;
}

CarlesonSum carleson_sum_beta(const DiscreteMeasure& measure, const SpatialIndex& index,
                              const StoppedTree& tree, int n, unsigned workers) {
  CarlesonSum out;
  out.normalizer = mass(measure, index, tree.lattice.box(tree.root).scaled(3.0));
  for (int c : tree.good_cubes()) out.terms.push_back({c, 0.0, 0.0, 0.0});
  parallel_for(out.terms.size(), workers, [&](std::size_t k) {
    CarlesonTerm& t = out.terms[k];
    const StoppedCube& q = tree.cubes[static_cast<std::size_t>(t.cube)];
    t.weight = q.mass;
    if (q.mass > 0.0) {
      t.value = beta_cube(measure, index, tree.lattice.box(q.cube), n, 2.0, Normalization::cube_ln).value;
      t.contribution = t.value * t.value * t.weight;
    }
  });
  accumulate(out);
  return out;
}

nlohmann::json to_json(const CarlesonSum& s) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : s.terms)
    terms.push_back({{"cube", t.cube}, {"value", t.value}, {"weight", t.weight},
                     {"contribution", t.contribution}});
  return {{"sum", s.sum}, {"normalizer", s.normalizer}, {"ratio", s.ratio}, {"terms", std::move(terms)}};
}

}  // namespace jonesq
