#pragma once

#include "jonesq/graph.hpp"
#include "jonesq/measure.hpp"
#include "jonesq/plane_fit.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace jonesq {

enum class GeneratorKind {
  segment,
  circle,
  plane_patch,
  lipschitz_graph,
  four_corner_cantor,
  graph_union,
  perturbed_graph
};

const char* to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(const std::string& name);

/// Density along the parameter domain: uniform, or |u - focus|^exponent (lower density 0 at
/// the focus for exponent > 0).
struct DensityProfile {
  double exponent = 0.0;
  Vector focus;  ///< parameter point; empty means the domain center
};

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::segment;
  int n = 1;
  int d = 2;
  std::size_t atoms = 1024;  ///< requested count; grids round to a tensor size
  double mass = 1.0;
  // segment / plane_patch: [0, length]^n x {0}; circle: radius.
  double length = 1.0;
  double radius = 1.0;
  // graphs over [-half_width, half_width]^n
  GraphShape shape = GraphShape::sine;
  double lipschitz = 0.5;
  double frequency = 3.0;
  double half_width = 1.0;
  double union_angle = 1.5707963267948966;  ///< graph_union: rotation of the second copy
  double noise = 0.0;                       ///< perturbed_graph: amplitude off the graph
  int depth = 6;                            ///< four_corner_cantor
  bool random_positions = false;            ///< jittered parameters instead of cell midpoints
  DensityProfile density;
  std::uint64_t seed = 1;
};

GeneratorSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const GeneratorSpec& spec);

struct GeneratedMeasure {
  DiscreteMeasure measure;
  std::optional<LipschitzGraph> graph;  ///< underlying graph where one exists
  std::optional<AffinePlane> plane;     ///< underlying plane for flat kinds
  nlohmann::json metadata;
};

/// Deterministic in the spec (seed included). Weights are normalised to `mass` exactly up
/// to rounding.
GeneratedMeasure generate(const GeneratorSpec& spec);

}  // namespace jonesq
