#include "jonesq/generators.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace jonesq {

namespace {

struct KindName {
  GeneratorKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {GeneratorKind::segment, "segment"},
    {GeneratorKind::circle, "circle"},
    {GeneratorKind::plane_patch, "plane_patch"},
    {GeneratorKind::lipschitz_graph, "lipschitz_graph"},
    {GeneratorKind::four_corner_cantor, "four_corner_cantor"},
    {GeneratorKind::graph_union, "graph_union"},
    {GeneratorKind::perturbed_graph, "perturbed_graph"},
};

// Parameter samples on a tensor grid over a box: cell midpoints, or one uniform point per cell.
struct ParameterSample {
  Matrix points;  // n x count
  double cell_volume = 0.0;
};

ParameterSample parameter_grid(const Box& box, std::size_t atoms, bool jitter, std::mt19937_64& rng) {
  const auto n = box.lower.size();
  auto per_axis = static_cast<Eigen::Index>(std::llround(std::pow(static_cast<double>(atoms), 1.0 / n)));
  per_axis = std::max<Eigen::Index>(per_axis, 1);
  Eigen::Index count = 1;
  for (Eigen::Index k = 0; k < n; ++k) count *= per_axis;
  ParameterSample out;
  out.points.resize(n, count);
  const Vector cell = (box.upper - box.lower) / static_cast<double>(per_axis);
  out.cell_volume = cell.prod();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index c = 0; c < count; ++c) {
    Eigen::Index rest = c;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double offset = jitter ? unit(rng) : 0.5;
      out.points(k, c) = box.lower[k] + (static_cast<double>(rest % per_axis) + offset) * cell[k];
      rest /= per_axis;
    }
  }
  return out;
}

double density_factor(const DensityProfile& profile, const Box& domain,
                      const Eigen::Ref<const Vector>& u) {
  if (profile.exponent == 0.0) return 1.0;
  const Vector focus = profile.focus.size() == u.size() ? profile.focus : domain.center();
  return std::pow((u - focus).norm(), profile.exponent);
}

// |grad A| by central differences; the graph Jacobian is sqrt(1 + |grad A|^2) because only one
// normal coordinate of A is non-zero.
double graph_jacobian(const LipschitzGraph& g, const Eigen::Ref<const Vector>& u) {
  const double h = 1e-7 * std::max(1.0, u.norm());
  double sq = 0.0;
  Vector a = u, b = u;
  for (int k = 0; k < g.n(); ++k) {
    a[k] += h;
    b[k] -= h;
    const double diff = (g.height(a)[0] - g.height(b)[0]) / (2.0 * h);
    sq += diff * diff;
    a[k] = b[k] = u[k];
  }
  return std::sqrt(1.0 + sq);
}

void normalise(Vector& w, double total) {
  const double s = w.sum();
  if (!(s > 0.0)) throw std::invalid_argument("generator produced zero total weight");
  w *= total / s;
}

Box cube_box(int n, double lo, double hi) {
  return Box{Vector::Constant(n, lo), Vector::Constant(n, hi)};
}

void check_dims(const GeneratorSpec& s) {
  if (s.n < 1 || s.d <= s.n) throw std::invalid_argument("generator needs 1 <= n < d");
  if (s.atoms < 1) throw std::invalid_argument("atom count must be positive");
  if (!(s.mass > 0.0)) throw std::invalid_argument("mass must be positive");
}

LipschitzGraph spec_graph(const GeneratorSpec& s) {
  return LipschitzGraph(s.n, s.d, s.shape, s.lipschitz, cube_box(s.n, -s.half_width, s.half_width),
                        s.frequency);
}

DiscreteMeasure sample_graph(const LipschitzGraph& g, const GeneratorSpec& s, std::size_t atoms,
                             std::mt19937_64& rng) {
  const auto par = parameter_grid(g.domain(), atoms, s.random_positions, rng);
  Matrix pts(s.d, par.points.cols());
  Vector w(par.points.cols());
  for (Eigen::Index c = 0; c < par.points.cols(); ++c) {
    pts.col(c) = g.lift(par.points.col(c));
    w[c] = par.cell_volume * graph_jacobian(g, par.points.col(c)) *
           density_factor(s.density, g.domain(), par.points.col(c));
  }
  return DiscreteMeasure(std::move(pts), std::move(w));
}

}  // namespace

const char* to_string(GeneratorKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.name;
  return "?";
}

GeneratorKind generator_kind_from_string(const std::string& name) {
  for (const auto& k : kKindNames)
    if (name == k.name) return k.kind;
  throw std::invalid_argument("unknown generator kind: " + name);
}

GeneratorSpec spec_from_json(const nlohmann::json& j) {
  GeneratorSpec s;
  s.kind = generator_kind_from_string(j.at("kind").get<std::string>());
  s.n = j.value("n", s.n);
  s.d = j.value("d", s.d);
  s.atoms = j.value("atoms", s.atoms);
  s.mass = j.value("mass", s.mass);
  s.length = j.value("length", s.length);
  s.radius = j.value("radius", s.radius);
  if (j.contains("shape")) s.shape = graph_shape_from_string(j.at("shape").get<std::string>());
  s.lipschitz = j.value("lipschitz", s.lipschitz);
  s.frequency = j.value("frequency", s.frequency);
  s.half_width = j.value("half_width", s.half_width);
  s.union_angle = j.value("union_angle", s.union_angle);
  s.noise = j.value("noise", s.noise);
  s.depth = j.value("depth", s.depth);
  s.random_positions = j.value("random_positions", s.random_positions);
  s.seed = j.value("seed", s.seed);
  if (j.contains("density")) {
    const auto& dj = j.at("density");
    s.density.exponent = dj.value("exponent", 0.0);
    if (dj.contains("focus")) {
      const auto f = dj.at("focus").get<std::vector<double>>();
      s.density.focus = Eigen::Map<const Vector>(f.data(), static_cast<Eigen::Index>(f.size()));
    }
  }
  return s;
}

nlohmann::json spec_to_json(const GeneratorSpec& s) {
  nlohmann::json density = {{"exponent", s.density.exponent}};
  if (s.density.focus.size() > 0)
    density["focus"] = std::vector<double>(s.density.focus.data(), s.density.focus.data() + s.density.focus.size());
  return {{"kind", to_string(s.kind)},
          {"n", s.n},
          {"d", s.d},
          {"atoms", s.atoms},
          {"mass", s.mass},
          {"length", s.length},
          {"radius", s.radius},
          {"shape", to_string(s.shape)},
          {"lipschitz", s.lipschitz},
          {"frequency", s.frequency},
          {"half_width", s.half_width},
          {"union_angle", s.union_angle},
          {"noise", s.noise},
          {"depth", s.depth},
          {"random_positions", s.random_positions},
          {"density", density},
          {"seed", s.seed}};
}

GeneratedMeasure generate(const GeneratorSpec& s) {
  check_dims(s);
  std::mt19937_64 rng(s.seed);
  GeneratedMeasure out;
  out.metadata = {{"spec", spec_to_json(s)}};

  switch (s.kind) {
    case GeneratorKind::segment:
    case GeneratorKind::plane_patch: {
      if (s.kind == GeneratorKind::segment && s.n != 1) throw std::invalid_argument("segment needs n = 1");
      const Box domain = cube_box(s.n, 0.0, s.length);
      const auto par = parameter_grid(domain, s.atoms, s.random_positions, rng);
      Matrix pts = Matrix::Zero(s.d, par.points.cols());
      pts.topRows(s.n) = par.points;
      Vector w(par.points.cols());
      for (Eigen::Index c = 0; c < w.size(); ++c) w[c] = density_factor(s.density, domain, par.points.col(c));
      normalise(w, s.mass);
      out.measure = DiscreteMeasure(std::move(pts), std::move(w));
      out.plane = AffinePlane::coordinate(Vector::Zero(s.d), s.n);
      out.graph = LipschitzGraph(s.n, s.d, GraphShape::flat, 0.0, domain);
      break;
    }
    case GeneratorKind::circle: {
      if (s.n != 1) throw std::invalid_argument("circle needs n = 1");
      const auto m = static_cast<Eigen::Index>(s.atoms);
      Matrix pts = Matrix::Zero(s.d, m);
      Vector w(m);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const Box domain = cube_box(1, 0.0, 2.0 * std::numbers::pi);
      for (Eigen::Index k = 0; k < m; ++k) {
        const double offset = s.random_positions ? unit(rng) : 0.0;
        const double t = 2.0 * std::numbers::pi * (static_cast<double>(k) + offset) / static_cast<double>(m);
        pts(0, k) = s.radius * std::cos(t);
        pts(1, k) = s.radius * std::sin(t);
        w[k] = density_factor(s.density, domain, Vector::Constant(1, t));
      }
      normalise(w, s.mass);
      out.measure = DiscreteMeasure(std::move(pts), std::move(w));
      break;
    }
    case GeneratorKind::lipschitz_graph:
    case GeneratorKind::perturbed_graph: {
      const LipschitzGraph g = spec_graph(s);
      DiscreteMeasure base = sample_graph(g, s, s.atoms, rng);
      Matrix pts = base.points();
      Vector w = base.weights();
      if (s.kind == GeneratorKind::perturbed_graph) {
        std::uniform_real_distribution<double> noise(-1.0, 1.0);
        for (Eigen::Index c = 0; c < pts.cols(); ++c)
          for (int k = s.n; k < s.d; ++k) pts(k, c) += s.noise * noise(rng);
      }
      normalise(w, s.mass);
      out.measure = DiscreteMeasure(std::move(pts), std::move(w));
      out.graph = g;
      out.metadata["graph"] = g.to_json();
      break;
    }
    case GeneratorKind::graph_union: {
      const LipschitzGraph g = spec_graph(s);
      const std::size_t half = std::max<std::size_t>(1, s.atoms / 2);
      DiscreteMeasure first = sample_graph(g, s, half, rng);
      Vector w1 = first.weights();
      normalise(w1, 0.5 * s.mass);
      Matrix rot = Matrix::Identity(s.d, s.d);
      const double c = std::cos(s.union_angle), sn = std::sin(s.union_angle);
      rot(0, 0) = c;
      rot(0, s.n) = -sn;
      rot(s.n, 0) = sn;
      rot(s.n, s.n) = c;
      const DiscreteMeasure a(first.points(), w1);
      out.measure = DiscreteMeasure::concat(a, a.transformed(rot, Vector::Zero(s.d)));
      out.graph = g;
      out.metadata["graph"] = g.to_json();
      out.metadata["second_copy_rotation"] = s.union_angle;
      break;
    }
    case GeneratorKind::four_corner_cantor: {
      if (s.n != 1 || s.d != 2) throw std::invalid_argument("four-corner Cantor needs n = 1, d = 2");
      if (s.depth < 0 || s.depth > 12) throw std::invalid_argument("Cantor depth must lie in [0, 12]");
      const Eigen::Index m = Eigen::Index{1} << (2 * s.depth);
      Matrix pts(2, m);
      const double atom = std::ldexp(s.mass, -2 * s.depth);
      for (Eigen::Index q = 0; q < m; ++q) {
        double x = 0.0, y = 0.0;
        for (int j = 1; j <= s.depth; ++j) {
          const auto corner = (q >> (2 * (s.depth - j))) & 3;
          const double step = 3.0 * std::ldexp(1.0, -2 * j);  // 3 * 4^-j
          if (corner & 1) x += step;
          if (corner & 2) y += step;
        }
        const double half_side = std::ldexp(1.0, -2 * s.depth - 1);
        pts(0, q) = x + half_side;
        pts(1, q) = y + half_side;
      }
      out.measure = DiscreteMeasure(std::move(pts), Vector::Constant(m, atom));
      break;
    }
  }
  out.metadata["atoms"] = out.measure.size();
  out.metadata["total_mass"] = out.measure.total_mass();
  return out;
}

}  // namespace jonesq
