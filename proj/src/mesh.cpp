#include "pcadapt/mesh.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pcadapt/error.hpp"
#include "pcadapt/rng.hpp"

namespace pcadapt {

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double surface_area(const Mesh& mesh) {
  double total = 0.0;
  for (const auto& f : mesh.faces)
    total += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
  return total;
}

namespace {

// Strips comments and returns the whitespace-split tokens of every
// non-empty line.
std::vector<std::vector<std::string>> tokenized_lines(std::istream& in) {
  std::vector<std::vector<std::string>> lines;
  std::string raw;
  while (std::getline(in, raw)) {
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> toks;
    std::string t;
    while (ls >> t) toks.push_back(std::move(t));
    if (!toks.empty()) lines.push_back(std::move(toks));
  }
  return lines;
}

double parse_double(const std::string& tok) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    fail(Errc::count_mismatch, "expected a number, got '" + tok + "'");
  }
  if (pos != tok.size()) fail(Errc::count_mismatch, "expected a number, got '" + tok + "'");
  return v;
}

std::uint64_t parse_count(const std::string& tok) {
  for (char c : tok)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      fail(Errc::count_mismatch, "expected a count, got '" + tok + "'");
  return std::stoull(tok);
}

}  // namespace

Mesh parse_off(std::istream& in) {
  auto lines = tokenized_lines(in);
  if (lines.empty()) fail(Errc::malformed_header, "empty OFF stream");

  // Header. ModelNet ships some files as "OFF" and some with the counts
  // squashed onto the header token ("OFF123 456 0").
  std::vector<std::string> counts;
  std::size_t next_line = 1;
  {
    auto& first = lines[0];
    if (first[0] == "OFF") {
      if (first.size() > 1) {
        counts.assign(first.begin() + 1, first.end());
      } else {
        if (lines.size() < 2) fail(Errc::count_mismatch, "missing counts line");
        counts = lines[1];
        next_line = 2;
      }
    } else if (first[0].rfind("OFF", 0) == 0 && first[0].size() > 3) {
      counts.push_back(first[0].substr(3));
      counts.insert(counts.end(), first.begin() + 1, first.end());
    } else {
      fail(Errc::malformed_header, "first token is '" + first[0] + "', expected OFF");
    }
  }
  if (counts.size() < 2) fail(Errc::count_mismatch, "counts line needs vertex and face counts");
  const std::uint64_t n_vertices = parse_count(counts[0]);
  const std::uint64_t n_faces = parse_count(counts[1]);

  if (lines.size() - next_line < n_vertices + n_faces)
    fail(Errc::count_mismatch, "declared " + std::to_string(n_vertices) + " vertices and " +
                                   std::to_string(n_faces) + " faces, stream has fewer lines");
  if (lines.size() - next_line > n_vertices + n_faces)
    fail(Errc::count_mismatch, "stream has more lines than the declared counts");

  Mesh mesh;
  mesh.vertices.reserve(n_vertices);
  for (std::uint64_t i = 0; i < n_vertices; ++i) {
    const auto& toks = lines[next_line + i];
    if (toks.size() < 3) fail(Errc::count_mismatch, "vertex line with fewer than 3 coordinates");
    mesh.vertices.push_back({parse_double(toks[0]), parse_double(toks[1]), parse_double(toks[2])});
  }

  const std::size_t face_base = next_line + n_vertices;
  for (std::uint64_t i = 0; i < n_faces; ++i) {
    const auto& toks = lines[face_base + i];
    const std::uint64_t arity = parse_count(toks[0]);
    if (arity < 3) fail(Errc::count_mismatch, "face with fewer than 3 vertices");
    if (toks.size() < 1 + arity) fail(Errc::count_mismatch, "face line shorter than its arity");
    std::vector<std::uint32_t> idx(arity);
    for (std::uint64_t k = 0; k < arity; ++k) {
      const std::uint64_t v = parse_count(toks[1 + k]);
      if (v >= n_vertices)
        fail(Errc::bad_index, "face references vertex " + std::to_string(v) + " of " +
                                  std::to_string(n_vertices));
      idx[k] = static_cast<std::uint32_t>(v);
    }
    // Fan triangulation around the first vertex.
    for (std::uint64_t k = 1; k + 1 < arity; ++k)
      mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
  }
  return mesh;
}

Mesh parse_off_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path.string());
  Mesh m = parse_off(in);
  m.object_id = path.stem().string();
  return m;
}

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

void push_quad(Mesh& m, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
  m.faces.push_back({a, b, c});
  m.faces.push_back({a, c, d});
}

}  // namespace

Mesh make_box(double lx, double ly, double lz) {
  const double x = lx / 2, y = ly / 2, z = lz / 2;
  Mesh m;
  m.vertices = {{-x, -y, -z}, {x, -y, -z}, {x, y, -z}, {-x, y, -z},
                {-x, -y, z},  {x, -y, z},  {x, y, z},  {-x, y, z}};
  push_quad(m, 0, 3, 2, 1);  // bottom
  push_quad(m, 4, 5, 6, 7);  // top
  push_quad(m, 0, 1, 5, 4);
  push_quad(m, 1, 2, 6, 5);
  push_quad(m, 2, 3, 7, 6);
  push_quad(m, 3, 0, 4, 7);
  return m;
}

Mesh make_sphere(double rx, double ry, double rz, int slices, int stacks) {
  Mesh m;
  // Poles plus (stacks-1) rings of `slices` vertices.
  m.vertices.push_back({0, 0, rz});
  for (int s = 1; s < stacks; ++s) {
    const double phi = std::numbers::pi * s / stacks;
    for (int q = 0; q < slices; ++q) {
      const double theta = kTau * q / slices;
      m.vertices.push_back({rx * std::sin(phi) * std::cos(theta),
                            ry * std::sin(phi) * std::sin(theta), rz * std::cos(phi)});
    }
  }
  m.vertices.push_back({0, 0, -rz});
  const std::uint32_t south = static_cast<std::uint32_t>(m.vertices.size() - 1);
  auto ring = [&](int s, int q) -> std::uint32_t {
    return static_cast<std::uint32_t>(1 + (s - 1) * slices + (q % slices));
  };
  for (int q = 0; q < slices; ++q) m.faces.push_back({0, ring(1, q), ring(1, q + 1)});
  for (int s = 1; s + 1 < stacks; ++s)
    for (int q = 0; q < slices; ++q)
      push_quad(m, ring(s, q), ring(s + 1, q), ring(s + 1, q + 1), ring(s, q + 1));
  for (int q = 0; q < slices; ++q)
    m.faces.push_back({south, ring(stacks - 1, q + 1), ring(stacks - 1, q)});
  return m;
}

Mesh make_cylinder(double radius, double height, int segments) {
  Mesh m;
  const double z = height / 2;
  for (int q = 0; q < segments; ++q) {
    const double t = kTau * q / segments;
    m.vertices.push_back({radius * std::cos(t), radius * std::sin(t), -z});
    m.vertices.push_back({radius * std::cos(t), radius * std::sin(t), z});
  }
  m.vertices.push_back({0, 0, -z});
  m.vertices.push_back({0, 0, z});
  const std::uint32_t cb = static_cast<std::uint32_t>(2 * segments);
  const std::uint32_t ct = cb + 1;
  auto bot = [&](int q) { return static_cast<std::uint32_t>(2 * (q % segments)); };
  auto top = [&](int q) { return static_cast<std::uint32_t>(2 * (q % segments) + 1); };
  for (int q = 0; q < segments; ++q) {
    push_quad(m, bot(q), bot(q + 1), top(q + 1), top(q));
    m.faces.push_back({cb, bot(q + 1), bot(q)});
    m.faces.push_back({ct, top(q), top(q + 1)});
  }
  return m;
}

Mesh make_cone(double radius, double height, int segments) {
  Mesh m;
  const double z = height / 2;
  for (int q = 0; q < segments; ++q) {
    const double t = kTau * q / segments;
    m.vertices.push_back({radius * std::cos(t), radius * std::sin(t), -z});
  }
  m.vertices.push_back({0, 0, z});   // apex
  m.vertices.push_back({0, 0, -z});  // base center
  const std::uint32_t apex = static_cast<std::uint32_t>(segments);
  const std::uint32_t base = apex + 1;
  auto rim = [&](int q) { return static_cast<std::uint32_t>(q % segments); };
  for (int q = 0; q < segments; ++q) {
    m.faces.push_back({apex, rim(q), rim(q + 1)});
    m.faces.push_back({base, rim(q + 1), rim(q)});
  }
  return m;
}

Mesh make_torus(double major, double minor, int major_segments, int minor_segments) {
  Mesh m;
  for (int a = 0; a < major_segments; ++a) {
    const double u = kTau * a / major_segments;
    for (int b = 0; b < minor_segments; ++b) {
      const double v = kTau * b / minor_segments;
      const double r = major + minor * std::cos(v);
      m.vertices.push_back({r * std::cos(u), r * std::sin(u), minor * std::sin(v)});
    }
  }
  auto at = [&](int a, int b) {
    return static_cast<std::uint32_t>((a % major_segments) * minor_segments +
                                      (b % minor_segments));
  };
  for (int a = 0; a < major_segments; ++a)
    for (int b = 0; b < minor_segments; ++b)
      push_quad(m, at(a, b), at(a + 1, b), at(a + 1, b + 1), at(a, b + 1));
  return m;
}

Mesh make_plane(double lx, double ly) {
  const double x = lx / 2, y = ly / 2;
  Mesh m;
  m.vertices = {{-x, -y, 0}, {x, -y, 0}, {x, y, 0}, {-x, y, 0}};
  push_quad(m, 0, 1, 2, 3);
  return m;
}

const std::vector<std::string>& synthetic_shape_kinds() {
  static const std::vector<std::string> kinds = {"box", "cone", "cylinder",
                                                 "plane", "sphere", "torus"};
  return kinds;
}

Mesh make_shape(const std::string& kind, std::uint64_t seed) {
  Rng rng(seed);
  Mesh m;
  if (kind == "box") {
    m = make_box(rng.uniform(0.5, 1.6), rng.uniform(0.5, 1.6), rng.uniform(0.5, 1.6));
  } else if (kind == "cone") {
    m = make_cone(rng.uniform(0.4, 1.0), rng.uniform(0.8, 2.2));
  } else if (kind == "cylinder") {
    m = make_cylinder(rng.uniform(0.35, 0.9), rng.uniform(0.7, 2.4));
  } else if (kind == "plane") {
    m = make_plane(rng.uniform(0.6, 1.8), rng.uniform(0.6, 1.8));
  } else if (kind == "sphere") {
    const double r = rng.uniform(0.6, 1.1);
    m = make_sphere(r * rng.uniform(0.75, 1.25), r * rng.uniform(0.75, 1.25),
                    r * rng.uniform(0.75, 1.25));
  } else if (kind == "torus") {
    const double major = rng.uniform(0.7, 1.1);
    m = make_torus(major, major * rng.uniform(0.18, 0.42));
  } else {
    fail(Errc::invalid_argument, "unknown shape kind '" + kind + "'");
  }
  // Per-object spin so the class is not tied to one orientation.
  const double theta = rng.uniform(0.0, kTau);
  const double c = std::cos(theta), s = std::sin(theta);
  for (auto& v : m.vertices) v = {v.x * c - v.y * s, v.x * s + v.y * c, v.z};
  return m;
}

}  // namespace pcadapt
