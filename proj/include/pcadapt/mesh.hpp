#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace pcadapt {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const;
};

// Triangle mesh. Faces with more than three vertices are fan-triangulated
// at ingestion, so every stored face is a triangle.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
  int class_label = -1;
  std::string object_id;
};

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double surface_area(const Mesh& mesh);

// OFF parser. Accepts the plain "OFF" header (also the common squashed
// variant where the counts share the header line). Vertex/face lines may
// carry trailing values (e.g. colors); they are ignored.
Mesh parse_off(std::istream& in);
Mesh parse_off_file(const std::filesystem::path& path);

// Parametric generators for dataset-free experiments. All shapes are
// centered at the origin and upright along z.
Mesh make_box(double lx, double ly, double lz);
Mesh make_sphere(double rx, double ry, double rz, int slices = 16, int stacks = 12);
Mesh make_cylinder(double radius, double height, int segments = 24);
Mesh make_cone(double radius, double height, int segments = 24);
Mesh make_torus(double major, double minor, int major_segments = 18, int minor_segments = 10);
Mesh make_plane(double lx, double ly);

// Shape kinds understood by make_shape, in lexicographic order.
const std::vector<std::string>& synthetic_shape_kinds();

// Builds one object of the given kind with seeded proportion jitter and a
// random spin around z, so objects of a class differ but stay recognizable.
Mesh make_shape(const std::string& kind, std::uint64_t seed);

}  // namespace pcadapt
