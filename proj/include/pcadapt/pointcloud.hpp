#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcadapt/mesh.hpp"

namespace pcadapt {

// A cloud of 3D points, optionally labelled. object_id and seed record where
// the cloud came from so derived seeds stay stable per object.
struct PointCloud {
  std::vector<Vec3> points;
  int label = -1;  // -1 = unlabelled
  std::string object_id;
  std::uint64_t seed = 0;

  std::size_t size() const { return points.size(); }
  bool labelled() const { return label >= 0; }
};

// n i.i.d. samples uniform over the mesh surface: face picked with
// probability proportional to area, point by uniform barycentric coordinates.
PointCloud sample_surface(const Mesh& mesh, std::size_t n, std::uint64_t seed);

// Centers the cloud at the origin and scales the farthest point to norm 1.
// A cloud whose points all coincide collapses to the origin.
PointCloud normalize_unit_sphere(PointCloud cloud);

// m points chosen uniformly without replacement, emitted in randomized order.
PointCloud subsample(const PointCloud& cloud, std::size_t m, std::uint64_t seed);

PointCloud rotate_z(PointCloud cloud, double angle);

struct RosterEntry {
  std::string object_id;
  int label = -1;
};

struct DatasetSplit {
  std::vector<RosterEntry> source_labelled;
  std::vector<std::string> target_unlabelled;  // ids of the source objects
  std::vector<RosterEntry> test;
  std::uint64_t seed = 0;
};

// Seeded shuffle, then the first floor(fraction*N) objects become the
// labelled source (and, as ids, the unlabelled target); the rest is the test
// set.
DatasetSplit build_splits(std::vector<RosterEntry> roster, double train_fraction,
                          std::uint64_t seed);

// Same, with the source size given explicitly.
DatasetSplit build_splits_sized(std::vector<RosterEntry> roster, std::size_t source_count,
                                std::uint64_t seed);

struct Roster {
  std::vector<RosterEntry> entries;
  std::vector<std::string> class_names;  // lexicographic; index = label
};

// Scans a ModelNet-style tree <root>/<class>/<split>/<name>.off. Class names
// come from the directory names; train/test subdirectories are pooled into
// one roster.
Roster scan_dataset_root(const std::filesystem::path& root);

// Roster over the built-in parametric shapes.
Roster synthetic_roster(const std::vector<std::string>& classes, std::size_t objects_per_class);

// Flat binary point-table container (see README for the layout). Round-trips
// bit-exactly.
struct PointTable {
  std::vector<std::string> class_names;
  std::vector<PointCloud> clouds;
};

void write_point_table(const std::filesystem::path& path, const PointTable& table);
PointTable read_point_table(const std::filesystem::path& path);

}  // namespace pcadapt
