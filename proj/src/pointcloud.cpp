#include "pcadapt/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "pcadapt/error.hpp"
#include "pcadapt/rng.hpp"

namespace pcadapt {

PointCloud sample_surface(const Mesh& mesh, std::size_t n, std::uint64_t seed) {
  std::vector<double> cumulative;
  cumulative.reserve(mesh.faces.size());
  double total = 0.0;
  for (const auto& f : mesh.faces) {
    total += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) fail(Errc::degenerate_mesh, "mesh has zero surface area");

  PointCloud cloud;
  cloud.label = mesh.class_label;
  cloud.object_id = mesh.object_id;
  cloud.seed = seed;
  cloud.points.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    const std::size_t face_idx = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    const auto& f = mesh.faces[std::min(face_idx, mesh.faces.size() - 1)];
    double u = rng.uniform();
    double v = rng.uniform();
    if (u + v > 1.0) {  // reflect into the triangle
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    cloud.points.push_back(a + (b - a) * u + (c - a) * v);
  }
  return cloud;
}

PointCloud normalize_unit_sphere(PointCloud cloud) {
  if (cloud.points.empty()) fail(Errc::empty_cloud, "cannot normalize an empty cloud");
  Vec3 centroid{0, 0, 0};
  for (const auto& p : cloud.points) centroid = centroid + p;
  centroid = centroid * (1.0 / static_cast<double>(cloud.points.size()));
  double max_norm = 0.0;
  for (auto& p : cloud.points) {
    p = p - centroid;
    max_norm = std::max(max_norm, p.norm());
  }
  if (max_norm > 0.0) {
    const double inv = 1.0 / max_norm;
    for (auto& p : cloud.points) p = p * inv;
  }
  return cloud;
}

PointCloud subsample(const PointCloud& cloud, std::size_t m, std::uint64_t seed) {
  if (m > cloud.size())
    fail(Errc::too_many_requested,
         "requested " + std::to_string(m) + " of " + std::to_string(cloud.size()) + " points");
  std::vector<std::size_t> idx(cloud.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates: the first m entries are a uniform sample without
  // replacement, already in randomized order.
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + rng.below(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  PointCloud out;
  out.label = cloud.label;
  out.object_id = cloud.object_id;
  out.seed = seed;
  out.points.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.points.push_back(cloud.points[idx[i]]);
  return out;
}

PointCloud rotate_z(PointCloud cloud, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  for (auto& p : cloud.points) p = {p.x * c - p.y * s, p.x * s + p.y * c, p.z};
  return cloud;
}

namespace {

DatasetSplit cut_splits(std::vector<RosterEntry> roster, std::size_t source_count,
                        std::uint64_t seed) {
  if (roster.empty()) fail(Errc::empty_roster, "roster is empty");
  if (source_count > roster.size())
    fail(Errc::too_many_requested, "source split larger than roster");
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(roster);
  DatasetSplit split;
  split.seed = seed;
  split.source_labelled.assign(roster.begin(), roster.begin() + source_count);
  for (const auto& e : split.source_labelled) split.target_unlabelled.push_back(e.object_id);
  split.test.assign(roster.begin() + source_count, roster.end());
  return split;
}

}  // namespace

DatasetSplit build_splits(std::vector<RosterEntry> roster, double train_fraction,
                          std::uint64_t seed) {
  if (!(train_fraction > 0.0) || train_fraction > 1.0)
    fail(Errc::invalid_argument, "train fraction must be in (0, 1]");
  const std::size_t total = roster.size();
  const auto source_count =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(total)));
  return cut_splits(std::move(roster), std::min(source_count, total), seed);
}

DatasetSplit build_splits_sized(std::vector<RosterEntry> roster, std::size_t source_count,
                                std::uint64_t seed) {
  return cut_splits(std::move(roster), source_count, seed);
}

Roster scan_dataset_root(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) fail(Errc::io_error, "dataset root " + root.string() + " not found");
  Roster roster;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) roster.class_names.push_back(entry.path().filename().string());
  std::sort(roster.class_names.begin(), roster.class_names.end());
  for (std::size_t label = 0; label < roster.class_names.size(); ++label) {
    const fs::path class_dir = root / roster.class_names[label];
    std::vector<std::string> ids;
    for (const auto& split_dir : fs::directory_iterator(class_dir)) {
      if (!split_dir.is_directory()) continue;
      for (const auto& f : fs::directory_iterator(split_dir.path()))
        if (f.path().extension() == ".off")
          ids.push_back(roster.class_names[label] + "/" + f.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
    for (auto& id : ids) roster.entries.push_back({std::move(id), static_cast<int>(label)});
  }
  if (roster.entries.empty()) fail(Errc::empty_roster, "no .off files under " + root.string());
  return roster;
}

Roster synthetic_roster(const std::vector<std::string>& classes, std::size_t objects_per_class) {
  const auto& known = synthetic_shape_kinds();
  Roster roster;
  roster.class_names = classes;
  std::sort(roster.class_names.begin(), roster.class_names.end());
  for (std::size_t label = 0; label < roster.class_names.size(); ++label) {
    const auto& name = roster.class_names[label];
    if (std::find(known.begin(), known.end(), name) == known.end())
      fail(Errc::invalid_argument, "unknown synthetic class '" + name + "'");
    for (std::size_t i = 0; i < objects_per_class; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%04zu", i + 1);
      roster.entries.push_back({name + "/" + name + "_" + buf, static_cast<int>(label)});
    }
  }
  if (roster.entries.empty()) fail(Errc::empty_roster, "synthetic roster is empty");
  return roster;
}

// Point-table container. Layout (little endian):
//   "PCPT" | u32 version | u32 class count | classes (u32 len + bytes)
//   | u64 record count | records
// record: u32 id len + bytes | i32 label | u64 seed | u64 n | n*3 f64
namespace {

constexpr char kTableMagic[4] = {'P', 'C', 'P', 'T'};
constexpr std::uint32_t kTableVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <class T>
T take(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) fail(Errc::io_error, "truncated point table");
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string take_string(std::istream& in) {
  const auto len = take<std::uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) fail(Errc::io_error, "truncated point table");
  return s;
}

}  // namespace

void write_point_table(const std::filesystem::path& path, const PointTable& table) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write " + tmp);
    out.write(kTableMagic, 4);
    put<std::uint32_t>(out, kTableVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(table.class_names.size()));
    for (const auto& name : table.class_names) put_string(out, name);
    put<std::uint64_t>(out, table.clouds.size());
    for (const auto& cloud : table.clouds) {
      put_string(out, cloud.object_id);
      put<std::int32_t>(out, cloud.label);
      put<std::uint64_t>(out, cloud.seed);
      put<std::uint64_t>(out, cloud.points.size());
      for (const auto& p : cloud.points) {
        put(out, p.x);
        put(out, p.y);
        put(out, p.z);
      }
    }
    if (!out) fail(Errc::io_error, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

PointTable read_point_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kTableMagic, 4) != 0)
    fail(Errc::io_error, path.string() + " is not a point table");
  if (take<std::uint32_t>(in) != kTableVersion)
    fail(Errc::io_error, "unsupported point-table version");
  PointTable table;
  const auto n_classes = take<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n_classes; ++i) table.class_names.push_back(take_string(in));
  const auto n_records = take<std::uint64_t>(in);
  table.clouds.reserve(n_records);
  for (std::uint64_t r = 0; r < n_records; ++r) {
    PointCloud cloud;
    cloud.object_id = take_string(in);
    cloud.label = take<std::int32_t>(in);
    cloud.seed = take<std::uint64_t>(in);
    const auto n = take<std::uint64_t>(in);
    cloud.points.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      const double x = take<double>(in);
      const double y = take<double>(in);
      const double z = take<double>(in);
      cloud.points.push_back({x, y, z});
    }
    table.clouds.push_back(std::move(cloud));
  }
  return table;
}

}  // namespace pcadapt
