#include "varireg/mesh/remesh.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "varireg/common/error.hpp"
#include "varireg/common/rng.hpp"

namespace varireg {

TriMesh subdivide_midpoint(const TriMesh& mesh) {
  require_valid(mesh);
  TriMesh out;
  out.vertices = mesh.vertices;
  out.faces.reserve(mesh.faces.size() * 4);
  std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> midpoint;
  auto mid = [&](std::int32_t a, std::int32_t b) {
    auto key = std::minmax(a, b);
    auto [it, inserted] = midpoint.emplace(key, static_cast<std::int32_t>(out.vertices.size()));
    if (inserted) out.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
    return it->second;
  };
  for (const auto& f : mesh.faces) {
    const auto ab = mid(f[0], f[1]);
    const auto bc = mid(f[1], f[2]);
    const auto ca = mid(f[2], f[0]);
    out.faces.push_back({f[0], ab, ca});
    out.faces.push_back({ab, f[1], bc});
    out.faces.push_back({ca, bc, f[2]});
    out.faces.push_back({ab, bc, ca});
  }
  return out;
}

namespace {

class Collapser {
 public:
  Collapser(const TriMesh& mesh, const DecimateOptions& opts)
      : pos_(mesh.vertices), faces_(mesh.faces), opts_(opts), rng_(opts.seed) {
    face_alive_.assign(faces_.size(), true);
    vertex_alive_.assign(pos_.size(), true);
    incident_.resize(pos_.size());
    for (std::size_t fi = 0; fi < faces_.size(); ++fi)
      for (auto v : faces_[fi]) incident_[v].push_back(static_cast<std::int32_t>(fi));
    locked_ = opts.locked;
    if (locked_.empty()) locked_.assign(pos_.size(), false);
    if (locked_.size() != pos_.size()) throw Error(Errc::size_mismatch, "locked mask must cover every vertex");
    // boundary vertices stay put so open meshes keep their outline
    for (const auto& [edge, count] : edge_face_count()) {
      if (count != 2) locked_[edge.first] = locked_[edge.second] = true;
    }
    area_floor_ = degeneracy_threshold(mesh);
    alive_faces_ = faces_.size();
    for (std::size_t fi = 0; fi < faces_.size(); ++fi) {
      const auto& f = faces_[fi];
      for (int k = 0; k < 3; ++k) push(f[k], f[(k + 1) % 3]);
    }
  }

  bool run(std::size_t target) {
    while (alive_faces_ > target) {
      if (queue_.empty()) return false;
      const Entry e = queue_.top();
      queue_.pop();
      if (!vertex_alive_[e.u] || !vertex_alive_[e.v]) continue;
      if ((pos_[e.u] - pos_[e.v]).squaredNorm() != e.length2) continue;  // stale entry
      collapse_if_legal(e.u, e.v);
    }
    return true;
  }

  TriMesh result() const {
    TriMesh out;
    std::vector<std::int32_t> remap(pos_.size(), -1);
    for (std::size_t v = 0; v < pos_.size(); ++v) {
      if (!vertex_alive_[v] || incident_[v].empty()) continue;
      remap[v] = static_cast<std::int32_t>(out.vertices.size());
      out.vertices.push_back(pos_[v]);
    }
    for (std::size_t fi = 0; fi < faces_.size(); ++fi) {
      if (!face_alive_[fi]) continue;
      const auto& f = faces_[fi];
      out.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
    }
    return out;
  }

  std::size_t alive_faces() const { return alive_faces_; }

 private:
  struct Entry {
    double length2;
    std::uint64_t tie;
    std::int32_t u, v;
    bool operator>(const Entry& o) const {
      if (length2 != o.length2) return length2 > o.length2;
      return tie > o.tie;
    }
  };

  std::map<std::pair<std::int32_t, std::int32_t>, int> edge_face_count() const {
    std::map<std::pair<std::int32_t, std::int32_t>, int> count;
    for (std::size_t fi = 0; fi < faces_.size(); ++fi) {
      const auto& f = faces_[fi];
      for (int k = 0; k < 3; ++k) ++count[std::minmax(f[k], f[(k + 1) % 3])];
    }
    return count;
  }

  void push(std::int32_t a, std::int32_t b) {
    if (locked_[a] || locked_[b]) return;
    auto [u, v] = std::minmax(a, b);
    const std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
    queue_.push({(pos_[u] - pos_[v]).squaredNorm(), rng_.at(key), u, v});
  }

  std::vector<std::int32_t> ring(std::int32_t v) const {
    std::vector<std::int32_t> r;
    for (auto fi : incident_[v])
      for (auto w : faces_[fi])
        if (w != v) r.push_back(w);
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    return r;
  }

  static bool has(const Face& f, std::int32_t v) { return f[0] == v || f[1] == v || f[2] == v; }

  Vec3 normal_of(const Face& f, std::int32_t moved_a, std::int32_t moved_b, const Vec3& target) const {
    auto p = [&](std::int32_t i) -> const Vec3& { return (i == moved_a || i == moved_b) ? target : pos_[i]; };
    return (p(f[1]) - p(f[0])).cross(p(f[2]) - p(f[0]));
  }

  void collapse_if_legal(std::int32_t u, std::int32_t v) {
    std::vector<std::int32_t> shared;
    for (auto fi : incident_[u])
      if (has(faces_[fi], v)) shared.push_back(fi);
    if (shared.size() != 2) return;

    // link condition: the only common neighbors are the two opposite corners
    std::vector<std::int32_t> opposite;
    for (auto fi : shared)
      for (auto w : faces_[fi])
        if (w != u && w != v) opposite.push_back(w);
    std::sort(opposite.begin(), opposite.end());
    const auto ru = ring(u);
    const auto rv = ring(v);
    std::vector<std::int32_t> common;
    std::set_intersection(ru.begin(), ru.end(), rv.begin(), rv.end(), std::back_inserter(common));
    if (common != opposite) return;
    // avoid collapsing a tetrahedron-like cap into a doubled face
    if (ru.size() <= 3 || rv.size() <= 3) return;

    const Vec3 target = 0.5 * (pos_[u] + pos_[v]);
    for (auto w : {u, v}) {
      for (auto fi : incident_[w]) {
        if (std::find(shared.begin(), shared.end(), fi) != shared.end()) continue;
        const Face& f = faces_[fi];
        const Vec3 before = (pos_[f[1]] - pos_[f[0]]).cross(pos_[f[2]] - pos_[f[0]]);
        const Vec3 after = normal_of(f, u, v, target);
        const double an = after.norm();
        if (an <= area_floor_) return;
        if (before.dot(after) < opts_.min_normal_cos * before.norm() * an) return;
      }
    }

    for (auto fi : shared) {
      face_alive_[fi] = false;
      --alive_faces_;
      for (auto w : faces_[fi]) {
        auto& inc = incident_[w];
        inc.erase(std::remove(inc.begin(), inc.end(), fi), inc.end());
      }
    }
    for (auto fi : incident_[v]) {
      for (auto& w : faces_[fi])
        if (w == v) w = u;
      incident_[u].push_back(fi);
    }
    incident_[v].clear();
    vertex_alive_[v] = false;
    pos_[u] = target;
    for (auto w : ring(u)) push(u, w);
  }

  std::vector<Vec3> pos_;
  std::vector<Face> faces_;
  const DecimateOptions& opts_;
  CounterRng rng_;
  std::vector<bool> face_alive_;
  std::vector<bool> vertex_alive_;
  std::vector<bool> locked_;
  std::vector<std::vector<std::int32_t>> incident_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue_;
  double area_floor_ = 0.0;
  std::size_t alive_faces_ = 0;
};

}  // namespace

TriMesh decimate_edge_collapse(const TriMesh& mesh, std::size_t target_faces, const DecimateOptions& opts) {
  require_valid(mesh);
  if (target_faces < 4) throw Error(Errc::invalid_argument, "target_faces must be >= 4");
  if (target_faces >= mesh.faces.size()) return mesh;
  Collapser c(mesh, opts);
  if (!c.run(target_faces) && !opts.allow_partial) {
    throw Error(Errc::unreachable_target, "no legal collapse left at " + std::to_string(c.alive_faces()) +
                                              " faces (target " + std::to_string(target_faces) + ")");
  }
  return c.result();
}

TriMesh remesh_variable(const TriMesh& mesh, Axis axis, double split_value, VariableRemeshInfo* info,
                        std::uint64_t seed) {
  require_valid(mesh);
  const int ax = static_cast<int>(axis);
  auto center = [ax](const TriMesh& m, const Face& f) {
    return (m.vertices[f[0]][ax] + m.vertices[f[1]][ax] + m.vertices[f[2]][ax]) / 3.0;
  };
  std::size_t top_faces = 0;
  for (const auto& f : mesh.faces)
    if (center(mesh, f) > split_value) ++top_faces;

  // children of face i are faces 4i..4i+3
  TriMesh fine = subdivide_midpoint(mesh);
  std::vector<bool> locked(fine.vertices.size(), false);
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    if (center(mesh, mesh.faces[fi]) > split_value) continue;
    for (std::size_t c = 4 * fi; c < 4 * fi + 4; ++c)
      for (auto v : fine.faces[c]) locked[v] = true;
  }

  TriMesh out = fine;
  if (top_faces > 0) {
    const std::size_t bottom_children = 4 * (mesh.faces.size() - top_faces);
    DecimateOptions opts;
    opts.locked = std::move(locked);
    opts.allow_partial = true;
    opts.seed = seed;
    out = decimate_edge_collapse(fine, bottom_children + std::max<std::size_t>(top_faces / 2, 1), opts);
  }
  if (info) {
    *info = {};
    for (const auto& f : out.faces) (center(out, f) > split_value ? info->faces_above : info->faces_below)++;
  }
  return out;
}

TriMesh remesh_updown(const TriMesh& mesh, std::uint64_t seed) {
  DecimateOptions opts;
  opts.seed = seed;
  return decimate_edge_collapse(subdivide_midpoint(mesh), 2 * mesh.faces.size(), opts);
}

TriMesh remesh_iso(const TriMesh& mesh, std::uint64_t seed) {
  DecimateOptions opts;
  opts.seed = seed;
  return decimate_edge_collapse(subdivide_midpoint(mesh), mesh.faces.size(), opts);
}

}  // namespace varireg
