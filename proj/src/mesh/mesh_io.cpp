#include "varireg/mesh/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "varireg/common/error.hpp"

namespace varireg {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  throw Error(Errc::parse, fmt::format("line {}: {}", line, msg));
}

double to_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) parse_fail(line, fmt::format("bad number '{}'", tok));
  return v;
}

long long to_int(std::string_view tok, std::size_t line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) parse_fail(line, fmt::format("bad index '{}'", tok));
  return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

void add_polygon(TriMesh& mesh, const std::vector<long long>& poly, std::size_t line) {
  if (poly.size() < 3) parse_fail(line, "face with fewer than 3 vertices");
  const auto n = static_cast<long long>(mesh.vertices.size());
  for (auto idx : poly) {
    if (idx < 0 || idx >= n) {
      throw Error(Errc::index_out_of_range,
                  fmt::format("line {}: vertex index {} outside [0, {})", line, idx, n));
    }
  }
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    mesh.faces.push_back({static_cast<std::int32_t>(poly[0]), static_cast<std::int32_t>(poly[k]),
                          static_cast<std::int32_t>(poly[k + 1])});
  }
}

void finish(const TriMesh& mesh) {
  if (mesh.vertices.empty()) throw Error(Errc::empty_mesh, "file contains no vertices");
  if (mesh.faces.empty()) throw Error(Errc::empty_mesh, "file contains no faces");
}

TriMesh read_obj(std::istream& in) {
  TriMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  std::vector<long long> poly;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "v") {
      if (tok.size() < 4) parse_fail(lineno, "vertex needs 3 coordinates");
      mesh.vertices.emplace_back(to_double(tok[1], lineno), to_double(tok[2], lineno), to_double(tok[3], lineno));
    } else if (tok[0] == "f") {
      poly.clear();
      for (std::size_t k = 1; k < tok.size(); ++k) {
        auto ref = tok[k].substr(0, tok[k].find('/'));
        long long idx = to_int(ref, lineno);
        if (idx == 0) parse_fail(lineno, "OBJ indices are 1-based");
        // negative indices are relative to the current end of the vertex list
        idx = idx > 0 ? idx - 1 : static_cast<long long>(mesh.vertices.size()) + idx;
        poly.push_back(idx);
      }
      add_polygon(mesh, poly, lineno);
    }
    // vn, vt, o, g, s, usemtl, mtllib, l, p ... are ignored
  }
  finish(mesh);
  return mesh;
}

TriMesh read_off(std::istream& in) {
  std::vector<std::string> tokens;
  std::vector<std::size_t> token_lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    for (auto t : split_ws(line)) {
      tokens.emplace_back(t);
      token_lines.push_back(lineno);
    }
  }
  std::size_t pos = 0;
  auto next = [&]() -> std::string_view {
    if (pos >= tokens.size()) parse_fail(lineno, "unexpected end of file");
    return tokens[pos++];
  };
  auto cur_line = [&]() { return pos < token_lines.size() ? token_lines[pos] : lineno; };
  if (tokens.empty() || tokens[0] != "OFF") parse_fail(1, "missing OFF header");
  ++pos;
  const long long nv = to_int(next(), cur_line());
  const long long nf = to_int(next(), cur_line());
  (void)to_int(next(), cur_line());
  if (nv < 0 || nf < 0) parse_fail(cur_line(), "negative element count");
  TriMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    const auto l = cur_line();
    double x = to_double(next(), l);
    double y = to_double(next(), l);
    double z = to_double(next(), l);
    mesh.vertices.emplace_back(x, y, z);
  }
  std::vector<long long> poly;
  for (long long i = 0; i < nf; ++i) {
    const auto l = cur_line();
    const long long k = to_int(next(), l);
    poly.clear();
    for (long long j = 0; j < k; ++j) poly.push_back(to_int(next(), l));
    // trailing per-face colors on the same line are skipped
    while (pos < tokens.size() && token_lines[pos] == l) ++pos;
    add_polygon(mesh, poly, l);
  }
  finish(mesh);
  return mesh;
}

TriMesh read_ply(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto getline = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!getline() || line != "ply") parse_fail(1, "missing ply magic");
  struct Element {
    std::string name;
    long long count = 0;
    std::vector<std::string> props;  // "list" marks the face index list
  };
  std::vector<Element> elements;
  bool ascii = false;
  while (true) {
    if (!getline()) parse_fail(lineno, "unterminated header");
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii") throw Error(Errc::parse, "only ASCII PLY is supported");
      ascii = true;
    } else if (tok[0] == "element") {
      if (tok.size() < 3) parse_fail(lineno, "bad element line");
      elements.push_back({std::string(tok[1]), to_int(tok[2], lineno), {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) parse_fail(lineno, "property before element");
      if (tok.size() >= 2 && tok[1] == "list") {
        elements.back().props.emplace_back("list");
      } else if (tok.size() >= 3) {
        elements.back().props.emplace_back(tok[2]);
      } else {
        parse_fail(lineno, "bad property line");
      }
    } else if (tok[0] == "end_header") {
      break;
    }
  }
  if (!ascii) throw Error(Errc::parse, "missing format line");
  TriMesh mesh;
  std::vector<long long> poly;
  for (const auto& el : elements) {
    for (long long i = 0; i < el.count; ++i) {
      if (!getline()) parse_fail(lineno, "unexpected end of file in element " + el.name);
      auto tok = split_ws(line);
      if (el.name == "vertex") {
        Vec3 v = Vec3::Zero();
        int found = 0;
        for (std::size_t p = 0; p < el.props.size() && p < tok.size(); ++p) {
          const auto& name = el.props[p];
          if (name == "x") v.x() = to_double(tok[p], lineno), ++found;
          else if (name == "y") v.y() = to_double(tok[p], lineno), ++found;
          else if (name == "z") v.z() = to_double(tok[p], lineno), ++found;
        }
        if (found != 3 || tok.size() < el.props.size()) parse_fail(lineno, "vertex line is missing coordinates");
        mesh.vertices.push_back(v);
      } else if (el.name == "face") {
        if (tok.empty()) parse_fail(lineno, "empty face line");
        const long long k = to_int(tok[0], lineno);
        if (k < 0 || static_cast<std::size_t>(k) + 1 > tok.size()) parse_fail(lineno, "truncated face line");
        poly.clear();
        for (long long j = 0; j < k; ++j) poly.push_back(to_int(tok[static_cast<std::size_t>(j) + 1], lineno));
        add_polygon(mesh, poly, lineno);
      }
    }
  }
  finish(mesh);
  return mesh;
}

void check_writable(const TriMesh& mesh) {
  if (mesh.empty()) throw Error(Errc::empty_mesh, "refusing to save an empty mesh");
  require_valid(mesh);
}

}  // namespace

std::optional<MeshFormat> parse_format(std::string_view name) {
  const auto n = lower(name);
  if (n == "obj") return MeshFormat::obj;
  if (n == "ply" || n == "ply-ascii" || n == "ply_ascii") return MeshFormat::ply_ascii;
  if (n == "off") return MeshFormat::off;
  return std::nullopt;
}

std::optional<MeshFormat> format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  if (ext.empty()) return std::nullopt;
  return parse_format(std::string_view(ext).substr(1));
}

TriMesh read_mesh(std::istream& in, MeshFormat format) {
  switch (format) {
    case MeshFormat::obj: return read_obj(in);
    case MeshFormat::ply_ascii: return read_ply(in);
    case MeshFormat::off: return read_off(in);
  }
  throw Error(Errc::invalid_argument, "unknown mesh format");
}

TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  return read_mesh(in, format);
}

TriMesh load_mesh(const std::filesystem::path& path) {
  auto fmt = format_from_path(path);
  if (!fmt) throw Error(Errc::invalid_argument, "cannot infer mesh format from " + path.string());
  return load_mesh(path, *fmt);
}

void write_mesh(const TriMesh& mesh, std::ostream& out, MeshFormat format) {
  check_writable(mesh);
  std::string buf;
  auto it = std::back_inserter(buf);
  switch (format) {
    case MeshFormat::obj:
      for (const auto& v : mesh.vertices) fmt::format_to(it, "v {} {} {}\n", v.x(), v.y(), v.z());
      for (const auto& f : mesh.faces) fmt::format_to(it, "f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1);
      break;
    case MeshFormat::ply_ascii:
      fmt::format_to(it,
                     "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\n"
                     "property double z\n",
                     mesh.vertices.size());
      fmt::format_to(it, "element face {}\nproperty list uchar int vertex_indices\nend_header\n", mesh.faces.size());
      for (const auto& v : mesh.vertices) fmt::format_to(it, "{} {} {}\n", v.x(), v.y(), v.z());
      for (const auto& f : mesh.faces) fmt::format_to(it, "3 {} {} {}\n", f[0], f[1], f[2]);
      break;
    case MeshFormat::off:
      fmt::format_to(it, "OFF\n{} {} 0\n", mesh.vertices.size(), mesh.faces.size());
      for (const auto& v : mesh.vertices) fmt::format_to(it, "{} {} {}\n", v.x(), v.y(), v.z());
      for (const auto& f : mesh.faces) fmt::format_to(it, "3 {} {} {}\n", f[0], f[1], f[2]);
      break;
  }
  out << buf;
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path, MeshFormat format) {
  check_writable(mesh);
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  write_mesh(mesh, out, format);
  out.flush();
  if (!out) throw Error(Errc::io, "write to " + path.string() + " failed");
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
  auto fmt = format_from_path(path);
  if (!fmt) throw Error(Errc::invalid_argument, "cannot infer mesh format from " + path.string());
  save_mesh(mesh, path, *fmt);
}

}  // namespace varireg
