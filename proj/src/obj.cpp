#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "topoflow/error.hpp"
#include "topoflow/geometry.hpp"

namespace topoflow {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& reason) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + reason);
}

double parse_double(std::string_view token, std::size_t line) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) fail(line, "bad number '" + std::string(token) + "'");
  return value;
}

long long parse_int(std::string_view token, std::size_t line) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  long long value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) fail(line, "bad index '" + std::string(token) + "'");
  return value;
}

// OBJ indices are 1-based; negative values count back from the latest record.
int resolve_index(long long raw, std::size_t count, std::size_t line, const char* what) {
  long long idx = 0;
  if (raw > 0) {
    idx = raw - 1;
  } else if (raw < 0) {
    idx = static_cast<long long>(count) + raw;
  } else {
    fail(line, std::string(what) + " index 0 is invalid");
  }
  if (idx < 0 || idx >= static_cast<long long>(count)) {
    fail(line, std::string(what) + " index " + std::to_string(raw) + " out of range");
  }
  return static_cast<int>(idx);
}

struct Corner {
  int v = 0;
  int vt = -1;
};

}  // namespace

namespace {

Mesh parse_impl(std::string_view text, Instance instance, bool require_faces) {
  Mesh mesh;
  mesh.instance = instance;
  std::vector<Vec2> texcoords;
  std::vector<std::array<int, 3>> face_vts;
  bool any_with_uv = false;
  bool any_without_uv = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string_view line = trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;

    const auto tokens = split_ws(line);
    const std::string_view tag = tokens[0];
    if (tag == "v") {
      if (tokens.size() < 4) fail(line_no, "vertex needs 3 coordinates");
      mesh.vertices.emplace_back(parse_double(tokens[1], line_no), parse_double(tokens[2], line_no),
                                 parse_double(tokens[3], line_no));
    } else if (tag == "vt") {
      if (tokens.size() < 3) fail(line_no, "texture coordinate needs 2 values");
      texcoords.emplace_back(parse_double(tokens[1], line_no), parse_double(tokens[2], line_no));
    } else if (tag == "f") {
      if (tokens.size() < 4) fail(line_no, "face needs at least 3 corners");
      std::vector<Corner> corners;
      corners.reserve(tokens.size() - 1);
      for (std::size_t k = 1; k < tokens.size(); ++k) {
        const std::string_view tok = tokens[k];
        const auto slash1 = tok.find('/');
        Corner c;
        c.v = resolve_index(parse_int(tok.substr(0, slash1), line_no), mesh.vertices.size(),
                            line_no, "vertex");
        if (slash1 != std::string_view::npos) {
          const auto rest = tok.substr(slash1 + 1);
          const auto slash2 = rest.find('/');
          const auto vt_tok = rest.substr(0, slash2);
          if (!vt_tok.empty()) {
            c.vt = resolve_index(parse_int(vt_tok, line_no), texcoords.size(), line_no,
                                 "texture coordinate");
          }
          if (slash2 != std::string_view::npos) {
            const auto vn_tok = rest.substr(slash2 + 1);
            if (!vn_tok.empty()) parse_int(vn_tok, line_no);  // normals unused
          }
        }
        corners.push_back(c);
      }
      const bool with_uv = corners.front().vt >= 0;
      for (const auto& c : corners) {
        if ((c.vt >= 0) != with_uv) fail(line_no, "face mixes corners with and without vt");
      }
      (with_uv ? any_with_uv : any_without_uv) = true;
      for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
        mesh.faces.push_back({corners[0].v, corners[k].v, corners[k + 1].v});
        face_vts.push_back({corners[0].vt, corners[k].vt, corners[k + 1].vt});
      }
    }
    // vn, l, p, g, o, s, usemtl, mtllib and unknown records are ignored.
  }

  if (require_faces && mesh.faces.empty()) throw Error(ErrorCode::EmptyMesh, "no faces");
  if (any_with_uv && any_without_uv) {
    throw Error(ErrorCode::ParseError, "some faces have texture coordinates and some do not");
  }
  if (any_with_uv) {
    std::vector<FaceUv> uvs;
    uvs.reserve(face_vts.size());
    for (const auto& vt : face_vts) uvs.push_back({texcoords[vt[0]], texcoords[vt[1]], texcoords[vt[2]]});
    mesh.face_uvs = std::move(uvs);
  }
  return mesh;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Mesh parse_obj(std::string_view text, Instance instance) { return parse_impl(text, instance, true); }

Mesh load_obj(const std::filesystem::path& path, Instance instance) {
  return parse_impl(read_file(path), instance, true);
}

std::vector<Vec3> load_obj_vertices(const std::filesystem::path& path) {
  return parse_impl(read_file(path), Instance::Object, false).vertices;
}

std::string format_obj(const Mesh& mesh) {
  std::ostringstream out;
  out << std::setprecision(9);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  if (mesh.face_uvs) {
    for (const auto& uv : *mesh.face_uvs) {
      for (const auto& c : uv) out << "vt " << c.x() << ' ' << c.y() << '\n';
    }
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      out << 'f';
      for (int k = 0; k < 3; ++k) out << ' ' << mesh.faces[f][k] + 1 << '/' << 3 * f + k + 1;
      out << '\n';
    }
  } else {
    for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
  return out.str();
}

void write_obj(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << format_obj(mesh);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace topoflow
