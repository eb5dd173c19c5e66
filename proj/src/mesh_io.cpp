#include "fmatch/mesh_io.hpp"

#include "fmatch/errors.hpp"
#include "fmatch/util.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <vector>

namespace fmatch {

namespace {

std::string lower_ext(const std::string& path) {
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

// Line-oriented cursor over the input text. Keeps the 1-based line number for
// error messages.
struct LineReader {
  const std::string& text;
  const std::string& name;
  std::size_t pos = 0;
  long line_no = 0;

  LineReader(const std::string& t, const std::string& n) : text(t), name(n) {}

  // Next raw line, or nullopt at EOF.
  std::optional<std::string> next_raw() {
    if (pos >= text.size()) return std::nullopt;
    std::size_t end = text.find('\n', pos);
    std::string line;
    if (end == std::string::npos) {
      line = text.substr(pos);
      pos = text.size();
    } else {
      line = text.substr(pos, end - pos);
      pos = end + 1;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    return line;
  }

  // Next line that has content after stripping '#' comments.
  std::optional<std::string> next_content() {
    for (;;) {
      auto raw = next_raw();
      if (!raw) return std::nullopt;
      std::string line = *raw;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t") != std::string::npos) return line;
    }
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(name, line_no, what); }
};

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_double(LineReader& rd, const std::string& tok, const char* what) {
  const char* b = tok.data();
  const char* e = b + tok.size();
  double v = 0.0;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) rd.fail(std::string("invalid ") + what + " '" + tok + "'");
  return v;
}

long parse_long(LineReader& rd, const std::string& tok, const char* what) {
  const char* b = tok.data();
  const char* e = b + tok.size();
  long v = 0;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) rd.fail(std::string("invalid ") + what + " '" + tok + "'");
  return v;
}

TriMesh parse_off(const std::string& text, const std::string& name) {
  LineReader rd(text, name);
  auto header = rd.next_content();
  if (!header) rd.fail("empty OFF file");
  {
    auto toks = split_ws(*header);
    if (toks.empty() || toks[0] != "OFF") rd.fail("expected OFF header");
  }
  auto counts = rd.next_content();
  if (!counts) rd.fail("missing vertex/face counts");
  auto ct = split_ws(*counts);
  if (ct.size() < 2) rd.fail("expected '<n_vertices> <n_faces> <n_edges>'");
  long nv = parse_long(rd, ct[0], "vertex count");
  long nf = parse_long(rd, ct[1], "face count");
  if (nv <= 0) rd.fail("vertex count must be positive");
  if (nf < 0) rd.fail("face count must be nonnegative");

  TriMesh mesh;
  mesh.V.resize(nv, 3);
  for (long v = 0; v < nv; ++v) {
    auto line = rd.next_content();
    if (!line) rd.fail(strf("unexpected end of file (read %ld of %ld vertices)", v, nv));
    auto toks = split_ws(*line);
    if (toks.size() < 3) rd.fail("vertex line needs 3 coordinates");
    for (int c = 0; c < 3; ++c) mesh.V(v, c) = parse_double(rd, toks[c], "coordinate");
  }
  mesh.F.resize(nf, 3);
  for (long f = 0; f < nf; ++f) {
    auto line = rd.next_content();
    if (!line) rd.fail(strf("unexpected end of file (read %ld of %ld faces)", f, nf));
    auto toks = split_ws(*line);
    if (toks.empty()) rd.fail("empty face line");
    long cnt = parse_long(rd, toks[0], "face vertex count");
    if (cnt != 3) rd.fail(strf("only triangles are supported (face has %ld vertices)", cnt));
    if (toks.size() < 4) rd.fail("face line needs 3 indices");
    for (int c = 0; c < 3; ++c)
      mesh.F(f, c) = static_cast<int>(parse_long(rd, toks[c + 1], "face index"));
  }
  return mesh;
}

TriMesh parse_obj(const std::string& text, const std::string& name) {
  LineReader rd(text, name);
  std::vector<Eigen::Vector3d> verts;
  std::vector<Eigen::Vector3d> normals;
  std::vector<Eigen::Vector3i> faces;
  for (;;) {
    auto raw = rd.next_raw();
    if (!raw) break;
    std::string line = *raw;
    if (line.empty() || line[0] == '#') continue;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string& kw = toks[0];
    if (kw == "v") {
      if (toks.size() < 4) rd.fail("'v' line needs 3 coordinates");
      verts.emplace_back(parse_double(rd, toks[1], "coordinate"),
                         parse_double(rd, toks[2], "coordinate"),
                         parse_double(rd, toks[3], "coordinate"));
    } else if (kw == "vn") {
      if (toks.size() < 4) rd.fail("'vn' line needs 3 components");
      normals.emplace_back(parse_double(rd, toks[1], "normal"),
                           parse_double(rd, toks[2], "normal"),
                           parse_double(rd, toks[3], "normal"));
    } else if (kw == "f") {
      if (toks.size() != 4) rd.fail(strf("only triangles are supported (face has %zu vertices)",
                                         toks.size() - 1));
      Eigen::Vector3i tri;
      for (int c = 0; c < 3; ++c) {
        std::string ref = toks[c + 1];
        auto slash = ref.find('/');
        if (slash != std::string::npos) ref.erase(slash);
        long idx = parse_long(rd, ref, "face index");
        if (idx < 0) idx = static_cast<long>(verts.size()) + idx + 1; // negative = relative
        tri[c] = static_cast<int>(idx - 1);                           // OBJ is 1-based
      }
      faces.push_back(tri);
    }
    // other keywords (vt, usemtl, o, g, s, mtllib) are ignored
  }
  if (verts.empty()) rd.fail("no vertices in OBJ file");
  TriMesh mesh;
  mesh.V.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) mesh.V.row(static_cast<Eigen::Index>(i)) = verts[i];
  mesh.F.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) mesh.F.row(static_cast<Eigen::Index>(i)) = faces[i];
  if (normals.size() == verts.size()) {
    mesh.N.resize(static_cast<Eigen::Index>(normals.size()), 3);
    for (std::size_t i = 0; i < normals.size(); ++i)
      mesh.N.row(static_cast<Eigen::Index>(i)) = normals[i];
  }
  return mesh;
}

TriMesh parse_ply(const std::string& text, const std::string& name) {
  LineReader rd(text, name);
  auto magic = rd.next_content();
  if (!magic || split_ws(*magic)[0] != "ply") rd.fail("expected 'ply' magic");
  long nv = -1, nf = -1;
  bool ascii = false;
  // Property order of the vertex element; we honor x/y/z and nx/ny/nz.
  std::vector<std::string> vertex_props;
  std::string current_element;
  for (;;) {
    auto line = rd.next_content();
    if (!line) rd.fail("unterminated PLY header");
    auto toks = split_ws(*line);
    if (toks.empty()) continue;
    if (toks[0] == "format") {
      if (toks.size() < 2 || toks[1] != "ascii") rd.fail("only ascii PLY is supported");
      ascii = true;
    } else if (toks[0] == "comment") {
      continue;
    } else if (toks[0] == "element") {
      if (toks.size() < 3) rd.fail("malformed element line");
      current_element = toks[1];
      if (toks[1] == "vertex") nv = parse_long(rd, toks[2], "vertex count");
      else if (toks[1] == "face") nf = parse_long(rd, toks[2], "face count");
    } else if (toks[0] == "property") {
      if (current_element == "vertex" && toks.size() >= 3 && toks[1] != "list")
        vertex_props.push_back(toks.back());
    } else if (toks[0] == "end_header") {
      break;
    }
  }
  if (!ascii) rd.fail("missing 'format ascii' line");
  if (nv <= 0) rd.fail("missing or empty vertex element");
  if (nf < 0) rd.fail("missing face element");

  auto prop_index = [&](const char* p) -> int {
    auto it = std::find(vertex_props.begin(), vertex_props.end(), p);
    return it == vertex_props.end() ? -1 : static_cast<int>(it - vertex_props.begin());
  };
  int ix = prop_index("x"), iy = prop_index("y"), iz = prop_index("z");
  if (ix < 0 || iy < 0 || iz < 0) rd.fail("vertex element must have x, y, z properties");
  int inx = prop_index("nx"), iny = prop_index("ny"), inz = prop_index("nz");
  bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;

  TriMesh mesh;
  mesh.V.resize(nv, 3);
  if (has_normals) mesh.N.resize(nv, 3);
  for (long v = 0; v < nv; ++v) {
    auto line = rd.next_content();
    if (!line) rd.fail(strf("unexpected end of file (read %ld of %ld vertices)", v, nv));
    auto toks = split_ws(*line);
    if (static_cast<int>(toks.size()) < static_cast<int>(vertex_props.size()))
      rd.fail("vertex line has fewer values than declared properties");
    mesh.V(v, 0) = parse_double(rd, toks[ix], "coordinate");
    mesh.V(v, 1) = parse_double(rd, toks[iy], "coordinate");
    mesh.V(v, 2) = parse_double(rd, toks[iz], "coordinate");
    if (has_normals) {
      mesh.N(v, 0) = parse_double(rd, toks[inx], "normal");
      mesh.N(v, 1) = parse_double(rd, toks[iny], "normal");
      mesh.N(v, 2) = parse_double(rd, toks[inz], "normal");
    }
  }
  mesh.F.resize(nf, 3);
  for (long f = 0; f < nf; ++f) {
    auto line = rd.next_content();
    if (!line) rd.fail(strf("unexpected end of file (read %ld of %ld faces)", f, nf));
    auto toks = split_ws(*line);
    if (toks.empty()) rd.fail("empty face line");
    long cnt = parse_long(rd, toks[0], "face vertex count");
    if (cnt != 3) rd.fail(strf("only triangles are supported (face has %ld vertices)", cnt));
    if (toks.size() < 4) rd.fail("face line needs 3 indices");
    for (int c = 0; c < 3; ++c)
      mesh.F(f, c) = static_cast<int>(parse_long(rd, toks[c + 1], "face index"));
  }
  return mesh;
}

} // namespace

MeshFormat mesh_format_from_path(const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == "off") return MeshFormat::Off;
  if (ext == "obj") return MeshFormat::Obj;
  if (ext == "ply") return MeshFormat::PlyAscii;
  throw InputError("cannot infer mesh format from '" + path + "' (expected .off/.obj/.ply)");
}

TriMesh parse_mesh(const std::string& text, MeshFormat format, const std::string& name) {
  TriMesh mesh;
  switch (format) {
    case MeshFormat::Off: mesh = parse_off(text, name); break;
    case MeshFormat::Obj: mesh = parse_obj(text, name); break;
    case MeshFormat::PlyAscii: mesh = parse_ply(text, name); break;
  }
  validate_mesh(mesh, name);
  return mesh;
}

TriMesh load_mesh(const std::string& path, std::optional<MeshFormat> format) {
  MeshFormat fmt = format ? *format : mesh_format_from_path(path);
  return parse_mesh(read_file(path), fmt, path);
}

std::string serialize_mesh(const TriMesh& mesh, MeshFormat format) {
  std::string out;
  const Eigen::Index nv = mesh.n_vertices();
  const Eigen::Index nf = mesh.n_faces();
  auto vline = [&](Eigen::Index v) {
    return fmt_double(mesh.V(v, 0)) + " " + fmt_double(mesh.V(v, 1)) + " " +
           fmt_double(mesh.V(v, 2));
  };
  switch (format) {
    case MeshFormat::Off: {
      out += strf("OFF\n%lld %lld 0\n", static_cast<long long>(nv), static_cast<long long>(nf));
      for (Eigen::Index v = 0; v < nv; ++v) out += vline(v) + "\n";
      for (Eigen::Index f = 0; f < nf; ++f)
        out += strf("3 %d %d %d\n", mesh.F(f, 0), mesh.F(f, 1), mesh.F(f, 2));
      break;
    }
    case MeshFormat::Obj: {
      for (Eigen::Index v = 0; v < nv; ++v) out += "v " + vline(v) + "\n";
      if (mesh.has_normals())
        for (Eigen::Index v = 0; v < nv; ++v)
          out += "vn " + fmt_double(mesh.N(v, 0)) + " " + fmt_double(mesh.N(v, 1)) + " " +
                 fmt_double(mesh.N(v, 2)) + "\n";
      for (Eigen::Index f = 0; f < nf; ++f)
        out += strf("f %d %d %d\n", mesh.F(f, 0) + 1, mesh.F(f, 1) + 1, mesh.F(f, 2) + 1);
      break;
    }
    case MeshFormat::PlyAscii: {
      out += "ply\nformat ascii 1.0\n";
      out += strf("element vertex %lld\n", static_cast<long long>(nv));
      out += "property double x\nproperty double y\nproperty double z\n";
      if (mesh.has_normals())
        out += "property double nx\nproperty double ny\nproperty double nz\n";
      out += strf("element face %lld\n", static_cast<long long>(nf));
      out += "property list uchar int vertex_indices\nend_header\n";
      for (Eigen::Index v = 0; v < nv; ++v) {
        out += vline(v);
        if (mesh.has_normals())
          out += " " + fmt_double(mesh.N(v, 0)) + " " + fmt_double(mesh.N(v, 1)) + " " +
                 fmt_double(mesh.N(v, 2));
        out += "\n";
      }
      for (Eigen::Index f = 0; f < nf; ++f)
        out += strf("3 %d %d %d\n", mesh.F(f, 0), mesh.F(f, 1), mesh.F(f, 2));
      break;
    }
  }
  return out;
}

void save_mesh(const TriMesh& mesh, const std::string& path, std::optional<MeshFormat> format) {
  MeshFormat fmt = format ? *format : mesh_format_from_path(path);
  atomic_write_file(path, serialize_mesh(mesh, fmt));
}

} // namespace fmatch
