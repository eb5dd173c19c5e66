#pragma once

#include "fmatch/mesh.hpp"

#include <optional>
#include <string>

namespace fmatch {

enum class MeshFormat { Off, Obj, PlyAscii };

// Infer format from the file extension (.off/.obj/.ply). Throws InputError
// for anything else.
MeshFormat mesh_format_from_path(const std::string& path);

// Parse a mesh file and validate it (index range, degenerate faces, edge-graph
// connectivity). Vertex and face order are preserved exactly as written;
// ground-truth maps are index based so reordering would corrupt them.
// Throws ParseError with file/line context, or InputError on invariant
// violations.
TriMesh load_mesh(const std::string& path, std::optional<MeshFormat> format = std::nullopt);

// Write a mesh in the given format (or the extension-inferred one). ASCII
// output uses round-trip precision (%.17g, >= 9 significant digits) so
// save-then-load reproduces the arrays exactly. Writes are atomic
// (temp file + rename).
void save_mesh(const TriMesh& mesh, const std::string& path,
               std::optional<MeshFormat> format = std::nullopt);

// In-memory variants used by the writers/tests.
TriMesh parse_mesh(const std::string& text, MeshFormat format, const std::string& name = "<memory>");
std::string serialize_mesh(const TriMesh& mesh, MeshFormat format);

} // namespace fmatch
