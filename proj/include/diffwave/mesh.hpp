#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "diffwave/error.hpp"

namespace diffwave {

using Index = Eigen::Index;

/// Triangle mesh: vertex positions plus face index triples.
///
/// Construction checks index range and repeated indices. Face degeneracy is
/// checked by `load_mesh` (and on demand via `check_nondegenerate`) so that
/// programmatically built meshes can still be inspected before validation.
class TriangleMesh {
public:
    TriangleMesh() = default;

    TriangleMesh(Eigen::MatrixX3d vertices, Eigen::MatrixX3i faces)
        : vertices_(std::move(vertices)), faces_(std::move(faces)) {
        const Index nv = vertices_.rows();
        for (Index f = 0; f < faces_.rows(); ++f) {
            for (int c = 0; c < 3; ++c) {
                const int v = faces_(f, c);
                if (v < 0 || v >= nv)
                    throw DataError("face " + std::to_string(f) + " references vertex " + std::to_string(v) +
                                    " outside [0, " + std::to_string(nv) + ")");
            }
            if (faces_(f, 0) == faces_(f, 1) || faces_(f, 1) == faces_(f, 2) || faces_(f, 0) == faces_(f, 2))
                throw DataError("face " + std::to_string(f) + " repeats a vertex index");
        }
    }

    const Eigen::MatrixX3d& vertices() const noexcept { return vertices_; }
    const Eigen::MatrixX3i& faces() const noexcept { return faces_; }
    Index n_vertices() const noexcept { return vertices_.rows(); }
    Index n_faces() const noexcept { return faces_.rows(); }

    Eigen::Vector3d vertex(Index i) const { return vertices_.row(i).transpose(); }

    double face_area(Index f) const {
        const Eigen::Vector3d a = vertex(faces_(f, 0));
        const Eigen::Vector3d b = vertex(faces_(f, 1));
        const Eigen::Vector3d c = vertex(faces_(f, 2));
        return 0.5 * (b - a).cross(c - a).norm();
    }

    Eigen::VectorXd face_areas() const {
        Eigen::VectorXd areas(n_faces());
        for (Index f = 0; f < n_faces(); ++f) areas[f] = face_area(f);
        return areas;
    }

    double total_area() const { return n_faces() == 0 ? 0.0 : face_areas().sum(); }

    /// Throws if any face has area <= 1e-14 of the mean face area.
    void check_nondegenerate() const {
        if (n_faces() == 0) throw DataError("mesh has no faces");
        const Eigen::VectorXd areas = face_areas();
        const double threshold = 1e-14 * areas.mean();
        for (Index f = 0; f < n_faces(); ++f)
            if (!(areas[f] > threshold)) throw DataError("face " + std::to_string(f) + " is degenerate (zero area)");
    }

    /// Returns a copy with coordinates mapped through x -> R x + t.
    TriangleMesh transformed(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation) const {
        Eigen::MatrixX3d moved = (vertices_ * rotation.transpose()).rowwise() + translation.transpose();
        return TriangleMesh(std::move(moved), faces_);
    }

    TriangleMesh scaled(double factor) const { return TriangleMesh(vertices_ * factor, faces_); }

private:
    Eigen::MatrixX3d vertices_;
    Eigen::MatrixX3i faces_;
};

/// Rescales coordinates by 1/sqrt(area) so the result has unit total area.
/// Returns the mesh and the pre-normalization area.
inline std::pair<TriangleMesh, double> normalize_unit_area(const TriangleMesh& mesh) {
    const double area = mesh.total_area();
    if (!(area > 0.0) || !std::isfinite(area)) throw DataError("cannot normalize a mesh with zero total area");
    if (area == 1.0) return {mesh, area};
    return {mesh.scaled(1.0 / std::sqrt(area)), area};
}

// ---------------------------------------------------------------------------
// OFF / OBJ input and output

enum class MeshFormat { off, obj };

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

/// Reads lines while tracking the 1-based line number; strips '#' comments
/// and skips blank lines.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& out) {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_;
            if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            const auto content = trim(raw);
            if (!content.empty()) {
                out.assign(content);
                return true;
            }
        }
        return false;
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> tokens;
    std::istringstream ss(s);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    return tokens;
}

template <typename T>
T parse_number(const std::string& tok, std::size_t line, const char* what) {
    T value{};
    std::istringstream ss(tok);
    ss >> value;
    if (ss.fail() || !ss.eof()) throw ParseError(line, std::string("invalid ") + what + " '" + tok + "'");
    return value;
}

inline TriangleMesh read_off(std::istream& in) {
    LineReader reader(in);
    std::string line;
    if (!reader.next(line)) throw ParseError(reader.line() == 0 ? 1 : reader.line(), "empty OFF file");
    auto tokens = split_ws(line);
    if (tokens.empty() || tokens[0] != "OFF") throw ParseError(reader.line(), "expected 'OFF' header");

    std::vector<std::string> counts(tokens.begin() + 1, tokens.end());
    std::size_t counts_line = reader.line();
    if (counts.empty()) {
        if (!reader.next(line)) throw ParseError(reader.line() + 1, "missing vertex/face/edge counts");
        counts = split_ws(line);
        counts_line = reader.line();
    }
    if (counts.size() != 3)
        throw ParseError(counts_line, "expected 3 counts (vertices faces edges), found " + std::to_string(counts.size()));
    const long nv = parse_number<long>(counts[0], counts_line, "vertex count");
    const long nf = parse_number<long>(counts[1], counts_line, "face count");
    parse_number<long>(counts[2], counts_line, "edge count");
    if (nv < 0 || nf < 0) throw ParseError(counts_line, "negative element count");

    Eigen::MatrixX3d vertices(nv, 3);
    for (long i = 0; i < nv; ++i) {
        if (!reader.next(line)) throw ParseError(reader.line() + 1, "unexpected end of file in vertex list");
        const auto tok = split_ws(line);
        if (tok.size() < 3) throw ParseError(reader.line(), "vertex record needs 3 coordinates");
        for (int c = 0; c < 3; ++c) vertices(i, c) = parse_number<double>(tok[c], reader.line(), "coordinate");
    }

    Eigen::MatrixX3i faces(nf, 3);
    for (long f = 0; f < nf; ++f) {
        if (!reader.next(line)) throw ParseError(reader.line() + 1, "unexpected end of file in face list");
        const auto tok = split_ws(line);
        if (tok.empty()) throw ParseError(reader.line(), "empty face record");
        const long arity = parse_number<long>(tok[0], reader.line(), "face arity");
        if (arity != 3) throw ParseError(reader.line(), "non-triangle face with " + std::to_string(arity) + " vertices");
        if (tok.size() < 4) throw ParseError(reader.line(), "face record needs 3 indices");
        for (int c = 0; c < 3; ++c) {
            const long v = parse_number<long>(tok[c + 1], reader.line(), "vertex index");
            if (v < 0 || v >= nv)
                throw ParseError(reader.line(), "vertex index " + std::to_string(v) + " out of range");
            faces(f, c) = static_cast<int>(v);
        }
        if (faces(f, 0) == faces(f, 1) || faces(f, 1) == faces(f, 2) || faces(f, 0) == faces(f, 2))
            throw ParseError(reader.line(), "degenerate face repeats a vertex index");
    }
    return TriangleMesh(std::move(vertices), std::move(faces));
}

inline TriangleMesh read_obj(std::istream& in) {
    LineReader reader(in);
    std::string line;
    std::vector<Eigen::Vector3d> verts;
    std::vector<Eigen::Vector3i> faces;
    // Face records are resolved after reading so forward references are allowed.
    std::vector<std::pair<std::array<long, 3>, std::size_t>> pending;
    while (reader.next(line)) {
        const auto tok = split_ws(line);
        if (tok[0] == "v") {
            if (tok.size() < 4) throw ParseError(reader.line(), "vertex record needs 3 coordinates");
            Eigen::Vector3d p;
            for (int c = 0; c < 3; ++c) p[c] = parse_number<double>(tok[c + 1], reader.line(), "coordinate");
            verts.push_back(p);
        } else if (tok[0] == "f") {
            if (tok.size() != 4)
                throw ParseError(reader.line(),
                                 "non-triangle face with " + std::to_string(tok.size() - 1) + " vertices");
            std::array<long, 3> idx{};
            for (int c = 0; c < 3; ++c) {
                const std::string& t = tok[c + 1];
                const std::string head = t.substr(0, t.find('/'));
                long v = parse_number<long>(head, reader.line(), "vertex index");
                if (v == 0) throw ParseError(reader.line(), "OBJ vertex indices are 1-based");
                // Negative indices are relative to the vertices read so far.
                v = v > 0 ? v - 1 : static_cast<long>(verts.size()) + v;
                if (v < 0) throw ParseError(reader.line(), "relative vertex index out of range");
                idx[c] = v;
            }
            pending.emplace_back(idx, reader.line());
        }
        // vn, vt, usemtl, mtllib, o, g, s and friends are ignored.
    }
    const long nv = static_cast<long>(verts.size());
    Eigen::MatrixX3d vertices(nv, 3);
    for (long i = 0; i < nv; ++i) vertices.row(i) = verts[i].transpose();
    Eigen::MatrixX3i f(static_cast<Index>(pending.size()), 3);
    for (std::size_t k = 0; k < pending.size(); ++k) {
        const auto& [idx, ln] = pending[k];
        for (int c = 0; c < 3; ++c) {
            if (idx[c] >= nv) throw ParseError(ln, "vertex index " + std::to_string(idx[c] + 1) + " out of range");
            f(static_cast<Index>(k), c) = static_cast<int>(idx[c]);
        }
        if (idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2])
            throw ParseError(ln, "degenerate face repeats a vertex index");
    }
    return TriangleMesh(std::move(vertices), std::move(f));
}

}  // namespace detail

/// Parses an ASCII OFF or OBJ stream. Only triangle faces are accepted; vertex
/// and face order is preserved. Faces with (numerically) zero area are rejected.
inline TriangleMesh load_mesh(std::istream& in, MeshFormat format) {
    TriangleMesh mesh = format == MeshFormat::off ? detail::read_off(in) : detail::read_obj(in);
    mesh.check_nondegenerate();
    return mesh;
}

inline MeshFormat format_from_path(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (ext == ".off") return MeshFormat::off;
    if (ext == ".obj") return MeshFormat::obj;
    throw UsageError("unrecognized mesh extension '" + ext + "' (expected .off or .obj)");
}

inline TriangleMesh load_mesh(const std::filesystem::path& path) {
    const MeshFormat format = format_from_path(path);
    std::ifstream in(path);
    if (!in) throw DataError("cannot open mesh file " + path.string());
    try {
        return load_mesh(in, format);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.message(), path.string());
    }
}

inline void write_mesh(std::ostream& out, const TriangleMesh& mesh, MeshFormat format) {
    out << std::setprecision(17);
    const auto& V = mesh.vertices();
    const auto& F = mesh.faces();
    if (format == MeshFormat::off) {
        out << "OFF\n" << mesh.n_vertices() << ' ' << mesh.n_faces() << " 0\n";
        for (Index i = 0; i < V.rows(); ++i) out << V(i, 0) << ' ' << V(i, 1) << ' ' << V(i, 2) << '\n';
        for (Index f = 0; f < F.rows(); ++f) out << "3 " << F(f, 0) << ' ' << F(f, 1) << ' ' << F(f, 2) << '\n';
    } else {
        for (Index i = 0; i < V.rows(); ++i) out << "v " << V(i, 0) << ' ' << V(i, 1) << ' ' << V(i, 2) << '\n';
        for (Index f = 0; f < F.rows(); ++f)
            out << "f " << F(f, 0) + 1 << ' ' << F(f, 1) + 1 << ' ' << F(f, 2) + 1 << '\n';
    }
}

inline void save_mesh(const std::filesystem::path& path, const TriangleMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write mesh file " + path.string());
    write_mesh(out, mesh, format_from_path(path));
}

}  // namespace diffwave
