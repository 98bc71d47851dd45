#include "tdbem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace tdbem {

namespace {

std::runtime_error meshError(const std::filesystem::path& path, const std::string& what) {
    return std::runtime_error(path.string() + ": " + what);
}

}  // namespace

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles, double degeneracyTol)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    if (vertices_.empty() || triangles_.empty()) throw std::invalid_argument("mesh has no triangles");
    Vec3 lo = vertices_.front(), hi = vertices_.front();
    for (const auto& v : vertices_) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const double diag2 = (hi - lo).squaredNorm();
    const double minArea = degeneracyTol * diag2;

    const auto n = triangles_.size();
    normals_.resize(n);
    centroids_.resize(n);
    areas_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k : triangles_[i])
            if (k < 0 || static_cast<std::size_t>(k) >= vertices_.size())
                throw std::invalid_argument("element " + std::to_string(i) + " references missing vertex " + std::to_string(k));
        const Vec3& a = vertices_[static_cast<std::size_t>(triangles_[i][0])];
        const Vec3& b = vertices_[static_cast<std::size_t>(triangles_[i][1])];
        const Vec3& c = vertices_[static_cast<std::size_t>(triangles_[i][2])];
        const Vec3 cr = (b - a).cross(c - a);
        const double twice = cr.norm();
        if (!(0.5 * twice > minArea)) throw std::invalid_argument("degenerate triangle at element " + std::to_string(i));
        normals_[i] = cr / twice;
        areas_[i] = 0.5 * twice;
        centroids_[i] = (a + b + c) / 3.0;
    }
}

double TriMesh::totalArea() const {
    double s = 0.0;
    for (double a : areas_) s += a;
    return s;
}

double TriMesh::radius(std::size_t i) const {
    double r = 0.0;
    for (int k : triangles_[i]) r = std::max(r, (vertices_[static_cast<std::size_t>(k)] - centroids_[i]).norm());
    return r;
}

Vec3 TriMesh::areaNormalSum() const {
    Vec3 s = Vec3::Zero();
    for (std::size_t i = 0; i < size(); ++i) s += areas_[i] * normals_[i];
    return s;
}

double TriMesh::signedVolume() const {
    double v = 0.0;
    for (std::size_t i = 0; i < size(); ++i) v += areas_[i] * normals_[i].dot(centroids_[i]);
    return v / 3.0;
}

MeshFormat meshFormatFromPath(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (ext == ".msh") return MeshFormat::GmshMsh;
    if (ext == ".obj") return MeshFormat::Obj;
    throw std::invalid_argument("cannot infer mesh format from extension of " + path.string());
}

namespace {

TriMesh readMsh(std::istream& in, const std::filesystem::path& path) {
    std::string line;
    std::unordered_map<long, int> nodeIndex;
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> tris;
    bool sawNodes = false, sawElements = false;
    while (std::getline(in, line)) {
        if (line.rfind("$MeshFormat", 0) == 0) {
            std::getline(in, line);
            std::istringstream ls(line);
            double version = 0;
            int fileType = -1;
            ls >> version >> fileType;
            if (version < 2.0 || version >= 3.0) throw meshError(path, "only MSH version 2 is supported");
            if (fileType != 0) throw meshError(path, "only ASCII MSH is supported");
        } else if (line.rfind("$Nodes", 0) == 0) {
            long count = 0;
            if (!(in >> count) || count <= 0) throw meshError(path, "bad $Nodes header");
            vertices.reserve(static_cast<std::size_t>(count));
            for (long k = 0; k < count; ++k) {
                long id;
                double x, y, z;
                if (!(in >> id >> x >> y >> z)) throw meshError(path, "truncated $Nodes section");
                nodeIndex[id] = static_cast<int>(vertices.size());
                vertices.emplace_back(x, y, z);
            }
            sawNodes = true;
        } else if (line.rfind("$Elements", 0) == 0) {
            long count = 0;
            if (!(in >> count) || count < 0) throw meshError(path, "bad $Elements header");
            std::getline(in, line);
            for (long k = 0; k < count; ++k) {
                if (!std::getline(in, line)) throw meshError(path, "truncated $Elements section");
                std::istringstream ls(line);
                long id;
                int type, ntags;
                if (!(ls >> id >> type >> ntags)) throw meshError(path, "bad element line: " + line);
                for (int t = 0; t < ntags; ++t) {
                    long tag;
                    ls >> tag;
                }
                // Points and lines are geometry bookkeeping; any other non-triangle is rejected.
                if (type == 15 || type == 1 || type == 8) continue;
                if (type != 2)
                    throw meshError(path, "non-triangle element " + std::to_string(id) + " (type " + std::to_string(type) + ")");
                std::array<int, 3> tri{};
                for (auto& v : tri) {
                    long nid;
                    if (!(ls >> nid)) throw meshError(path, "bad triangle " + std::to_string(id));
                    const auto it = nodeIndex.find(nid);
                    if (it == nodeIndex.end()) throw meshError(path, "triangle " + std::to_string(id) + " references unknown node");
                    v = it->second;
                }
                tris.push_back(tri);
            }
            sawElements = true;
        }
    }
    if (!sawNodes || !sawElements) throw meshError(path, "missing $Nodes or $Elements section");
    return TriMesh(std::move(vertices), std::move(tris));
}

TriMesh readObj(std::istream& in, const std::filesystem::path& path) {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> tris;
    std::string line;
    long lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) throw meshError(path, "bad vertex on line " + std::to_string(lineNo));
            vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                const long v = std::stol(tok.substr(0, tok.find('/')));
                const long resolved = v < 0 ? static_cast<long>(vertices.size()) + v : v - 1;
                idx.push_back(static_cast<int>(resolved));
            }
            if (idx.size() != 3)
                throw meshError(path, "non-triangle element " + std::to_string(tris.size()) + " on line " + std::to_string(lineNo));
            tris.push_back({idx[0], idx[1], idx[2]});
        }
    }
    return TriMesh(std::move(vertices), std::move(tris));
}

}  // namespace

TriMesh loadMesh(const std::filesystem::path& path, MeshFormat format) {
    std::ifstream in(path);
    if (!in) throw meshError(path, "cannot open mesh file");
    try {
        return format == MeshFormat::GmshMsh ? readMsh(in, path) : readObj(in, path);
    } catch (const std::invalid_argument& e) {
        throw meshError(path, e.what());
    }
}

TriMesh loadMesh(const std::filesystem::path& path) { return loadMesh(path, meshFormatFromPath(path)); }

void writeObj(const TriMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw meshError(path, "cannot write mesh file");
    out.precision(17);
    for (const auto& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& t : mesh.triangles()) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

MeshStats meshStats(const TriMesh& mesh) {
    MeshStats s;
    const auto& vs = mesh.vertices();
    double d2 = 0.0;
    for (std::size_t a = 0; a < vs.size(); ++a)
        for (std::size_t b = a + 1; b < vs.size(); ++b) d2 = std::max(d2, (vs[a] - vs[b]).squaredNorm());
    s.maxDiameter = std::sqrt(d2);
    s.minEdge = INFINITY;
    for (const auto& t : mesh.triangles())
        for (int k = 0; k < 3; ++k) {
            const double e = (vs[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])] - vs[static_cast<std::size_t>(t[static_cast<std::size_t>((k + 1) % 3)])]).norm();
            s.minEdge = std::min(s.minEdge, e);
            s.maxEdge = std::max(s.maxEdge, e);
        }
    return s;
}

void checkOrientation(const TriMesh& mesh, double tol) {
    std::map<std::pair<int, int>, int> directed;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        const auto& t = mesh.triangles()[i];
        for (int k = 0; k < 3; ++k) {
            const auto key = std::make_pair(t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>((k + 1) % 3)]);
            if (++directed[key] > 1)
                throw std::runtime_error("inconsistent winding: edge used twice in the same direction near element " + std::to_string(i));
        }
    }
    for (const auto& [edge, count] : directed)
        if (!directed.count({edge.second, edge.first}))
            throw std::runtime_error("surface is not closed: boundary edge " + std::to_string(edge.first) + "-" + std::to_string(edge.second));
    const double area = mesh.totalArea();
    if (mesh.areaNormalSum().norm() > tol * area) throw std::runtime_error("area-weighted normals do not cancel");
    if (!(mesh.signedVolume() > 0.0)) throw std::runtime_error("normals point inward (negative enclosed volume)");
}

namespace {

struct QuantKey {
    long long x, y, z;
    bool operator<(const QuantKey& o) const { return std::tie(x, y, z) < std::tie(o.x, o.y, o.z); }
};

class VertexPool {
public:
    explicit VertexPool(double quantum) : q_(quantum) {}
    int add(const Vec3& p) {
        const QuantKey key{std::llround(p.x() / q_), std::llround(p.y() / q_), std::llround(p.z() / q_)};
        const auto [it, inserted] = index_.try_emplace(key, static_cast<int>(points_.size()));
        if (inserted) points_.push_back(p);
        return it->second;
    }
    std::vector<Vec3> take() { return std::move(points_); }

private:
    double q_;
    std::map<QuantKey, int> index_;
    std::vector<Vec3> points_;
};

}  // namespace

TriMesh makeIcosphere(int frequency, double radius, const Vec3& centre) {
    if (frequency < 1) throw std::invalid_argument("icosphere frequency must be >= 1");
    if (!(radius > 0.0)) throw std::invalid_argument("icosphere radius must be positive");
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    const std::array<Vec3, 12> ico = {Vec3(-1, phi, 0), Vec3(1, phi, 0),  Vec3(-1, -phi, 0), Vec3(1, -phi, 0),
                                      Vec3(0, -1, phi), Vec3(0, 1, phi),  Vec3(0, -1, -phi), Vec3(0, 1, -phi),
                                      Vec3(phi, 0, -1), Vec3(phi, 0, 1),  Vec3(-phi, 0, -1), Vec3(-phi, 0, 1)};
    const int faces[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
                              {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
                              {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    VertexPool pool(1e-9 * radius);
    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<std::size_t>(20 * frequency * frequency));
    const int k = frequency;
    for (const auto& f : faces) {
        const Vec3 a = ico[static_cast<std::size_t>(f[0])].normalized();
        const Vec3 b = ico[static_cast<std::size_t>(f[1])].normalized();
        const Vec3 c = ico[static_cast<std::size_t>(f[2])].normalized();
        auto node = [&](int i, int j) {
            // Barycentric lattice point (i along ab, j along ac), projected to the sphere.
            const Vec3 p = a + (b - a) * (static_cast<double>(i) / k) + (c - a) * (static_cast<double>(j) / k);
            return pool.add(centre + radius * p.normalized());
        };
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k - i; ++j) {
                tris.push_back({node(i, j), node(i + 1, j), node(i, j + 1)});
                if (j < k - i - 1) tris.push_back({node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)});
            }
    }
    auto verts = pool.take();
    for (auto& t : tris) {
        const Vec3 n = (verts[static_cast<std::size_t>(t[1])] - verts[static_cast<std::size_t>(t[0])])
                           .cross(verts[static_cast<std::size_t>(t[2])] - verts[static_cast<std::size_t>(t[0])]);
        if (n.dot(verts[static_cast<std::size_t>(t[0])] - centre) < 0.0) std::swap(t[1], t[2]);
    }
    return TriMesh(std::move(verts), std::move(tris));
}

int icosphereFrequencyFor(std::size_t elements) {
    int k = 1;
    while (static_cast<std::size_t>(20 * k * k) < elements) ++k;
    return k;
}

TriMesh makeHollowBox(const HollowBoxParams& p) {
    const double T = p.thickness;
    if (!(T > 0.0 && p.meshSize > 0.0)) throw std::invalid_argument("hollow box thickness and mesh size must be positive");
    if (p.partitionLength > p.height - 2 * T) throw std::invalid_argument("partition longer than the cavity");
    const double ax0 = p.apertureX - 0.5 * p.apertureWidth, ax1 = p.apertureX + 0.5 * p.apertureWidth;
    const double ay0 = p.apertureY - 0.5 * p.apertureDepth, ay1 = p.apertureY + 0.5 * p.apertureDepth;
    const double px0 = p.partitionX - 0.5 * T, px1 = p.partitionX + 0.5 * T;
    const double pz0 = p.height - T - p.partitionLength;

    // Rectilinear grid through every feature plane, each gap refined to the mesh size.
    auto axis = [&](std::vector<double> planes) {
        std::sort(planes.begin(), planes.end());
        planes.erase(std::unique(planes.begin(), planes.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), planes.end());
        std::vector<double> fine{planes.front()};
        for (std::size_t i = 1; i < planes.size(); ++i) {
            const double len = planes[i] - planes[i - 1];
            const int n = std::max(1, static_cast<int>(std::ceil(len / p.meshSize - 1e-9)));
            for (int k = 1; k <= n; ++k) fine.push_back(planes[i - 1] + len * k / n);
        }
        return fine;
    };
    const auto xs = axis({0.0, T, ax0, ax1, px0, px1, p.width - T, p.width});
    const auto ys = axis({0.0, T, ay0, ay1, p.depth - T, p.depth});
    const auto zs = axis({0.0, T, pz0, p.height - T, p.height});
    const int nx = static_cast<int>(xs.size()) - 1, ny = static_cast<int>(ys.size()) - 1, nz = static_cast<int>(zs.size()) - 1;

    auto solid = [&](int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= nx || j >= ny || k >= nz) return false;
        const double x = 0.5 * (xs[static_cast<std::size_t>(i)] + xs[static_cast<std::size_t>(i + 1)]);
        const double y = 0.5 * (ys[static_cast<std::size_t>(j)] + ys[static_cast<std::size_t>(j + 1)]);
        const double z = 0.5 * (zs[static_cast<std::size_t>(k)] + zs[static_cast<std::size_t>(k + 1)]);
        const bool inner = x > T && x < p.width - T && y > T && y < p.depth - T && z > T && z < p.height - T;
        const bool aperture = x > ax0 && x < ax1 && y > ay0 && y < ay1 && z > p.height - T;
        const bool partition = x > px0 && x < px1 && z > pz0 && inner;
        return (!inner && !aperture) || partition;
    };

    VertexPool pool(1e-9 * std::max({p.width, p.depth, p.height}));
    std::vector<std::array<int, 3>> tris;
    auto corner = [&](int i, int j, int k) {
        return pool.add(Vec3(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)], zs[static_cast<std::size_t>(k)]));
    };
    // Quad (a, b, c, d) counter-clockwise seen from the empty side.
    auto quad = [&](int a, int b, int c, int d) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
    };
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                const bool lo = solid(i - 1, j, k), hi = solid(i, j, k);
                if (lo == hi) continue;
                if (lo) quad(corner(i, j, k), corner(i, j + 1, k), corner(i, j + 1, k + 1), corner(i, j, k + 1));
                else quad(corner(i, j, k), corner(i, j, k + 1), corner(i, j + 1, k + 1), corner(i, j + 1, k));
            }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j <= ny; ++j)
            for (int k = 0; k < nz; ++k) {
                const bool lo = solid(i, j - 1, k), hi = solid(i, j, k);
                if (lo == hi) continue;
                if (lo) quad(corner(i, j, k), corner(i, j, k + 1), corner(i + 1, j, k + 1), corner(i + 1, j, k));
                else quad(corner(i, j, k), corner(i + 1, j, k), corner(i + 1, j, k + 1), corner(i, j, k + 1));
            }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k <= nz; ++k) {
                const bool lo = solid(i, j, k - 1), hi = solid(i, j, k);
                if (lo == hi) continue;
                if (lo) quad(corner(i, j, k), corner(i + 1, j, k), corner(i + 1, j + 1, k), corner(i, j + 1, k));
                else quad(corner(i, j, k), corner(i, j + 1, k), corner(i + 1, j + 1, k), corner(i + 1, j, k));
            }
    return TriMesh(pool.take(), std::move(tris));
}

}  // namespace tdbem
