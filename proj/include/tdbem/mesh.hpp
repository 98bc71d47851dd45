#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "tdbem/kernels.hpp"

namespace tdbem {

enum class MeshFormat { GmshMsh, Obj };

MeshFormat meshFormatFromPath(const std::filesystem::path& path);

// Flat-triangle surface. Normals follow the vertex winding (right-hand rule).
class TriMesh {
public:
    TriMesh() = default;
    TriMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles, double degeneracyTol = 1e-12);

    std::size_t size() const { return triangles_.size(); }
    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }

    const Vec3& vertex(int tri, int corner) const { return vertices_[static_cast<std::size_t>(triangles_[static_cast<std::size_t>(tri)][static_cast<std::size_t>(corner)])]; }
    const Vec3& normal(std::size_t i) const { return normals_[i]; }
    const Vec3& centroid(std::size_t i) const { return centroids_[i]; }
    double area(std::size_t i) const { return areas_[i]; }
    double totalArea() const;

    // Largest distance from the centroid to a vertex of the triangle.
    double radius(std::size_t i) const;

    // Sum of area-weighted normals; vanishes for a closed surface.
    Vec3 areaNormalSum() const;
    // Enclosed volume from the divergence theorem; positive when normals point outward.
    double signedVolume() const;

private:
    std::vector<Vec3> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<Vec3> normals_;
    std::vector<Vec3> centroids_;
    std::vector<double> areas_;
};

struct MeshStats {
    double maxDiameter = 0.0;
    double minEdge = 0.0;
    double maxEdge = 0.0;
};

TriMesh loadMesh(const std::filesystem::path& path, MeshFormat format);
TriMesh loadMesh(const std::filesystem::path& path);
void writeObj(const TriMesh& mesh, const std::filesystem::path& path);

MeshStats meshStats(const TriMesh& mesh);

// Throws unless the surface is closed and outward oriented.
void checkOrientation(const TriMesh& mesh, double tol = 1e-9);

// Geodesic sphere: each icosahedron face split into frequency^2 triangles.
TriMesh makeIcosphere(int frequency, double radius, const Vec3& centre);

// Smallest geodesic frequency giving at least the requested element count.
int icosphereFrequencyFor(std::size_t elements);

struct HollowBoxParams {
    double width = 1.0;         // x
    double depth = 0.5;         // y
    double height = 1.0;        // z
    double apertureWidth = 0.1;
    double apertureDepth = 0.2;
    double apertureX = 0.25;    // aperture centre from the -x wall
    double apertureY = 0.25;    // aperture centre from the -y wall
    double partitionLength = 0.5;  // hangs from the ceiling
    double partitionX = 0.5;       // partition position from the -x wall
    double thickness = 0.02;
    double meshSize = 0.04;
};

// Walls and partition as a solid; the surface is closed and outward oriented.
TriMesh makeHollowBox(const HollowBoxParams& params);

}  // namespace tdbem
