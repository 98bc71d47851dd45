#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "tdbem/mesh.hpp"

using namespace tdbem;
namespace fs = std::filesystem;

namespace {

fs::path scratchFile(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("tdbem_test_" + name);
    std::ofstream(p) << text;
    return p;
}

const char* kTetMsh = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 0 1 0
4 0 0 1
$EndNodes
$Elements
6
1 15 2 0 1 1
2 1 2 0 1 1 2
3 2 2 0 1 1 3 2
4 2 2 0 1 1 2 4
5 2 2 0 1 2 3 4
6 2 2 0 1 1 4 3
$EndElements
)";

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("geodesic sphere has 20 f^2 outward elements and the right area") {
    for (int f : {1, 3, 8}) {
        const TriMesh m = makeIcosphere(f, 0.5, Vec3(0.5, 0, 0));
        CHECK(m.size() == static_cast<std::size_t>(20 * f * f));
        CHECK_NOTHROW(checkOrientation(m));
        if (f == 8) CHECK(m.totalArea() == doctest::Approx(std::numbers::pi).epsilon(0.02));
    }
    CHECK(icosphereFrequencyFor(2880) == 12);
    CHECK(icosphereFrequencyFor(1280) == 8);
    CHECK(icosphereFrequencyFor(11520) == 24);
}

TEST_CASE("gmsh reader skips points and lines and keeps orientation") {
    const TriMesh m = loadMesh(scratchFile("tet.msh", kTetMsh));
    CHECK(m.size() == 4);
    CHECK_NOTHROW(checkOrientation(m));
    CHECK(m.signedVolume() == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("obj round trip preserves geometry") {
    const TriMesh m = makeIcosphere(2, 1.0, Vec3::Zero());
    const fs::path p = fs::temp_directory_path() / "tdbem_test_round.obj";
    writeObj(m, p);
    const TriMesh back = loadMesh(p);
    REQUIRE(back.size() == m.size());
    for (std::size_t i = 0; i < m.size(); ++i) CHECK((back.centroid(i) - m.centroid(i)).norm() < 1e-12);
}

TEST_CASE("malformed inputs are reported with context") {
    CHECK_THROWS_WITH_AS(loadMesh(scratchFile("bad.msh", "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n")), doctest::Contains("version 2"),
                         std::runtime_error);
    CHECK_THROWS(loadMesh(scratchFile("quad.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")));
    CHECK_THROWS(loadMesh(scratchFile("x.stl", "solid")));
    CHECK_THROWS(TriMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}, {{0, 1, 2}}));
}

TEST_CASE("open or inverted surfaces fail the orientation check") {
    const TriMesh sphere = makeIcosphere(2, 1.0, Vec3::Zero());
    auto tris = sphere.triangles();
    for (auto& t : tris) std::swap(t[1], t[2]);
    CHECK_THROWS(checkOrientation(TriMesh(sphere.vertices(), tris)));
    tris.pop_back();
    CHECK_THROWS(checkOrientation(TriMesh(sphere.vertices(), tris)));
}

TEST_CASE("hollow box is a closed outward solid of the expected size") {
    HollowBoxParams p;
    p.meshSize = 0.1;
    const TriMesh box = makeHollowBox(p);
    CHECK_NOTHROW(checkOrientation(box));
    const MeshStats st = meshStats(box);
    CHECK(st.maxDiameter == doctest::Approx(std::sqrt(1.0 + 0.25 + 1.0)).epsilon(1e-9));
    CHECK(st.maxEdge <= std::sqrt(2.0) * 0.1 + 1e-9);
    // solid volume: the walls and the partition, minus the aperture through the top wall
    const double outer = p.width * p.depth * p.height;
    const double cavity = (p.width - 2 * p.thickness) * (p.depth - 2 * p.thickness) * (p.height - 2 * p.thickness);
    const double partition = p.thickness * (p.depth - 2 * p.thickness) * p.partitionLength;
    const double hole = p.apertureWidth * p.apertureDepth * p.thickness;
    CHECK(box.signedVolume() == doctest::Approx(outer - cavity + partition - hole).epsilon(1e-9));
}

}
