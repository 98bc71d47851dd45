#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "tdbem/elemint.hpp"
#include "tdbem/m2l.hpp"
#include "tdbem/runner.hpp"
#include "tdbem/tbasis.hpp"

namespace py = pybind11;
using namespace tdbem;

namespace {

Eigen::MatrixXd vertexArray(const TriMesh& m) {
    Eigen::MatrixXd v(static_cast<Eigen::Index>(m.vertices().size()), 3);
    for (std::size_t i = 0; i < m.vertices().size(); ++i) v.row(static_cast<Eigen::Index>(i)) = m.vertices()[i].transpose();
    return v;
}

Eigen::MatrixXi triangleArray(const TriMesh& m) {
    Eigen::MatrixXi t(static_cast<Eigen::Index>(m.size()), 3);
    for (std::size_t i = 0; i < m.size(); ++i)
        for (int k = 0; k < 3; ++k) t(static_cast<Eigen::Index>(i), k) = m.triangles()[i][static_cast<std::size_t>(k)];
    return t;
}

py::dict reportDict(const RunReport& r) {
    py::dict d;
    d["status"] = r.status;
    d["rel_error"] = r.relError ? py::cast(*r.relError) : py::none();
    d["reference_note"] = r.referenceNote;
    d["wall_time"] = r.wallTime;
    d["peak_memory"] = r.peakMemory;
    d["elements"] = r.elements;
    d["steps"] = r.steps;
    d["solved_steps"] = r.solvedSteps;
    d["surface_mean_square"] = r.surfaceMeanSquare;
    py::dict phases;
    phases["assembly"] = r.phases.assembly;
    phases["p2m"] = r.phases.p2m;
    phases["m2m"] = r.phases.m2m;
    phases["m2l_near"] = r.phases.m2lNear;
    phases["m2l_distant"] = r.phases.m2lDistant;
    phases["l2l"] = r.phases.l2l;
    phases["l2p"] = r.phases.l2p;
    phases["near_field"] = r.phases.nearField;
    phases["solve"] = r.phases.solve;
    d["phases"] = phases;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Time-domain boundary element solver for the 3D wave equation";

    m.def("weights", &weights, py::arg("d"));
    m.def("eval_basis", [](int d, double dt, int beta, double t) { return evalBasis(BSplineBasis(d, dt), beta, t); }, py::arg("d"),
          py::arg("dt"), py::arg("beta"), py::arg("t"));
    m.def("recurrence_coeff", &recurrenceCoeff, py::arg("p"), py::arg("m"), py::arg("k"));
    m.def(
        "single_layer_coeff",
        [](const Vec3& xi, const Eigen::Matrix3d& tri, int gamma, int d, double dt, double c) {
            return singleLayerCoeff(xi, Triangle{tri.row(0), tri.row(1), tri.row(2)}, gamma, BSplineBasis(d, dt), c);
        },
        py::arg("xi"), py::arg("triangle"), py::arg("gamma"), py::arg("d"), py::arg("dt"), py::arg("c") = 1.0);

    py::class_<TriMesh>(m, "Mesh")
        .def_property_readonly("vertices", &vertexArray)
        .def_property_readonly("triangles", &triangleArray)
        .def("__len__", &TriMesh::size)
        .def("centroid", &TriMesh::centroid, py::arg("i"))
        .def("normal", &TriMesh::normal, py::arg("i"))
        .def("area", &TriMesh::area, py::arg("i"))
        .def_property_readonly("total_area", &TriMesh::totalArea)
        .def_property_readonly("volume", &TriMesh::signedVolume);
    m.def("icosphere", &makeIcosphere, py::arg("frequency"), py::arg("radius") = 0.5, py::arg("centre") = Vec3(0.5, 0.0, 0.0));
    m.def("load_mesh", py::overload_cast<const std::filesystem::path&>(&loadMesh), py::arg("path"));

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def("set", &setConfigValue, py::arg("key"), py::arg("value"))
        .def("validate", &RunConfig::validate)
        .def("to_text", &serializeConfig)
        .def_static("from_text",
                    [](const std::string& text) {
                        std::istringstream in(text);
                        return parseConfig(in, "<string>");
                    },
                    py::arg("text"))
        .def_static("load", &loadConfig, py::arg("path"))
        .def_static("keys", &configKeys)
        .def(py::self == py::self)
        .def("__repr__", [](const RunConfig& c) { return "RunConfig(\n" + serializeConfig(c) + ")"; });

    m.def(
        "run",
        [](const RunConfig& cfg, bool write) {
            RunResult r;
            {
                py::gil_scoped_release release;
                r = runScenario(cfg);
                if (write) writeOutputs(cfg, r);
            }
            py::dict d = reportDict(r.report);
            d["points"] = r.points;
            d["values"] = r.values;
            d["reference"] = r.reference;
            return d;
        },
        py::arg("config"), py::arg("write_outputs") = false);

    m.def(
        "sphere_reference",
        [](const std::string& bc, const std::vector<Vec3>& points, double dt, int nt) {
            SphereScenario s;
            if (bc == "neumann")
                s.bc = Boundary::Neumann;
            else if (bc == "dirichlet")
                s.bc = Boundary::Dirichlet;
            else
                throw py::value_error("boundary must be 'neumann' or 'dirichlet'");
            py::gil_scoped_release release;
            return referenceSolution(s, points, dt, nt);
        },
        py::arg("boundary"), py::arg("points"), py::arg("dt"), py::arg("nt"));
}
