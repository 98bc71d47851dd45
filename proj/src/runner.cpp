#include "tdbem/runner.hpp"

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace tdbem {

namespace {

using Clock = std::chrono::steady_clock;

constexpr const char* kSpherePrefix = "sphere:";

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// Total-field value of the unknown at element i and step alpha.
double totalUnknown(const ProblemSpec& spec, const TimeHistory& h, int i, int alpha) {
    const auto e = static_cast<std::size_t>(i);
    const Vec3& x = spec.mesh->centroid(e);
    const IncidentSample in = incident(x, alpha * spec.basis.dt, spec.incident);
    if (spec.boundary[e] == Boundary::Neumann) return h.valueAt(h.u, spec.basis, alpha, i) + in.value;
    return h.valueAt(h.q, spec.basis, alpha, i) + in.gradient.dot(spec.mesh->normal(e));
}

}  // namespace

std::size_t peakMemoryBytes() {
    rusage usage{};
    if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
    return static_cast<std::size_t>(usage.ru_maxrss) * 1024;  // Linux reports KiB
}

TriMesh buildMesh(const RunConfig& cfg) {
    if (cfg.mesh.rfind(kSpherePrefix, 0) == 0) {
        const std::string count = cfg.mesh.substr(std::string(kSpherePrefix).size());
        std::size_t n = 0;
        try {
            n = std::stoul(count);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad sphere element count in mesh '" + cfg.mesh + "'");
        }
        const SphereScenario s;
        return makeIcosphere(icosphereFrequencyFor(n), s.radius, s.centre);
    }
    if (cfg.mesh == "hollow-box") return makeHollowBox(HollowBoxParams{});
    try {
        return loadMesh(cfg.mesh);
    } catch (const std::exception& e) {
        throw std::runtime_error("loading mesh '" + cfg.mesh + "': " + e.what());
    }
}

std::optional<SphereScenario> sphereScenarioFor(const RunConfig& cfg) {
    if (cfg.mesh.rfind(kSpherePrefix, 0) != 0) return std::nullopt;
    SphereScenario s;
    s.bc = cfg.boundary;
    s.pulse = PlanePulse{cfg.c, cfg.pulseLength, cfg.amplitude};
    s.duration = cfg.nt * cfg.dt;
    return s;
}

ProblemSpec problemFor(const RunConfig& cfg, const TriMesh& mesh) {
    ProblemSpec spec;
    spec.mesh = &mesh;
    spec.boundary.assign(mesh.size(), cfg.boundary);
    spec.bie = cfg.bie;
    spec.basis = BSplineBasis(cfg.order, cfg.dt);
    spec.c = cfg.c;
    spec.nt = cfg.nt;
    spec.incident = PlanePulse{cfg.c, cfg.pulseLength, cfg.amplitude};
    spec.blowUpFactor = cfg.blowUp;
    spec.threads = cfg.threads;
    return spec;
}

std::vector<int> evaluationPoints(const RunConfig& cfg, const TriMesh& mesh) {
    if (cfg.points == "arc") {
        SphereScenario s;
        if (auto sphere = sphereScenarioFor(cfg)) s = *sphere;
        else {
            // arc through the mesh's bounding-box centre, radius half the largest extent
            Vec3 lo = mesh.vertices().front(), hi = lo;
            for (const Vec3& v : mesh.vertices()) {
                lo = lo.cwiseMin(v);
                hi = hi.cwiseMax(v);
            }
            s.centre = 0.5 * (lo + hi);
            s.radius = 0.5 * (hi - lo).maxCoeff();
        }
        return arcEvaluationPoints(mesh, s, cfg.arcSamples);
    }
    std::vector<int> ids;
    if (cfg.points == "all") {
        for (std::size_t i = 0; i < mesh.size(); ++i) ids.push_back(static_cast<int>(i));
        return ids;
    }
    std::stringstream ss(cfg.points);
    std::string item;
    while (std::getline(ss, item, ',')) {
        int id = -1;
        try {
            id = std::stoi(item);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad evaluation point '" + item + "'");
        }
        if (id < 0 || static_cast<std::size_t>(id) >= mesh.size()) throw std::invalid_argument("evaluation point out of range: " + item);
        ids.push_back(id);
    }
    if (ids.empty()) throw std::invalid_argument("no evaluation points");
    return ids;
}

RunResult runScenario(const RunConfig& cfg) {
    cfg.validate();
    const auto t0 = Clock::now();
    const TriMesh mesh = buildMesh(cfg);
    const ProblemSpec spec = problemFor(cfg, mesh);
    RunResult res;
    res.points = evaluationPoints(cfg, mesh);

    TimeHistory hist;
    PhaseTimes phases;
    if (cfg.algo == Algorithm::Conv) {
        const auto ta = Clock::now();
        const RetardedMatrixSet matrices = assembleRetarded(spec);
        Marcher marcher(spec, matrices);
        phases.assembly = since(ta);
        for (int alpha = 1; alpha < spec.nt; ++alpha)
            if (!marcher.advance(alpha)) break;
        phases.nearField = marcher.timings().rhs;
        phases.solve = marcher.timings().solve;
        hist = marcher.history();
    } else {
        FmmOptions opt;
        opt.ps = cfg.ps;
        opt.pt = cfg.pt;
        opt.leafCapacity = cfg.leafCapacity;
        opt.mu = cfg.mu;
        hist = fastMarch(spec, opt, {}, &phases);
    }

    RunReport& rep = res.report;
    rep.status = hist.unstable ? "unstable" : "stable";
    rep.elements = mesh.size();
    rep.steps = spec.nt;
    rep.solvedSteps = hist.solvedSteps;
    rep.phases = phases;

    // field values exist up to the last solved coefficient
    const int steps = hist.unstable ? std::min(spec.nt, hist.solvedSteps + 1) : spec.nt;
    const auto np = static_cast<Eigen::Index>(res.points.size());
    res.values.resize(steps, np);
    for (int a = 0; a < steps; ++a)
        for (Eigen::Index p = 0; p < np; ++p) res.values(a, p) = totalUnknown(spec, hist, res.points[static_cast<std::size_t>(p)], a);

    if (!hist.unstable) {
        double acc = 0.0;
        for (int a = 0; a < steps; ++a)
            for (std::size_t i = 0; i < mesh.size(); ++i) {
                const double v = totalUnknown(spec, hist, static_cast<int>(i), a);
                acc += mesh.area(i) * v * v;
            }
        rep.surfaceMeanSquare = acc / (mesh.totalArea() * steps);
    }

    const auto sphere = sphereScenarioFor(cfg);
    if (cfg.reference == ReferenceMode::Off) {
        rep.referenceNote = "disabled";
    } else if (!sphere) {
        if (cfg.reference == ReferenceMode::On) throw std::invalid_argument("reference solutions exist for the built-in sphere only");
        rep.referenceNote = "no reference for this mesh";
    } else {
        std::vector<Vec3> pts;
        for (int id : res.points) pts.push_back(mesh.centroid(static_cast<std::size_t>(id)));
        TransformOptions topt;
        topt.threads = cfg.threads;
        try {
            res.reference = referenceSolution(*sphere, pts, cfg.dt, cfg.nt, topt);
            if (hist.unstable)
                rep.referenceNote = "run unstable";
            else
                rep.relError = relL2Error(res.values, res.reference);
        } catch (const std::runtime_error& e) {
            rep.referenceNote = e.what();
        }
    }
    rep.wallTime = since(t0);
    rep.peakMemory = peakMemoryBytes();
    return res;
}

void writeProfiles(std::ostream& os, const RunConfig& cfg, const RunResult& result) {
    const bool withRef = result.reference.size() > 0;
    os << "t,point_id,value" << (withRef ? ",reference" : "") << '\n';
    for (Eigen::Index a = 0; a < result.values.rows(); ++a)
        for (Eigen::Index p = 0; p < result.values.cols(); ++p) {
            os << fmt(static_cast<double>(a) * cfg.dt) << ',' << result.points[static_cast<std::size_t>(p)] << ',' << fmt(result.values(a, p));
            if (withRef) os << ',' << fmt(result.reference(a, p));
            os << '\n';
        }
}

void writeOutputs(const RunConfig& cfg, const RunResult& result) {
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name);
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("profiles.csv");
        writeProfiles(f, cfg, result);
    }
    {
        auto f = open("report.txt");
        f << formatReport(result.report);
    }
    {
        auto f = open("config.txt");
        f << serializeConfig(cfg);
    }
}

std::string formatReport(const RunReport& r) {
    std::ostringstream os;
    os << "status = " << r.status << '\n';
    os << "rel_error = " << (r.relError ? fmt(*r.relError) : "none") << '\n';
    if (!r.referenceNote.empty()) os << "reference_note = " << r.referenceNote << '\n';
    os << "wall_time = " << fmt(r.wallTime) << '\n';
    os << "peak_memory = " << r.peakMemory << '\n';
    os << "elements = " << r.elements << '\n';
    os << "steps = " << r.steps << '\n';
    os << "solved_steps = " << r.solvedSteps << '\n';
    os << "surface_mean_square = " << fmt(r.surfaceMeanSquare) << '\n';
    const PhaseTimes& p = r.phases;
    os << "time_assembly = " << fmt(p.assembly) << '\n';
    os << "time_p2m = " << fmt(p.p2m) << '\n';
    os << "time_m2m = " << fmt(p.m2m) << '\n';
    os << "time_m2l_near = " << fmt(p.m2lNear) << '\n';
    os << "time_m2l_distant = " << fmt(p.m2lDistant) << '\n';
    os << "time_l2l = " << fmt(p.l2l) << '\n';
    os << "time_l2p = " << fmt(p.l2p) << '\n';
    os << "time_near_field = " << fmt(p.nearField) << '\n';
    os << "time_solve = " << fmt(p.solve) << '\n';
    return os.str();
}

RunReport parseReport(std::istream& in) {
    RunReport r;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq), v = line.substr(eq + 3);
        PhaseTimes& p = r.phases;
        if (key == "status") r.status = v;
        else if (key == "rel_error") r.relError = v == "none" ? std::nullopt : std::optional<double>(std::stod(v));
        else if (key == "reference_note") r.referenceNote = v;
        else if (key == "wall_time") r.wallTime = std::stod(v);
        else if (key == "peak_memory") r.peakMemory = std::stoull(v);
        else if (key == "elements") r.elements = std::stoull(v);
        else if (key == "steps") r.steps = std::stoi(v);
        else if (key == "solved_steps") r.solvedSteps = std::stoi(v);
        else if (key == "surface_mean_square") r.surfaceMeanSquare = std::stod(v);
        else if (key == "time_assembly") p.assembly = std::stod(v);
        else if (key == "time_p2m") p.p2m = std::stod(v);
        else if (key == "time_m2m") p.m2m = std::stod(v);
        else if (key == "time_m2l_near") p.m2lNear = std::stod(v);
        else if (key == "time_m2l_distant") p.m2lDistant = std::stod(v);
        else if (key == "time_l2l") p.l2l = std::stod(v);
        else if (key == "time_l2p") p.l2p = std::stod(v);
        else if (key == "time_near_field") p.nearField = std::stod(v);
        else if (key == "time_solve") p.solve = std::stod(v);
        else throw std::invalid_argument("unknown report key '" + key + "'");
    }
    return r;
}

RunReport loadReport(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report " + path);
    return parseReport(in);
}

RunComparison compareRuns(const RunReport& a, const RunReport& b) {
    RunComparison c;
    if (a.relError && b.relError && *a.relError > 0.0) c.errorRatio = *b.relError / *a.relError;
    c.timeRatio = a.wallTime > 0.0 ? b.wallTime / a.wallTime : 1.0;
    c.memoryRatio = a.peakMemory > 0 ? static_cast<double>(b.peakMemory) / static_cast<double>(a.peakMemory) : 1.0;
    c.sameStatus = a.status == b.status;
    return c;
}

std::string formatComparison(const RunComparison& c) {
    std::ostringstream os;
    os << "error_ratio = " << (c.errorRatio ? fmt(*c.errorRatio) : "none") << '\n';
    os << "time_ratio = " << fmt(c.timeRatio) << '\n';
    os << "memory_ratio = " << fmt(c.memoryRatio) << '\n';
    os << "same_status = " << (c.sameStatus ? "yes" : "no") << '\n';
    return os.str();
}

}  // namespace tdbem
