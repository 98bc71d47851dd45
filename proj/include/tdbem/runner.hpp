#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdbem/config.hpp"
#include "tdbem/fmm.hpp"
#include "tdbem/reference.hpp"

namespace tdbem {

struct RunReport {
    std::string status = "stable";
    std::optional<double> relError;
    std::string referenceNote;  // why no error was computed, if so
    double wallTime = 0.0;
    std::size_t peakMemory = 0;  // bytes, resident-set high-water mark (approximate)
    PhaseTimes phases;
    std::size_t elements = 0;
    int steps = 0;
    int solvedSteps = 0;
    double surfaceMeanSquare = 0.0;  // area-weighted time mean of the unknown squared

    bool operator==(const RunReport&) const = default;
};

struct RunResult {
    RunReport report;
    std::vector<int> points;     // evaluation elements
    Eigen::MatrixXd values;      // total-field unknown, rows steps, columns points
    Eigen::MatrixXd reference;   // same shape when available, else empty
};

TriMesh buildMesh(const RunConfig& cfg);
// Sphere scenario matching a built-in sphere mesh; empty for other meshes.
std::optional<SphereScenario> sphereScenarioFor(const RunConfig& cfg);
ProblemSpec problemFor(const RunConfig& cfg, const TriMesh& mesh);
std::vector<int> evaluationPoints(const RunConfig& cfg, const TriMesh& mesh);

RunResult runScenario(const RunConfig& cfg);
// Writes <out>/profiles.csv, <out>/report.txt and <out>/config.txt.
void writeOutputs(const RunConfig& cfg, const RunResult& result);

std::string formatReport(const RunReport& r);
RunReport parseReport(std::istream& in);
RunReport loadReport(const std::string& path);
void writeProfiles(std::ostream& os, const RunConfig& cfg, const RunResult& result);

// Ratios b / a for error, wall time and memory.
struct RunComparison {
    std::optional<double> errorRatio;
    double timeRatio = 1.0;
    double memoryRatio = 1.0;
    bool sameStatus = true;
};
RunComparison compareRuns(const RunReport& a, const RunReport& b);
std::string formatComparison(const RunComparison& c);

std::size_t peakMemoryBytes();

}  // namespace tdbem
