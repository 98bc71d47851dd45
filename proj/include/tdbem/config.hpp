#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tdbem/marching.hpp"

namespace tdbem {

enum class Algorithm { Conv, Fast };
enum class ReferenceMode { Auto, On, Off };

// One solver run. The mesh is a file path or a built-in generator: "sphere:<elements>" (radius
// 0.5 centred at (0.5, 0, 0), element count rounded up to a geodesic sphere) or "hollow-box".
struct RunConfig {
    std::string mesh = "sphere:1280";
    Boundary boundary = Boundary::Neumann;
    Bie bie = Bie::Obie;
    int order = 1;
    Algorithm algo = Algorithm::Conv;
    int ps = 8;
    int pt = 8;
    int leafCapacity = 100;
    int mu = 8;
    double dt = 0.04;
    int nt = 240;
    double c = 1.0;
    double pulseLength = 0.5;
    double amplitude = 1.0;
    std::string out = "tdbem-out";
    std::string points = "arc";  // "arc", "all" or comma-separated element ids
    int arcSamples = 33;
    double blowUp = 1e6;
    int threads = 1;
    ReferenceMode reference = ReferenceMode::Auto;

    // Throws std::invalid_argument naming the offending key.
    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

// Flat "key = value" text, '#' starts a comment. Unknown keys and malformed values are errors
// that carry the line number.
RunConfig parseConfig(std::istream& in, const std::string& sourceName = "<config>");
RunConfig loadConfig(const std::string& path);
std::string serializeConfig(const RunConfig& cfg);
void setConfigValue(RunConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> configKeys();

std::string toString(Algorithm a);
std::string toString(Bie b);
std::string toString(Boundary b);

}  // namespace tdbem
