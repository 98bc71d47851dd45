#include "tdbem/incident.hpp"

#include <cmath>
#include <numbers>

namespace tdbem {

IncidentSample incident(const Vec3& x, double t, const PlanePulse& pulse) {
    const double phase = pulse.c * t - x.x();
    if (phase <= 0.0 || phase >= pulse.length) return {};
    const double k = 2.0 * std::numbers::pi / pulse.length;
    const double slope = 0.5 * pulse.amplitude * k * std::sin(k * phase);  // d/d(phase)
    IncidentSample out;
    out.value = 0.5 * pulse.amplitude * (1.0 - std::cos(k * phase));
    out.gradient = Vec3(-slope, 0.0, 0.0);
    out.timeDerivative = pulse.c * slope;
    return out;
}

}  // namespace tdbem
