#include "tdbem/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace tdbem {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T number(const std::string& key, const std::string& v) {
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) throw std::invalid_argument("bad value for '" + key + "': " + v);
    return out;
}

std::string formatDouble(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

struct Field {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field intField(T RunConfig::*member) {
    return {[member](RunConfig& c, const std::string& v) { c.*member = number<T>("", v); },
            [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field doubleField(double RunConfig::*member) {
    return {[member](RunConfig& c, const std::string& v) { c.*member = number<double>("", v); },
            [member](const RunConfig& c) { return formatDouble(c.*member); }};
}

Field stringField(std::string RunConfig::*member) {
    return {[member](RunConfig& c, const std::string& v) { c.*member = v; }, [member](const RunConfig& c) { return c.*member; }};
}

template <class E>
Field enumField(E RunConfig::*member, std::vector<std::pair<std::string, E>> names) {
    return {[member, names](RunConfig& c, const std::string& v) {
                for (const auto& [n, e] : names)
                    if (n == v) {
                        c.*member = e;
                        return;
                    }
                throw std::invalid_argument("unknown choice: " + v);
            },
            [member, names](const RunConfig& c) {
                for (const auto& [n, e] : names)
                    if (e == c.*member) return n;
                return std::string("?");
            }};
}

// Insertion order is the serialisation order.
const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table{
        {"mesh", stringField(&RunConfig::mesh)},
        {"boundary", enumField(&RunConfig::boundary, {{"neumann", Boundary::Neumann}, {"dirichlet", Boundary::Dirichlet}})},
        {"bie", enumField(&RunConfig::bie, {{"obie", Bie::Obie}, {"bmbie", Bie::Bmbie}})},
        {"order", intField(&RunConfig::order)},
        {"algo", enumField(&RunConfig::algo, {{"conv", Algorithm::Conv}, {"fast", Algorithm::Fast}})},
        {"ps", intField(&RunConfig::ps)},
        {"pt", intField(&RunConfig::pt)},
        {"leaf_capacity", intField(&RunConfig::leafCapacity)},
        {"mu", intField(&RunConfig::mu)},
        {"dt", doubleField(&RunConfig::dt)},
        {"nt", intField(&RunConfig::nt)},
        {"c", doubleField(&RunConfig::c)},
        {"pulse_length", doubleField(&RunConfig::pulseLength)},
        {"amplitude", doubleField(&RunConfig::amplitude)},
        {"out", stringField(&RunConfig::out)},
        {"points", stringField(&RunConfig::points)},
        {"arc_samples", intField(&RunConfig::arcSamples)},
        {"blow_up", doubleField(&RunConfig::blowUp)},
        {"threads", intField(&RunConfig::threads)},
        {"reference", enumField(&RunConfig::reference, {{"auto", ReferenceMode::Auto}, {"on", ReferenceMode::On}, {"off", ReferenceMode::Off}})},
    };
    return table;
}

}  // namespace

void RunConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw std::invalid_argument("invalid config: " + what);
    };
    require(!mesh.empty(), "mesh must be set");
    require(order >= 1 && order <= 3, "order must be 1, 2 or 3");
    require(dt > 0.0, "dt must be positive");
    require(nt >= 2, "nt must be at least 2");
    require(c > 0.0, "c must be positive");
    require(pulseLength > 0.0, "pulse_length must be positive");
    require(amplitude > 0.0, "amplitude must be positive");
    require(blowUp > 0.0, "blow_up must be positive");
    require(threads >= 1, "threads must be at least 1");
    require(arcSamples >= 2, "arc_samples must be at least 2");
    require(!out.empty(), "out must be set");
    if (algo == Algorithm::Fast) {
        require(ps >= 4 && pt >= 4, "fast solver needs ps, pt >= 4");
        require(leafCapacity >= 1, "leaf_capacity must be positive");
        require(mu >= 1, "mu must be positive");
    }
}

void setConfigValue(RunConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& [name, field] : fields())
        if (name == key) {
            try {
                field.set(cfg, value);
            } catch (const std::invalid_argument&) {
                throw std::invalid_argument("bad value for '" + key + "': " + value);
            }
            return;
        }
    throw std::invalid_argument("unknown config key '" + key + "'");
}

std::vector<std::string> configKeys() {
    std::vector<std::string> keys;
    for (const auto& f : fields()) keys.push_back(f.first);
    return keys;
}

RunConfig parseConfig(std::istream& in, const std::string& sourceName) {
    RunConfig cfg;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        try {
            if (eq == std::string::npos) throw std::invalid_argument("expected 'key = value'");
            setConfigValue(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(sourceName + ":" + std::to_string(lineNo) + ": " + e.what());
        }
    }
    return cfg;
}

RunConfig loadConfig(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    return parseConfig(in, path);
}

std::string serializeConfig(const RunConfig& cfg) {
    std::ostringstream os;
    for (const auto& [name, field] : fields()) os << name << " = " << field.get(cfg) << '\n';
    return os.str();
}

std::string toString(Algorithm a) { return a == Algorithm::Conv ? "conv" : "fast"; }
std::string toString(Bie b) { return b == Bie::Obie ? "obie" : "bmbie"; }
std::string toString(Boundary b) { return b == Boundary::Neumann ? "neumann" : "dirichlet"; }

}  // namespace tdbem
