#include "tdbem/m2l.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <fftw3.h>

#include "tdbem/kernels.hpp"
#include "tdbem/tbasis.hpp"

namespace tdbem {

double recurrenceCoeff(int p, int m, long long k) {
    if (m < 0 || m > p) return 0.0;
    const auto kd = static_cast<double>(k);
    const int e = p - m;
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return binomial(p, m) * (std::pow(kd - 1.0, e) - 2.0 * std::pow(kd, e) + std::pow(kd + 1.0, e)) * sign;
}

namespace {

int smoothSize(int n) {
    for (;; ++n) {
        int r = n;
        for (int f : {2, 3, 5, 7})
            while (r % f == 0) r /= f;
        if (r == 1) return n;
    }
}

int wrap(int e, int n) { return ((e % n) + n) % n; }

// Signed axis permutation taking a canonical offset (sorted, non-negative) to the given one:
// offset[i] = sign[i] * canonical[perm[i]].
struct Symmetry {
    CellOffset canonical{};
    std::array<int, 3> perm{};
    std::array<int, 3> sign{};
};

Symmetry symmetryOf(const CellOffset& o) {
    Symmetry s;
    std::array<int, 3> idx{0, 1, 2};
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(o[static_cast<std::size_t>(a)]) > std::abs(o[static_cast<std::size_t>(b)]); });
    for (int j = 0; j < 3; ++j) {
        const int i = idx[static_cast<std::size_t>(j)];
        s.canonical[static_cast<std::size_t>(j)] = std::abs(o[static_cast<std::size_t>(i)]);
        s.perm[static_cast<std::size_t>(i)] = j;
        s.sign[static_cast<std::size_t>(i)] = o[static_cast<std::size_t>(i)] < 0 ? -1 : 1;
    }
    return s;
}

int canonicalClass(const CellOffset& c) { return (c[0] * 4 + c[1]) * 4 + c[2]; }

CellOffset classOffset(int cls) { return {cls / 16, (cls / 4) % 4, cls % 4}; }

}  // namespace

struct M2LLevelOperators::Fft {
    int n = 0, nt = 0, nh = 0;
    std::size_t real = 0, complex = 0;
    double* rbuf = nullptr;
    fftw_complex* cbuf = nullptr;
    fftw_plan forward = nullptr, backward = nullptr;
    // frequency-index gathers for each signed permutation, keyed by perm/sign code
    mutable std::map<int, std::vector<int>> gathers;
    // orbits of the spatial frequency grid under all signed permutations; a term at frequency q
    // reads its class kernel at a frequency in the orbit of q
    std::vector<int> orbitStart, orbitMembers, orbitPos;
    int maxOrbit = 0;

    Fft(int ps, int pt) {
        n = smoothSize(2 * ps - 1);
        nt = smoothSize(2 * pt - 1);
        nh = nt / 2 + 1;
        real = static_cast<std::size_t>(n) * n * n * nt;
        complex = static_cast<std::size_t>(n) * n * n * nh;
        rbuf = fftw_alloc_real(real);
        cbuf = fftw_alloc_complex(complex);
        const int dims[4] = {n, n, n, nt};
        forward = fftw_plan_dft_r2c(4, dims, rbuf, cbuf, FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r(4, dims, cbuf, rbuf, FFTW_ESTIMATE);
        buildOrbits();
    }
    ~Fft() {
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
        fftw_free(rbuf);
        fftw_free(cbuf);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t at(int i0, int i1, int i2, int i3) const {
        return ((static_cast<std::size_t>(i0) * n + i1) * n + i2) * nt + i3;
    }

    const std::vector<int>& gather(const Symmetry& s) const {
        const int code = (s.perm[0] * 3 + s.perm[1]) * 8 + (s.sign[0] < 0) * 4 + (s.sign[1] < 0) * 2 + (s.sign[2] < 0);
        auto [it, inserted] = gathers.try_emplace(code);
        if (inserted) {
            auto& g = it->second;
            g.resize(static_cast<std::size_t>(n) * n * n);
            std::array<int, 3> k{}, src{};
            for (k[0] = 0; k[0] < n; ++k[0])
                for (k[1] = 0; k[1] < n; ++k[1])
                    for (k[2] = 0; k[2] < n; ++k[2]) {
                        for (int i = 0; i < 3; ++i)
                            src[static_cast<std::size_t>(s.perm[static_cast<std::size_t>(i)])] =
                                wrap(s.sign[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(i)], n);
                        g[(static_cast<std::size_t>(k[0]) * n + k[1]) * n + k[2]] = (src[0] * n + src[1]) * n + src[2];
                    }
        }
        return it->second;
    }

    // Spectra are stored orbit by orbit (row P holds spatial frequency orbitMembers[P]) so one
    // orbit's rows are contiguous in every operand.
    void toOrbitOrder(std::complex<double>* out, double scale) const {
        const auto h = static_cast<std::size_t>(nh);
        for (std::size_t p = 0; p < orbitMembers.size(); ++p) {
            const std::size_t q = static_cast<std::size_t>(orbitMembers[p]) * h;
            for (std::size_t j = 0; j < h; ++j) out[p * h + j] = std::complex<double>(cbuf[q + j][0], cbuf[q + j][1]) * scale;
        }
    }
    void fromOrbitOrder(const double* in, std::size_t stride) {
        const auto h = static_cast<std::size_t>(nh);
        for (std::size_t p = 0; p < orbitMembers.size(); ++p) {
            const std::size_t q = static_cast<std::size_t>(orbitMembers[p]) * h;
            for (std::size_t j = 0; j < h; ++j) {
                cbuf[q + j][0] = in[p * stride + 2 * j];
                cbuf[q + j][1] = in[p * stride + 2 * j + 1];
            }
        }
    }

    void buildOrbits() {
        std::vector<const std::vector<int>*> group;
        std::array<int, 3> perm{0, 1, 2};
        do {
            for (int bits = 0; bits < 8; ++bits) {
                Symmetry s;
                s.perm = perm;
                for (int i = 0; i < 3; ++i) s.sign[static_cast<std::size_t>(i)] = (bits >> i) & 1 ? -1 : 1;
                group.push_back(&gather(s));
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        const std::size_t nSpace = static_cast<std::size_t>(n) * n * n;
        orbitPos.assign(nSpace, -1);
        orbitStart.assign(1, 0);
        for (std::size_t q = 0; q < nSpace; ++q) {
            if (orbitPos[q] >= 0) continue;
            for (const auto* g : group) {
                const int r = (*g)[q];
                if (orbitPos[static_cast<std::size_t>(r)] >= 0) continue;
                orbitPos[static_cast<std::size_t>(r)] = static_cast<int>(orbitMembers.size()) - orbitStart.back();
                orbitMembers.push_back(r);
            }
            orbitStart.push_back(static_cast<int>(orbitMembers.size()));
            maxOrbit = std::max(maxOrbit, orbitStart.back() - orbitStart[orbitStart.size() - 2]);
        }
    }
};

M2LLevelOperators::M2LLevelOperators(const M2LConfig& config, double halfWidth, double intervalLength)
    : cfg_(config), halfWidth_(halfWidth), intervalLength_(intervalLength) {
    if (cfg_.ps < 2 || cfg_.pt < 2) throw std::invalid_argument("M2L needs at least two nodes per axis");
    if (cfg_.mode == M2LMode::Fft) fft_ = std::make_unique<Fft>(cfg_.ps, cfg_.pt);
}

M2LLevelOperators::~M2LLevelOperators() = default;

double M2LLevelOperators::kernel(int lag, int order, const CellOffset& offset, const std::array<int, 3>& a,
                                 const std::array<int, 3>& b, int m, int n) const {
    const double hs = halfWidth_, ht = 0.5 * intervalLength_;
    const double ds = 2.0 * hs / (cfg_.ps - 1), dtn = 2.0 * ht / (cfg_.pt - 1);
    SpaceTimeArgs args;
    args.y = Vec3::Zero();
    for (int k = 0; k < 3; ++k)
        args.x[k] = offset[static_cast<std::size_t>(k)] * -2.0 * hs + ds * (a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]);
    args.s = 0.0;
    args.t = lag * intervalLength_ + cfg_.dt + dtn * (m - n);
    return kernelUDeriv(order, args, KernelParams{cfg_.c, cfg_.d, cfg_.dt});
}

Eigen::MatrixXd M2LLevelOperators::dense(int lag, int order, const CellOffset& offset) const {
    const int ps = cfg_.ps, pt = cfg_.pt, s3 = ps * ps * ps;
    Eigen::MatrixXd u(size(), size());
    std::array<int, 3> a{}, b{};
    for (int m = 0; m < pt; ++m)
        for (a[2] = 0; a[2] < ps; ++a[2])
            for (a[1] = 0; a[1] < ps; ++a[1])
                for (a[0] = 0; a[0] < ps; ++a[0]) {
                    const int row = a[0] + ps * (a[1] + ps * a[2]) + s3 * m;
                    for (int n = 0; n < pt; ++n)
                        for (b[2] = 0; b[2] < ps; ++b[2])
                            for (b[1] = 0; b[1] < ps; ++b[1])
                                for (b[0] = 0; b[0] < ps; ++b[0])
                                    u(row, b[0] + ps * (b[1] + ps * b[2]) + s3 * n) = kernel(lag, order, offset, a, b, m, n);
                }
    return u;
}

Eigen::MatrixXd M2LLevelOperators::denseSlot(int slot, const CellOffset& offset) const {
    return dense(slotLag(slot), slotOrder(slot), offset);
}

const std::vector<std::complex<double>>& M2LLevelOperators::spectrum(int cls, int slot) const {
    auto [it, inserted] = spectra_.try_emplace({cls, slot});
    if (!inserted) return it->second;
    Fft& f = *fft_;
    const int ps = cfg_.ps, pt = cfg_.pt;
    const CellOffset off = classOffset(cls);
    std::fill(f.rbuf, f.rbuf + f.real, 0.0);
    // kernel depends on node index differences only: place K[e, g] at (e mod n, g mod nt)
    const std::array<int, 3> zero{0, 0, 0};
    std::array<int, 3> e{};
    for (e[0] = -(ps - 1); e[0] < ps; ++e[0])
        for (e[1] = -(ps - 1); e[1] < ps; ++e[1])
            for (e[2] = -(ps - 1); e[2] < ps; ++e[2])
                for (int g = -(pt - 1); g < pt; ++g)
                    f.rbuf[f.at(wrap(e[0], f.n), wrap(e[1], f.n), wrap(e[2], f.n), wrap(g, f.nt))] =
                        kernel(slotLag(slot), slotOrder(slot), off, e, zero, g, 0);
    fftw_execute(f.forward);
    const double scale = 1.0 / static_cast<double>(f.real);
    auto& spec = it->second;
    spec.resize(f.complex);
    f.toOrbitOrder(spec.data(), scale);
    return spec;
}

M2LLevelOperators::Source M2LLevelOperators::prepare(const Eigen::VectorXd& moment) const {
    Source src;
    if (cfg_.mode == M2LMode::Dense) {
        src.moment = moment;
        return src;
    }
    Fft& f = *fft_;
    const int ps = cfg_.ps, pt = cfg_.pt;
    std::fill(f.rbuf, f.rbuf + f.real, 0.0);
    for (int n = 0; n < pt; ++n)
        for (int b2 = 0; b2 < ps; ++b2)
            for (int b1 = 0; b1 < ps; ++b1)
                for (int b0 = 0; b0 < ps; ++b0)
                    f.rbuf[f.at(b0, b1, b2, n)] = moment[b0 + ps * (b1 + ps * (b2 + ps * n))];
    fftw_execute(f.forward);
    src.spectrum.resize(f.complex);
    f.toOrbitOrder(src.spectrum.data(), 1.0);
    return src;
}

void M2LLevelOperators::apply(const std::vector<Term>& terms, int first, int last, std::vector<Eigen::VectorXd>& out) const {
    std::vector<std::vector<Eigen::VectorXd>> many(1, std::move(out));
    applyMany(std::span(&terms, 1), first, last, many);
    out = std::move(many.front());
}

void M2LLevelOperators::applyMany(std::span<const std::vector<Term>> targets, int first, int last,
                                  std::vector<std::vector<Eigen::VectorXd>>& out) const {
    out.resize(targets.size());
    for (auto& o : out) {
        o.resize(static_cast<std::size_t>(slots()));
        for (int s = first; s < last; ++s) o[static_cast<std::size_t>(s)] = Eigen::VectorXd::Zero(size());
    }
    if (first >= last) return;

    if (cfg_.mode == M2LMode::Dense) {
        for (std::size_t t = 0; t < targets.size(); ++t)
            for (int s = first; s < last; ++s)
                for (const auto& term : targets[t]) {
                    const auto key = std::make_tuple(s, term.offset[0], term.offset[1], term.offset[2]);
                    auto it = denseCache_.find(key);
                    if (it == denseCache_.end()) it = denseCache_.emplace(key, denseSlot(s, term.offset)).first;
                    out[t][static_cast<std::size_t>(s)] += it->second * term.source->moment;
                }
        return;
    }

    Fft& f = *fft_;
    const int ps = cfg_.ps, pt = cfg_.pt;
    const auto nh = static_cast<std::size_t>(f.nh);
    const std::size_t row = 2 * nh;  // doubles per frequency row
    const auto count = static_cast<std::size_t>(last - first);

    // Resolve every term to (index into the classes in use, gather, source spectrum).
    struct Prepared {
        std::size_t cls;
        const int* gather;
        const double* source;
    };
    std::vector<int> classes;
    std::vector<std::vector<Prepared>> prepared(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t)
        for (const auto& term : targets[t]) {
            const Symmetry sym = symmetryOf(term.offset);
            const int cls = canonicalClass(sym.canonical);
            auto pos = std::ranges::find(classes, cls);
            if (pos == classes.end()) pos = classes.insert(classes.end(), cls);
            prepared[t].push_back({static_cast<std::size_t>(pos - classes.begin()), f.gather(sym).data(),
                                   reinterpret_cast<const double*>(term.source->spectrum.data())});
        }
    if (classes.empty()) return;
    std::vector<const double*> kernels(classes.size() * count);
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (std::size_t s = 0; s < count; ++s)
            kernels[c * count + s] = reinterpret_cast<const double*>(spectrum(classes[c], first + static_cast<int>(s)).data());

    // Accumulators are the big allocation; batch targets to keep them near 256 MB. Layout per
    // target is [row P][slot][frequency], so an orbit's block is contiguous.
    const std::size_t perTarget = count * f.complex * 2;
    const std::size_t batch = std::max<std::size_t>(1, (std::size_t{32} << 20) / perTarget);
    std::vector<double> acc;
    std::vector<std::size_t> kp(static_cast<std::size_t>(f.maxOrbit));

    for (std::size_t t0 = 0; t0 < targets.size(); t0 += batch) {
        const std::size_t t1 = std::min(targets.size(), t0 + batch);
        acc.assign((t1 - t0) * perTarget, 0.0);
        for (std::size_t o = 0; o + 1 < f.orbitStart.size(); ++o) {
            const auto base = static_cast<std::size_t>(f.orbitStart[o]);
            const auto size = static_cast<std::size_t>(f.orbitStart[o + 1]) - base;
            const int* members = f.orbitMembers.data() + base;
            for (std::size_t t = t0; t < t1; ++t) {
                double* accO = acc.data() + (t - t0) * perTarget + base * count * row;
                for (const auto& p : prepared[t]) {
                    for (std::size_t i = 0; i < size; ++i)
                        kp[i] = base + static_cast<std::size_t>(f.orbitPos[static_cast<std::size_t>(p.gather[members[i]])]);
                    const double* const* kern = kernels.data() + p.cls * count;
                    for (std::size_t i = 0; i < size; ++i) {
                        const double* m = p.source + (base + i) * row;
                        double* a = accO + i * count * row;
                        for (std::size_t s = 0; s < count; ++s, a += row) {
                            const double* k = kern[s] + kp[i] * row;
                            for (std::size_t j = 0; j < row; j += 2) {
                                a[j] += k[j] * m[j] - k[j + 1] * m[j + 1];
                                a[j + 1] += k[j] * m[j + 1] + k[j + 1] * m[j];
                            }
                        }
                    }
                }
            }
        }
        for (std::size_t t = t0; t < t1; ++t)
            for (std::size_t s = 0; s < count; ++s) {
                f.fromOrbitOrder(acc.data() + (t - t0) * perTarget + s * row, count * row);
                fftw_execute(f.backward);
                Eigen::VectorXd& o = out[t][static_cast<std::size_t>(first) + s];
                for (int m = 0; m < pt; ++m)
                    for (int a2 = 0; a2 < ps; ++a2)
                        for (int a1 = 0; a1 < ps; ++a1)
                            for (int a0 = 0; a0 < ps; ++a0) o[a0 + ps * (a1 + ps * (a2 + ps * m))] = f.rbuf[f.at(a0, a1, a2, m)];
            }
    }
}

LocalRecurrence::LocalRecurrence(int size, int d, int mu, double intervalSpan)
    : d_(d), mu_(mu), span_(intervalSpan), zero_(Eigen::VectorXd::Zero(size)) {
    ring_.assign(static_cast<std::size_t>(mu + 3), zero_);
    deriv_.assign(static_cast<std::size_t>(d), zero_);
    aux_.resize(static_cast<std::size_t>(d));
    for (int p = 2; p <= d; ++p) aux_[static_cast<std::size_t>(p - 1)].assign(static_cast<std::size_t>(p - 1), zero_);
}

void LocalRecurrence::push(int k, const std::vector<Eigen::VectorXd>& slots) {
    if (k != last_ + 1) throw std::logic_error("source intervals must be pushed in order");
    last_ = k;
    for (int l = 1; l <= mu_ + 1; ++l) slot(k + l) += slots[static_cast<std::size_t>(l - 1)];

    // derivative locals of interval k + mu + 1, using the auxiliary locals of the previous step
    for (int p = 1; p <= d_; ++p) {
        Eigen::VectorXd& dp = deriv_[static_cast<std::size_t>(p - 1)];
        dp += slots[static_cast<std::size_t>(mu_ + p)];
        for (int m = 0; m <= p - 2; ++m) dp += recurrenceCoeff(p, m, k) * aux_[static_cast<std::size_t>(p - 1)][static_cast<std::size_t>(m)];
    }

    Eigen::VectorXd next = slot(k + mu_ + 1);
    double tp = 1.0;
    for (int p = 1; p <= d_; ++p) {
        tp *= span_;
        next += deriv_[static_cast<std::size_t>(p - 1)] * tp;
    }
    slot(k + mu_ + 2) = std::move(next);

    for (int p = 2; p <= d_; ++p) {
        double km = 1.0;
        for (int m = 0; m <= p - 2; ++m) {
            aux_[static_cast<std::size_t>(p - 1)][static_cast<std::size_t>(m)] += slots[static_cast<std::size_t>(mu_ + p)] * km;
            km *= static_cast<double>(k);
        }
    }
}

const Eigen::VectorXd& LocalRecurrence::local(int l) const {
    if (l > last_ + mu_ + 2) return zero_;
    if (l <= last_) throw std::out_of_range("local of a closed interval was already recycled");
    return ring_[static_cast<std::size_t>(l % static_cast<int>(ring_.size()))];
}

}  // namespace tdbem
