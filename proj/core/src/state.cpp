#include "nanorod/state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nanorod {

std::string_view to_string(SpinBasis basis) {
    return basis == SpinBasis::sigma_z ? "sigma_z" : "sigma_x";
}

SpinPhaseField::SpinPhaseField(const PhaseGrid& grid, SpinBasis basis)
    : grid_(grid), basis_(basis), data_(components * grid.size()) {}

std::span<complex> SpinPhaseField::component(std::size_t k) {
    return {data_.data() + k * grid_.size(), grid_.size()};
}

std::span<const complex> SpinPhaseField::component(std::size_t k) const {
    return {data_.data() + k * grid_.size(), grid_.size()};
}

complex& SpinPhaseField::at(std::size_t k, std::size_t i, std::size_t j) {
    return data_[k * grid_.size() + grid_.index(i, j)];
}

const complex& SpinPhaseField::at(std::size_t k, std::size_t i, std::size_t j) const {
    return data_[k * grid_.size() + grid_.index(i, j)];
}

ScalarField SpinPhaseField::scalar(std::size_t k) const {
    ScalarField f(grid_);
    const auto c = component(k);
    std::copy(c.begin(), c.end(), f.values.begin());
    return f;
}

void SpinPhaseField::set_scalar(std::size_t k, const ScalarField& f) {
    if (!(f.grid == grid_)) throw std::invalid_argument("set_scalar: grid mismatch");
    std::copy(f.values.begin(), f.values.end(), component(k).begin());
}

ScalarField SpinPhaseField::trace() const {
    ScalarField f(grid_);
    const auto a = component(0);
    const auto d = component(3);
    for (std::size_t n = 0; n < grid_.size(); ++n) f.values[n] = a[n] + d[n];
    return f;
}

std::span<double> SpinPhaseField::flat() {
    return {reinterpret_cast<double*>(data_.data()), 2 * data_.size()};
}

std::span<const double> SpinPhaseField::flat() const {
    return {reinterpret_cast<const double*>(data_.data()), 2 * data_.size()};
}

SpinPhaseField& SpinPhaseField::operator+=(const SpinPhaseField& other) {
    if (!same_layout(other)) throw std::invalid_argument("field addition: layout mismatch");
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += other.data_[n];
    return *this;
}

SpinPhaseField& SpinPhaseField::operator*=(double a) {
    for (auto& v : data_) v *= a;
    return *this;
}

SpinPhaseField init_coherent_excited(const PhaseGrid& grid, double r0, double p0, double delta_r) {
    if (!(delta_r > 0.0) || !std::isfinite(delta_r)) {
        throw std::invalid_argument("init_coherent_excited: delta_r must be positive");
    }
    const double margin = 4.0 * delta_r;
    if (!(r0 - margin >= grid.r_min() && r0 + margin <= grid.r_max())) {
        throw std::invalid_argument("init_coherent_excited: R0 = " + std::to_string(r0) +
                                    " is closer than 4*delta_r to the grid edge");
    }
    if (!(p0 - margin >= grid.p_min() && p0 + margin <= grid.p_max())) {
        throw std::invalid_argument("init_coherent_excited: P0 = " + std::to_string(p0) +
                                    " is closer than 4*delta_r to the grid edge");
    }
    SpinPhaseField w(grid, SpinBasis::sigma_z);
    const double s2 = delta_r * delta_r;
    for (std::size_t i = 0; i < grid.n_r(); ++i) {
        const double dr = grid.r(i) - r0;
        const double gr = std::exp(-dr * dr / (2.0 * s2));
        for (std::size_t j = 0; j < grid.n_p(); ++j) {
            const double dp = grid.p(j) - p0;
            w.at(0, i, j) = std::numbers::inv_pi * gr * std::exp(-2.0 * s2 * dp * dp);
        }
    }
    const double n = norm(w);
    if (std::abs(n - 1.0) > 1e-6) {
        std::clog << "[nanorod] initial Gaussian clipped by the grid: quadrature norm " << n
                  << ", rescaling to 1\n";
        w *= 1.0 / n;
    }
    return w;
}

complex trace_integral(const SpinPhaseField& w) {
    return integrate_phase_space(w.trace());
}

double norm(const SpinPhaseField& w) { return trace_integral(w).real(); }

double hermiticity_defect(const SpinPhaseField& w) {
    const auto a = w.component(0);
    const auto b = w.component(1);
    const auto c = w.component(2);
    const auto d = w.component(3);
    double off = 0.0;
    double im_a = 0.0;
    double im_d = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        off = std::max(off, std::abs(c[n] - std::conj(b[n])));
        im_a = std::max(im_a, std::abs(a[n].imag()));
        im_d = std::max(im_d, std::abs(d[n].imag()));
    }
    return off + im_a + im_d;
}

SpinPhaseField to_basis(const SpinPhaseField& w, SpinBasis target) {
    if (w.basis() == target) return w;
    SpinPhaseField out(w.grid(), target);
    const auto a = w.component(0);
    const auto b = w.component(1);
    const auto c = w.component(2);
    const auto d = w.component(3);
    auto a2 = out.component(0);
    auto b2 = out.component(1);
    auto c2 = out.component(2);
    auto d2 = out.component(3);
    // U W U with U = [[1, 1], [1, -1]] / sqrt(2).
    for (std::size_t n = 0; n < a.size(); ++n) {
        const complex s = a[n] + d[n];
        const complex t = a[n] - d[n];
        const complex u = b[n] + c[n];
        const complex v = b[n] - c[n];
        a2[n] = 0.5 * (s + u);
        b2[n] = 0.5 * (t - v);
        c2[n] = 0.5 * (t + v);
        d2[n] = 0.5 * (s - u);
    }
    return out;
}

namespace {

constexpr char kMagic[4] = {'N', 'R', 'W', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("field snapshot truncated");
    return v;
}

}  // namespace

void write_field(std::ostream& out, const SpinPhaseField& w) {
    const PhaseGrid& g = w.grid();
    out.write(kMagic, 4);
    put(out, kVersion);
    put<std::uint64_t>(out, g.n_r());
    put<std::uint64_t>(out, g.n_p());
    put(out, g.r_min());
    put(out, g.r_max());
    put(out, g.p_min());
    put(out, g.p_max());
    put<std::uint32_t>(out, w.basis() == SpinBasis::sigma_z ? 0 : 1);
    std::vector<double> node(2 * SpinPhaseField::components);
    for (std::size_t n = 0; n < g.size(); ++n) {
        for (std::size_t k = 0; k < SpinPhaseField::components; ++k) {
            const complex v = w.component(k)[n];
            node[2 * k] = v.real();
            node[2 * k + 1] = v.imag();
        }
        out.write(reinterpret_cast<const char*>(node.data()),
                  static_cast<std::streamsize>(node.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("failed to write field snapshot");
}

SpinPhaseField read_field(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("not a field snapshot (bad magic)");
    }
    if (get<std::uint32_t>(in) != kVersion) {
        throw std::runtime_error("unsupported field snapshot version");
    }
    const auto n_r = get<std::uint64_t>(in);
    const auto n_p = get<std::uint64_t>(in);
    const auto r_min = get<double>(in);
    const auto r_max = get<double>(in);
    const auto p_min = get<double>(in);
    const auto p_max = get<double>(in);
    const auto basis = get<std::uint32_t>(in);
    if (basis > 1) throw std::runtime_error("field snapshot has an unknown basis tag");
    const PhaseGrid g = build_grid(r_min, r_max, p_min, p_max, n_r, n_p);
    SpinPhaseField w(g, basis == 0 ? SpinBasis::sigma_z : SpinBasis::sigma_x);
    std::vector<double> node(2 * SpinPhaseField::components);
    for (std::size_t n = 0; n < g.size(); ++n) {
        in.read(reinterpret_cast<char*>(node.data()),
                static_cast<std::streamsize>(node.size() * sizeof(double)));
        if (!in) throw std::runtime_error("field snapshot truncated");
        for (std::size_t k = 0; k < SpinPhaseField::components; ++k) {
            w.component(k)[n] = complex(node[2 * k], node[2 * k + 1]);
        }
    }
    return w;
}

}  // namespace nanorod
