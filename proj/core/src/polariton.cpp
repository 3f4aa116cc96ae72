#include "qdcav/polariton.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace qdcav {

namespace {

using cplx = std::complex<double>;

std::array<double, 3> normalized_weights(const std::array<cplx, 3>& v) {
    double norm2 = 0.0;
    for (const auto& c : v) norm2 += std::norm(c);
    std::array<double, 3> w{0.0, 0.0, 0.0};
    if (norm2 <= 0.0) return w;
    const double inv = 1.0 / std::sqrt(norm2);
    for (int i = 0; i < 3; ++i) w[i] = std::abs(v[i]) * inv;
    return w;
}

ComplexMode make_mode(cplx lambda, const std::array<cplx, 3>& vec) {
    ComplexMode m;
    m.energy_ueV = lambda.real();
    m.half_linewidth_ueV = -lambda.imag();
    m.weights = normalized_weights(vec);
    return m;
}

bool mode_order(const ComplexMode& a, const ComplexMode& b) {
    if (a.energy_ueV != b.energy_ueV) return a.energy_ueV < b.energy_ueV;
    return a.half_linewidth_ueV < b.half_linewidth_ueV;
}

// Roots of t^3 + p t + q with complex coefficients (Cardano), polished by
// two Newton steps each.
std::array<cplx, 3> cubic_roots(cplx p, cplx q) {
    std::array<cplx, 3> roots{};
    const cplx disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    cplx u3 = -q / 2.0 + disc;
    if (std::abs(u3) < 1e-280) u3 = -q / 2.0 - disc;
    if (std::abs(u3) < 1e-280) {
        // p and q both vanish: triple root at zero.
        return roots;
    }
    const cplx u = std::exp(std::log(u3) / 3.0);
    const cplx omega(-0.5, std::sqrt(3.0) / 2.0);
    cplx uk = u;
    for (int k = 0; k < 3; ++k) {
        cplx t = uk - p / (3.0 * uk);
        for (int it = 0; it < 2; ++it) {
            const cplx f = t * t * t + p * t + q;
            const cplx fp = 3.0 * t * t + p;
            if (std::abs(fp) > 1e-300) t -= f / fp;
        }
        roots[k] = t;
        uk *= omega;
    }
    return roots;
}

// Null vector of the (numerically singular) 3x3 matrix via the best row
// cross product.
std::array<cplx, 3> null_vector(const std::array<std::array<cplx, 3>, 3>& b) {
    auto cross = [](const std::array<cplx, 3>& r1, const std::array<cplx, 3>& r2) {
        return std::array<cplx, 3>{r1[1] * r2[2] - r1[2] * r2[1],
                                   r1[2] * r2[0] - r1[0] * r2[2],
                                   r1[0] * r2[1] - r1[1] * r2[0]};
    };
    const std::array<std::array<cplx, 3>, 3> cands{cross(b[0], b[1]), cross(b[0], b[2]),
                                                   cross(b[1], b[2])};
    double best = -1.0;
    std::array<cplx, 3> v{cplx(1.0), cplx(0.0), cplx(0.0)};
    for (const auto& c : cands) {
        const double n = std::norm(c[0]) + std::norm(c[1]) + std::norm(c[2]);
        if (n > best) {
            best = n;
            v = c;
        }
    }
    return v;
}

} // namespace

double cavity_linewidth(const CavityParams& cav) {
    if (!(cav.q_factor > 0.0))
        throw std::domain_error("cavity_linewidth: quality factor must be positive");
    return cav.ec_ueV / cav.q_factor;
}

CouplingParams CouplingParams::from_dipole(double g0_ueV, double theta_rad) {
    CouplingParams cpl;
    cpl.g0_ueV = g0_ueV;
    cpl.theta_rad = theta_rad;
    cpl.g_plus_ueV = cpl.g_minus_ueV = reduced_coupling(g0_ueV, theta_rad);
    return cpl;
}

double reduced_coupling(double g0_ueV, double theta_rad) {
    if (g0_ueV < 0.0)
        throw std::domain_error("reduced_coupling: coupling must be non-negative");
    const double c = std::cos(theta_rad);
    if (!(c > 0.0))
        throw std::domain_error("reduced_coupling: cos(theta) must be positive");
    return g0_ueV / (std::sqrt(2.0) * c);
}

bool strong_coupling(double g, double gamma_c, double gamma_x) {
    return g > std::abs(gamma_c - gamma_x) / 4.0;
}

std::optional<double> rabi_splitting(double g, double gamma_c, double gamma_x) {
    if (g < 0.0 || gamma_c < 0.0 || gamma_x < 0.0)
        throw std::domain_error("rabi_splitting: negative input");
    const double loss = (gamma_c - gamma_x) / 4.0;
    const double radicand = g * g - loss * loss;
    if (radicand <= 0.0) return std::nullopt;
    return 2.0 * std::sqrt(radicand);
}

double g_from_splitting(double delta_e, double gamma_c, double gamma_x) {
    if (delta_e < 0.0)
        throw std::domain_error("g_from_splitting: splitting must be non-negative");
    return std::hypot(delta_e / 2.0, (gamma_c - gamma_x) / 4.0);
}

std::array<ComplexMode, 2> polariton_modes_2x2(double ex, double gamma_x, double ec,
                                               double gamma_c, double g) {
    if (gamma_x < 0.0 || gamma_c < 0.0 || g < 0.0)
        throw std::domain_error("polariton_modes_2x2: negative input");
    const cplx a(ex, -gamma_x / 2.0);
    const cplx d(ec, -gamma_c / 2.0);
    const cplx mean = (a + d) / 2.0;
    const cplx q = (a - d) / 2.0;
    const cplx s = std::sqrt(q * q + cplx(g * g));
    const cplx l1 = mean + s;
    const cplx l2 = mean - s;

    auto vec_for = [&](cplx lambda) {
        // (g, lambda - a) and (lambda - d, g) span the same eigenline; pick
        // the better-conditioned one.
        const cplx va = lambda - a;
        const cplx vd = lambda - d;
        std::array<cplx, 3> v{cplx(0.0), cplx(0.0), cplx(0.0)};
        if (std::norm(va) >= std::norm(vd)) {
            v[0] = cplx(g);
            v[2] = va;
        } else {
            v[0] = vd;
            v[2] = cplx(g);
        }
        return v;
    };

    std::array<ComplexMode, 2> out{make_mode(l1, vec_for(l1)), make_mode(l2, vec_for(l2))};
    if (mode_order(out[1], out[0])) std::swap(out[0], out[1]);
    return out;
}

std::array<ComplexMode, 3> polariton_modes_3x3(double e_plus, double e_minus,
                                               double gamma_x, double ec, double gamma_c,
                                               double g_plus, double g_minus) {
    if (gamma_x < 0.0 || gamma_c < 0.0 || g_plus < 0.0 || g_minus < 0.0)
        throw std::domain_error("polariton_modes_3x3: negative input");

    // A decoupled branch reduces the problem exactly to the two-mode case.
    if (g_plus == 0.0 || g_minus == 0.0) {
        const bool plus_decoupled = (g_plus == 0.0);
        const double e_bare = plus_decoupled ? e_plus : e_minus;
        const double e_live = plus_decoupled ? e_minus : e_plus;
        const double g_live = plus_decoupled ? g_minus : g_plus;
        const auto doublet = polariton_modes_2x2(e_live, gamma_x, ec, gamma_c, g_live);

        std::array<ComplexMode, 3> out;
        ComplexMode bare;
        bare.energy_ueV = e_bare;
        bare.half_linewidth_ueV = gamma_x / 2.0;
        bare.weights = plus_decoupled ? std::array<double, 3>{1.0, 0.0, 0.0}
                                      : std::array<double, 3>{0.0, 1.0, 0.0};
        for (int i = 0; i < 2; ++i) {
            out[i] = doublet[i];
            if (!plus_decoupled) std::swap(out[i].weights[0], out[i].weights[1]);
        }
        out[2] = bare;
        std::sort(out.begin(), out.end(), mode_order);
        return out;
    }

    const std::array<std::array<cplx, 3>, 3> m{
        std::array<cplx, 3>{cplx(e_plus, -gamma_x / 2.0), cplx(0.0), cplx(g_plus)},
        std::array<cplx, 3>{cplx(0.0), cplx(e_minus, -gamma_x / 2.0), cplx(g_minus)},
        std::array<cplx, 3>{cplx(g_plus), cplx(g_minus), cplx(ec, -gamma_c / 2.0)}};

    // Shift by the centroid so the characteristic polynomial is formed from
    // detuning-scale quantities rather than absolute energies.
    const cplx shift = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    std::array<std::array<cplx, 3>, 3> a = m;
    for (int i = 0; i < 3; ++i) a[i][i] -= shift;

    const cplx minor_sum = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) +
                           (a[0][0] * a[2][2] - a[0][2] * a[2][0]) +
                           (a[1][1] * a[2][2] - a[1][2] * a[2][1]);
    const cplx det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                     a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                     a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);

    const auto ts = cubic_roots(minor_sum, -det);

    std::array<ComplexMode, 3> out;
    for (int k = 0; k < 3; ++k) {
        std::array<std::array<cplx, 3>, 3> b = a;
        for (int i = 0; i < 3; ++i) b[i][i] -= ts[k];
        out[k] = make_mode(ts[k] + shift, null_vector(b));
    }
    std::sort(out.begin(), out.end(), mode_order);
    return out;
}

double resonance_field(const ExcitonParams& exc, SpinBranch branch, const CavityParams& cav) {
    const double gamma1 = zeeman_rate(exc);
    const double gamma2 = exc.gamma2_ueV_per_T2;
    const double linear = branch == SpinBranch::plus_one ? -gamma1 : gamma1;
    const double offset = exc.e0_ueV - cav.ec_ueV;

    // gamma2 B^2 + linear B + offset = 0, smallest root with B >= 0.
    constexpr double kTiny = 1e-12;
    if (gamma2 == 0.0) {
        if (linear == 0.0) {
            if (std::abs(offset) < kTiny) return 0.0;
            throw std::domain_error("resonance_field: unreachable resonance");
        }
        const double b = -offset / linear;
        if (b >= -kTiny) return std::max(b, 0.0);
        throw std::domain_error("resonance_field: unreachable resonance");
    }

    const double disc = linear * linear - 4.0 * gamma2 * offset;
    if (disc < 0.0) throw std::domain_error("resonance_field: unreachable resonance");
    const double sq = std::sqrt(disc);
    const double r1 = (-linear - sq) / (2.0 * gamma2);
    const double r2 = (-linear + sq) / (2.0 * gamma2);
    const double lo = std::min(r1, r2);
    const double hi = std::max(r1, r2);
    if (lo >= -kTiny) return std::max(lo, 0.0);
    if (hi >= -kTiny) return std::max(hi, 0.0);
    throw std::domain_error("resonance_field: unreachable resonance");
}

} // namespace qdcav
