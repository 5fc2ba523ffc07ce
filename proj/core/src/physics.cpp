#include "echoform/physics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace echoform {

void validate(const FluidMedium& m) {
    if (!(m.density_kg_m3 > 0) || !std::isfinite(m.density_kg_m3) || !(m.sound_speed_m_s > 0) ||
        !std::isfinite(m.sound_speed_m_s))
        throw ParameterError("FluidMedium: density and sound speed must be positive and finite");
}

void validate(const ElasticSolid& s) {
    if (!(s.density_kg_m3 > 0) || !(s.shear_speed_m_s > 0) ||
        !(s.longitudinal_speed_m_s > s.shear_speed_m_s))
        throw ParameterError("ElasticSolid: require density > 0, c_L > c_T > 0");
}

void validate(const ShellTarget& t) {
    validate(t.shell);
    validate(t.filler);
    validate(t.host);
    if (!(t.thickness_m > 0) || !(t.thickness_m < t.outer_radius_m))
        throw ParameterError("ShellTarget: require 0 < thickness < outer radius");
}

FluidMedium preset_fluid(const std::string& name) {
    if (name == "water") return {1000.0, 1480.0};
    if (name == "air") return {1.29, 343.0};
    throw ParameterError("unknown fluid preset: " + name);
}

ElasticSolid preset_solid(const std::string& name) {
    if (name == "aluminium") return {2700.0, 6420.0, 3040.0};
    throw ParameterError("unknown solid preset: " + name);
}

int truncation_order(double ka_max) {
    if (!(ka_max > 0)) throw ParameterError("truncation_order: ka_max must be positive");
    return static_cast<int>(std::ceil(ka_max + 4.0 * std::cbrt(ka_max) + 10.0));
}

SphBesselTable spherical_bessel_table(int n_max, double x) {
    if (!(x > 0)) throw DomainError("spherical_bessel_table: x must be positive");
    if (n_max < 0) throw ParameterError("spherical_bessel_table: n_max must be >= 0");

    SphBesselTable t;
    t.j.resize(n_max + 1);
    t.y.resize(n_max + 1);
    t.jp.resize(n_max + 1);
    t.yp.resize(n_max + 1);

    const double sx = std::sin(x), cx = std::cos(x);
    const double j0 = sx / x;
    const double j1 = sx / (x * x) - cx / x;

    if (n_max <= static_cast<int>(x)) {
        // Upward recurrence is stable while n < x.
        t.j[0] = j0;
        if (n_max >= 1) t.j[1] = j1;
        for (int n = 1; n < n_max; ++n) t.j[n + 1] = (2 * n + 1) / x * t.j[n] - t.j[n - 1];
    } else {
        // Miller's downward recurrence from a start order well above n_max,
        // normalized against whichever of j0/j1 is farther from a zero.
        const int start =
            n_max + 20 + static_cast<int>(std::ceil(2.0 * std::sqrt(static_cast<double>(n_max) + x)));
        std::vector<double> f(n_max + 2, 0.0);
        double f_hi = 0.0;     // f_{k+1}
        double f_k = 1e-280;   // f_k, arbitrary tiny seed at k = start
        for (int k = start; k >= 1; --k) {
            const double f_lo = (2.0 * k + 1.0) / x * f_k - f_hi;
            f_hi = f_k;
            f_k = f_lo;
            if (std::abs(f_k) > 1e250) {  // rescale to dodge overflow
                constexpr double s = 1e-250;
                f_k *= s;
                f_hi *= s;
                for (double& v : f) v *= s;
            }
            if (k - 1 <= n_max + 1) f[k - 1] = f_k;
        }
        const double scale = (std::abs(j0) >= std::abs(j1)) ? j0 / f[0] : j1 / f[1];
        for (int n = 0; n <= n_max; ++n) t.j[n] = f[n] * scale;
    }

    // y by upward recurrence from the closed forms; always stable (y grows).
    t.y[0] = -cx / x;
    if (n_max >= 1) t.y[1] = -cx / (x * x) - sx / x;
    for (int n = 1; n < n_max; ++n) {
        t.y[n + 1] = (2 * n + 1) / x * t.y[n] - t.y[n - 1];
        if (!std::isfinite(t.y[n + 1]) || std::abs(t.y[n + 1]) > 1e290)
            throw OverflowError("spherical_bessel_table: y_n overflow at n=" + std::to_string(n + 1) +
                                ", x=" + std::to_string(x));
    }

    // z_n' = z_{n-1} - (n+1)/x * z_n
    t.jp[0] = -((n_max >= 1) ? t.j[1] : j1);
    t.yp[0] = -(-cx / (x * x) - sx / x);
    if (n_max >= 1) {
        t.yp[0] = -t.y[1];
        for (int n = 1; n <= n_max; ++n) {
            t.jp[n] = t.j[n - 1] - (n + 1) / x * t.j[n];
            t.yp[n] = t.y[n - 1] - (n + 1) / x * t.y[n];
        }
    }
    return t;
}

namespace {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};

// Gaussian elimination with partial pivoting on an m x m complex system,
// with row/column equilibration so the mixed-magnitude Bessel columns of the
// shell system stay solvable. Returns x (solution in original scaling).
template <int M>
std::array<cplx, M> solve_dense(std::array<std::array<cplx, M>, M> a, std::array<cplx, M> rhs,
                                bool& singular) {
    singular = false;
    std::array<double, M> col_scale;
    for (int j = 0; j < M; ++j) {
        double mx = 0.0;
        for (int i = 0; i < M; ++i) mx = std::max(mx, std::abs(a[i][j]));
        col_scale[j] = (mx > 0.0) ? 1.0 / mx : 1.0;
        for (int i = 0; i < M; ++i) a[i][j] *= col_scale[j];
    }
    for (int i = 0; i < M; ++i) {
        double mx = 0.0;
        for (int j = 0; j < M; ++j) mx = std::max(mx, std::abs(a[i][j]));
        const double s = (mx > 0.0) ? 1.0 / mx : 1.0;
        for (int j = 0; j < M; ++j) a[i][j] *= s;
        rhs[i] *= s;
    }

    for (int col = 0; col < M; ++col) {
        int piv = col;
        for (int r = col + 1; r < M; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-300) {
            singular = true;
            return {};
        }
        if (piv != col) {
            std::swap(a[piv], a[col]);
            std::swap(rhs[piv], rhs[col]);
        }
        for (int r = col + 1; r < M; ++r) {
            const cplx m = a[r][col] / a[col][col];
            if (m == cplx{}) continue;
            for (int j = col; j < M; ++j) a[r][j] -= m * a[col][j];
            rhs[r] -= m * rhs[col];
        }
    }
    std::array<cplx, M> x{};
    for (int i = M - 1; i >= 0; --i) {
        cplx acc = rhs[i];
        for (int j = i + 1; j < M; ++j) acc -= a[i][j] * x[j];
        x[i] = acc / a[i][i];
    }
    for (int j = 0; j < M; ++j) x[j] *= col_scale[j];
    return x;
}

struct ModeTables {
    SphBesselTable host_a;    // k3 * a
    SphBesselTable shell_La;  // kL * a
    SphBesselTable shell_Ta;  // kT * a
    SphBesselTable shell_Lb;  // kL * b
    SphBesselTable shell_Tb;  // kT * b
    SphBesselTable filler_b;  // k2 * b
};

// Scattered-mode coefficient A_n of the fluid-filled elastic shell.
// Unknowns: [A (scattered, host), B/C (shell longitudinal j/y), D/E (shell
// shear j/y), F (filler)]. Equations: u_r and sigma_rr continuity at r=a and
// r=b, sigma_rtheta = 0 at both shell surfaces. n = 0 drops the shear
// unknowns and the shear-stress rows (no tangential motion).
cplx shell_mode_coefficient(int n, double omega, const ShellTarget& tg, const ModeTables& tb,
                            bool& singular) {
    const double a = tg.outer_radius_m;
    const double b = tg.inner_radius_m();
    const double c3 = tg.host.sound_speed_m_s, rho3 = tg.host.density_kg_m3;
    const double c2 = tg.filler.sound_speed_m_s, rho2 = tg.filler.density_kg_m3;
    const double cL = tg.shell.longitudinal_speed_m_s, cT = tg.shell.shear_speed_m_s;
    const double rho1 = tg.shell.density_kg_m3;
    const double mu = rho1 * cT * cT;

    const double k3 = omega / c3, k2 = omega / c2, kL = omega / cL, kT = omega / cT;
    const double x3a = k3 * a, xLa = kL * a, zTa = kT * a;
    const double xLb = kL * b, zTb = kT * b, x2b = k2 * b;
    const double nn = static_cast<double>(n) * (n + 1);

    auto J = [](const SphBesselTable& t, int m) { return t.j[m]; };
    auto Jp = [](const SphBesselTable& t, int m) { return t.jp[m]; };
    auto Y = [](const SphBesselTable& t, int m) { return t.y[m]; };
    auto Yp = [](const SphBesselTable& t, int m) { return t.yp[m]; };

    const cplx h_a = cplx{J(tb.host_a, n), Y(tb.host_a, n)};
    const cplx hp_a = cplx{Jp(tb.host_a, n), Yp(tb.host_a, n)};
    const double j_a = J(tb.host_a, n), jp_a = Jp(tb.host_a, n);

    // Radial-function factors of the shell displacement/stress fields at radius
    // r (with x = kL*r, z = kT*r):
    //   u_r        phi: kL*Z'(x)                 psi: n(n+1)/r * Z(z)
    //   sigma_rr   phi: (2mu/r^2)[(nn - z^2/2) Z(x) - 2x Z'(x)]
    //              psi: (2mu/r^2)  nn [z Z'(z) - Z(z)]
    //   sigma_rt   phi: (2mu/r^2)[x Z'(x) - Z(x)]
    //              psi: (2mu/r^2)[(nn - 1 - z^2/2) Z(z) - z Z'(z)]
    auto ur_phi = [&](double Zp) { return kL * Zp; };
    auto ur_psi = [&](double Z, double r) { return nn * Z / r; };
    auto srr_phi = [&](double Z, double Zp, double x, double z, double r) {
        return 2.0 * mu / (r * r) * ((nn - 0.5 * z * z) * Z - 2.0 * x * Zp);
    };
    auto srr_psi = [&](double Z, double Zp, double z, double r) {
        return 2.0 * mu / (r * r) * nn * (z * Zp - Z);
    };
    auto srt_phi = [&](double Z, double Zp, double x, double r) {
        return 2.0 * mu / (r * r) * (x * Zp - Z);
    };
    auto srt_psi = [&](double Z, double Zp, double z, double r) {
        return 2.0 * mu / (r * r) * ((nn - 1.0 - 0.5 * z * z) * Z - z * Zp);
    };

    const double w2 = omega * omega;

    if (n == 0) {
        // [A, B, C, F]
        std::array<std::array<cplx, 4>, 4> m{};
        std::array<cplx, 4> rhs{};
        // u_r at a
        m[0][0] = k3 * hp_a;
        m[0][1] = -ur_phi(Jp(tb.shell_La, 0));
        m[0][2] = -ur_phi(Yp(tb.shell_La, 0));
        m[0][3] = 0.0;
        rhs[0] = -k3 * jp_a;
        // sigma_rr at a (shell) = -p_host
        m[1][0] = rho3 * w2 * h_a;
        m[1][1] = srr_phi(J(tb.shell_La, 0), Jp(tb.shell_La, 0), xLa, zTa, a);
        m[1][2] = srr_phi(Y(tb.shell_La, 0), Yp(tb.shell_La, 0), xLa, zTa, a);
        m[1][3] = 0.0;
        rhs[1] = -rho3 * w2 * j_a;
        // u_r at b
        m[2][0] = 0.0;
        m[2][1] = ur_phi(Jp(tb.shell_Lb, 0));
        m[2][2] = ur_phi(Yp(tb.shell_Lb, 0));
        m[2][3] = -k2 * Jp(tb.filler_b, 0);
        rhs[2] = 0.0;
        // sigma_rr at b (shell) = -p_filler
        m[3][0] = 0.0;
        m[3][1] = srr_phi(J(tb.shell_Lb, 0), Jp(tb.shell_Lb, 0), xLb, zTb, b);
        m[3][2] = srr_phi(Y(tb.shell_Lb, 0), Yp(tb.shell_Lb, 0), xLb, zTb, b);
        m[3][3] = rho2 * w2 * J(tb.filler_b, 0);
        rhs[3] = 0.0;
        auto x = solve_dense<4>(m, rhs, singular);
        return singular ? cplx{} : x[0];
    }

    std::array<std::array<cplx, 6>, 6> m{};
    std::array<cplx, 6> rhs{};

    // Row 0: u_r continuity at r = a.
    m[0][0] = k3 * hp_a;
    m[0][1] = -ur_phi(Jp(tb.shell_La, n));
    m[0][2] = -ur_phi(Yp(tb.shell_La, n));
    m[0][3] = -ur_psi(J(tb.shell_Ta, n), a);
    m[0][4] = -ur_psi(Y(tb.shell_Ta, n), a);
    m[0][5] = 0.0;
    rhs[0] = -k3 * jp_a;

    // Row 1: sigma_rr(shell) + p_host = 0 at r = a.
    m[1][0] = rho3 * w2 * h_a;
    m[1][1] = srr_phi(J(tb.shell_La, n), Jp(tb.shell_La, n), xLa, zTa, a);
    m[1][2] = srr_phi(Y(tb.shell_La, n), Yp(tb.shell_La, n), xLa, zTa, a);
    m[1][3] = srr_psi(J(tb.shell_Ta, n), Jp(tb.shell_Ta, n), zTa, a);
    m[1][4] = srr_psi(Y(tb.shell_Ta, n), Yp(tb.shell_Ta, n), zTa, a);
    m[1][5] = 0.0;
    rhs[1] = -rho3 * w2 * j_a;

    // Row 2: sigma_rtheta = 0 at r = a.
    m[2][0] = 0.0;
    m[2][1] = srt_phi(J(tb.shell_La, n), Jp(tb.shell_La, n), xLa, a);
    m[2][2] = srt_phi(Y(tb.shell_La, n), Yp(tb.shell_La, n), xLa, a);
    m[2][3] = srt_psi(J(tb.shell_Ta, n), Jp(tb.shell_Ta, n), zTa, a);
    m[2][4] = srt_psi(Y(tb.shell_Ta, n), Yp(tb.shell_Ta, n), zTa, a);
    m[2][5] = 0.0;
    rhs[2] = 0.0;

    // Row 3: u_r continuity at r = b.
    m[3][0] = 0.0;
    m[3][1] = ur_phi(Jp(tb.shell_Lb, n));
    m[3][2] = ur_phi(Yp(tb.shell_Lb, n));
    m[3][3] = ur_psi(J(tb.shell_Tb, n), b);
    m[3][4] = ur_psi(Y(tb.shell_Tb, n), b);
    m[3][5] = -k2 * Jp(tb.filler_b, n);
    rhs[3] = 0.0;

    // Row 4: sigma_rr(shell) + p_filler = 0 at r = b.
    m[4][0] = 0.0;
    m[4][1] = srr_phi(J(tb.shell_Lb, n), Jp(tb.shell_Lb, n), xLb, zTb, b);
    m[4][2] = srr_phi(Y(tb.shell_Lb, n), Yp(tb.shell_Lb, n), xLb, zTb, b);
    m[4][3] = srr_psi(J(tb.shell_Tb, n), Jp(tb.shell_Tb, n), zTb, b);
    m[4][4] = srr_psi(Y(tb.shell_Tb, n), Yp(tb.shell_Tb, n), zTb, b);
    m[4][5] = rho2 * w2 * J(tb.filler_b, n);
    rhs[4] = 0.0;

    // Row 5: sigma_rtheta = 0 at r = b.
    m[5][0] = 0.0;
    m[5][1] = srt_phi(J(tb.shell_Lb, n), Jp(tb.shell_Lb, n), xLb, b);
    m[5][2] = srt_phi(Y(tb.shell_Lb, n), Yp(tb.shell_Lb, n), xLb, b);
    m[5][3] = srt_psi(J(tb.shell_Tb, n), Jp(tb.shell_Tb, n), zTb, b);
    m[5][4] = srt_psi(Y(tb.shell_Tb, n), Yp(tb.shell_Tb, n), zTb, b);
    m[5][5] = 0.0;
    rhs[5] = 0.0;

    auto x = solve_dense<6>(m, rhs, singular);
    return singular ? cplx{} : x[0];
}

ModeTables make_mode_tables(int n_max, double omega, const ShellTarget& tg) {
    const double a = tg.outer_radius_m;
    const double b = tg.inner_radius_m();
    ModeTables t;
    t.host_a = spherical_bessel_table(n_max, omega / tg.host.sound_speed_m_s * a);
    t.shell_La = spherical_bessel_table(n_max, omega / tg.shell.longitudinal_speed_m_s * a);
    t.shell_Ta = spherical_bessel_table(n_max, omega / tg.shell.shear_speed_m_s * a);
    t.shell_Lb = spherical_bessel_table(n_max, omega / tg.shell.longitudinal_speed_m_s * b);
    t.shell_Tb = spherical_bessel_table(n_max, omega / tg.shell.shear_speed_m_s * b);
    t.filler_b = spherical_bessel_table(n_max, omega / tg.filler.sound_speed_m_s * b);
    return t;
}

cplx shell_value_at(double freq, const ShellTarget& tg, int& perturbed) {
    const double omega = 2.0 * std::numbers::pi * freq;
    const double ka = omega / tg.host.sound_speed_m_s * tg.outer_radius_m;
    const int n_max = truncation_order(ka);

    auto eval = [&](double w, bool& any_singular) {
        const double ka_w = w / tg.host.sound_speed_m_s * tg.outer_radius_m;
        ModeTables tables = make_mode_tables(n_max, w, tg);
        cplx sum{};
        any_singular = false;
        double sign = 1.0;  // P_n(cos pi) = (-1)^n
        for (int n = 0; n <= n_max; ++n) {
            bool singular = false;
            const cplx an = shell_mode_coefficient(n, w, tg, tables, singular);
            if (singular) {
                any_singular = true;
                return cplx{};
            }
            sum += sign * (2.0 * n + 1.0) * an;
            sign = -sign;
        }
        return 2.0 / (kI * ka_w) * sum;
    };

    bool singular = false;
    cplx v = eval(omega, singular);
    if (singular || !std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        // Isolated singular system: nudge the frequency and flag the bin.
        bool still_singular = false;
        v = eval(omega * (1.0 + 1e-9), still_singular);
        ++perturbed;
        if (still_singular || !std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericalError("form_function_shell: non-finite result near f=" +
                                 std::to_string(freq) + " Hz");
    }
    return v;
}

}  // namespace

FormFunction form_function_rigid(const std::vector<double>& freq_hz, double radius_m,
                                 const FluidMedium& host) {
    validate(host);
    if (!(radius_m > 0)) throw ParameterError("form_function_rigid: radius must be positive");
    FormFunction ff;
    ff.freq_hz = freq_hz;
    ff.outer_radius_m = radius_m;
    ff.values.resize(freq_hz.size());
    for (std::size_t i = 0; i < freq_hz.size(); ++i) {
        if (!(freq_hz[i] > 0)) throw ParameterError("form_function_rigid: grid must be positive");
        const double ka = 2.0 * std::numbers::pi * freq_hz[i] / host.sound_speed_m_s * radius_m;
        const int n_max = truncation_order(ka);
        const SphBesselTable t = spherical_bessel_table(n_max, ka);
        cplx sum{};
        double sign = 1.0;
        for (int n = 0; n <= n_max; ++n) {
            const cplx hp{t.jp[n], t.yp[n]};
            const cplx bn = -t.jp[n] / hp;
            sum += sign * (2.0 * n + 1.0) * bn;
            sign = -sign;
        }
        ff.values[i] = 2.0 / (kI * ka) * sum;
    }
    return ff;
}

FormFunction form_function_shell(const ShellTarget& target, const std::vector<double>& freq_hz) {
    validate(target);
    FormFunction ff;
    ff.freq_hz = freq_hz;
    ff.outer_radius_m = target.outer_radius_m;
    ff.values.resize(freq_hz.size());
    int perturbed = 0;
    for (std::size_t i = 0; i < freq_hz.size(); ++i) {
        if (!(freq_hz[i] > 0)) throw ParameterError("form_function_shell: grid must be positive");
        ff.values[i] = shell_value_at(freq_hz[i], target, perturbed);
    }
    ff.perturbed_bins = perturbed;
    return ff;
}

}  // namespace echoform
