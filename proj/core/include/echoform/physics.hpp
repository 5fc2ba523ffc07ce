#pragma once

#include <complex>
#include <string>
#include <vector>

#include "echoform/errors.hpp"

namespace echoform {

struct FluidMedium {
    double density_kg_m3 = 0.0;
    double sound_speed_m_s = 0.0;
};

struct ElasticSolid {
    double density_kg_m3 = 0.0;
    double longitudinal_speed_m_s = 0.0;
    double shear_speed_m_s = 0.0;
};

// Two-layer sphere: elastic shell around a fluid filler, immersed in a fluid host.
struct ShellTarget {
    double outer_radius_m = 0.0;
    double thickness_m = 0.0;
    ElasticSolid shell;
    FluidMedium filler;
    FluidMedium host;

    double inner_radius_m() const { return outer_radius_m - thickness_m; }
};

void validate(const FluidMedium& m);
void validate(const ElasticSolid& s);
void validate(const ShellTarget& t);

// Far-field backscatter form function sampled on a frequency grid.
// ka = 2*pi*f/c_host * outer_radius_m.
struct FormFunction {
    std::vector<double> freq_hz;
    std::vector<std::complex<double>> values;
    double outer_radius_m = 0.0;
    // Bins whose boundary-condition system was singular and had to be solved
    // at a relatively perturbed frequency.
    int perturbed_bins = 0;
};

// j_n, y_n and derivatives for n = 0..n_max at fixed argument x > 0.
// j by downward (Miller) recurrence normalized against the closed forms when
// n_max > x, upward otherwise; y always by upward recurrence.
struct SphBesselTable {
    std::vector<double> j;
    std::vector<double> jp;
    std::vector<double> y;
    std::vector<double> yp;
};

SphBesselTable spherical_bessel_table(int n_max, double x);

// Partial-wave series length that converges for arguments up to ka_max:
// ceil(ka_max + 4*ka_max^(1/3) + 10).
int truncation_order(double ka_max);

// Backscatter form function of an impenetrable (rigid) sphere. Reference
// oracle for the series machinery: b_n = -j_n'(ka)/h_n'(ka).
FormFunction form_function_rigid(const std::vector<double>& freq_hz, double radius_m,
                                 const FluidMedium& host);

// Backscatter form function of a fluid-filled elastic spherical shell.
// Per mode and frequency a 6x6 boundary-condition system is solved for the
// scattered coefficient: displacement/normal-stress continuity at both
// interfaces plus vanishing shear stress at both shell surfaces.
// Phase convention is exp(-i*omega*t) with h_n = j_n + i*y_n outgoing.
FormFunction form_function_shell(const ShellTarget& target, const std::vector<double>& freq_hz);

// Handbook presets: "water", "air" / "aluminium".
FluidMedium preset_fluid(const std::string& name);
ElasticSolid preset_solid(const std::string& name);

}  // namespace echoform
