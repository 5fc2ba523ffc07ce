#pragma once

#include <cstdint>
#include <vector>

#include "echoform/physics.hpp"
#include "echoform/signal.hpp"

namespace echoform {

enum class FillerClass { air, water };

inline const char* to_string(FillerClass c) { return c == FillerClass::air ? "air" : "water"; }

// Segmentation gate: a single target sits between 1.5 and 3.0 m, i.e. two-way
// delays of 2*1.5/c .. 2*3.0/c after the transmit arrival.
inline constexpr double kGateMinRangeM = 1.5;
inline constexpr double kGateMaxRangeM = 3.0;

struct SceneConfig {
    double range_m = 2.0;  // source-to-centre distance, within [1.5, 3.0]
    ShellTarget target;
    double snr_db = 20.0;
    bool clutter_enabled = true;
    double recording_duration_s = 0.030;
    std::uint64_t seed = 0;
};

struct LabeledRecording {
    Waveform recording;
    FillerClass label = FillerClass::water;
    SceneConfig truth;
};

// Spectral-domain echo synthesis:
//   FT[s](w) = f_inf(w) * exp(-2jkr) * FT[s_i](w) / (|k| r^2),  k = w/c_host,
// evaluated on the transform bins of an n_fft-point DFT (f_inf linearly
// interpolated onto the bins, zero outside its grid), then inverted to time.
// The form-function values are conjugated onto the DFT sign convention so the
// exp(-2jkr) factor realizes the physical 2r/c two-way delay.
// Bins below 1 kHz are zeroed (the 1/|k| factor diverges at DC).
Waveform synthesize_echo(const Waveform& pulse, const FormFunction& ff, double range_m,
                         const FluidMedium& host, int n_fft);

// Adds the transmit breakthrough: the pulse at sample 0 with amplitude 10x the
// echo peak. Gives the matched filter its reference "first peak" at t ~ 0.
Waveform inject_direct_signal(const Waveform& recording, const Waveform& pulse);

// White Gaussian noise scaled so (in-gate signal power)/(noise power) matches
// snr_db. snr_db = +infinity returns the input unchanged. Deterministic per seed.
Waveform add_noise(const Waveform& w, double snr_db, std::uint64_t seed);

// 3..6 attenuated pulse replicas (tank wall/bottom paths) at random delays
// strictly outside the 2-4 ms target gate. Deterministic per seed.
Waveform add_clutter(const Waveform& w, const Waveform& pulse, std::uint64_t seed);

struct DatasetParams {
    int n_per_class = 430;
    double radius_min_m = 0.030, radius_max_m = 0.080;
    double thickness_min_m = 0.002, thickness_max_m = 0.008;
    double range_min_m = 1.60, range_max_m = 2.90;
    double snr_min_db = 10.0, snr_max_db = 30.0;
    bool clutter_enabled = true;
    double recording_duration_s = 0.030;
    ElasticSolid shell_material;  // defaults to aluminium when unset
    FluidMedium host;             // defaults to water when unset
    // Analytic form-function generation grid (covers the pulse band).
    double ff_band_lo_hz = 28.0e3;
    double ff_band_hi_hz = 162.0e3;
    int ff_grid_points = 1400;
};

DatasetParams default_dataset_params();

// Labeled synthetic recordings, filler alternating air/water, one independent
// RNG stream per example index so generation order never changes the data.
std::vector<LabeledRecording> generate_dataset(const DatasetParams& params, const Waveform& pulse,
                                               std::uint64_t master_seed);

// Analytic form function of a scene's target on a generation grid spanning
// [band_lo, band_hi] with n_points bins.
FormFunction scene_form_function(const ShellTarget& target, double band_lo_hz, double band_hi_hz,
                                 int n_points);

// Full scene assembly used by generate_dataset: echo + direct + clutter + noise.
Waveform synthesize_scene(const SceneConfig& scene, const Waveform& pulse,
                          double ff_band_lo_hz = 28.0e3, double ff_band_hi_hz = 162.0e3,
                          int ff_grid_points = 1400);

}  // namespace echoform
