#include "echoform/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace echoform {

namespace {

// Linear interpolation of a form function onto an arbitrary frequency,
// zero outside the tabulated grid.
std::complex<double> interp_ff(const FormFunction& ff, double f) {
    const auto& g = ff.freq_hz;
    if (g.empty() || f < g.front() || f > g.back()) return {};
    const auto it = std::lower_bound(g.begin(), g.end(), f);
    const std::size_t hi = static_cast<std::size_t>(std::distance(g.begin(), it));
    if (hi == 0) return ff.values.front();
    const std::size_t lo = hi - 1;
    const double t = (f - g[lo]) / (g[hi] - g[lo]);
    return ff.values[lo] + t * (ff.values[hi] - ff.values[lo]);
}

// Default gate window used to measure in-gate signal power (two-way delays of
// the 1.5..3.0 m bracket in water).
constexpr double kWaterSoundSpeed = 1480.0;
constexpr double kGateBeginS = 2.0 * kGateMinRangeM / kWaterSoundSpeed;
constexpr double kGateEndS = 2.0 * kGateMaxRangeM / kWaterSoundSpeed;

std::mt19937_64 seeded_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace

Waveform synthesize_echo(const Waveform& pulse, const FormFunction& ff, double range_m,
                         const FluidMedium& host, int n_fft) {
    validate(host);
    if (!(range_m > 0)) throw ParameterError("synthesize_echo: range must be positive");
    const double fs = pulse.sample_rate_hz;
    const double delay_s = 2.0 * range_m / host.sound_speed_m_s;
    if (delay_s * fs >= n_fft)
        throw ParameterError("synthesize_echo: two-way delay exceeds the transform window");

    Spectrum sp = forward_transform(pulse, n_fft);
    const double c = host.sound_speed_m_s;
    for (std::size_t i = 0; i < sp.values.size(); ++i) {
        const double f = sp.freq_hz[i];
        if (f < 1.0e3) {  // 1/|k| diverges towards DC; far below the band anyway
            sp.values[i] = 0.0;
            continue;
        }
        const double k = 2.0 * std::numbers::pi * f / c;
        // Physics values use the exp(-i w t) convention; DFT bins use the
        // opposite sign, so the form function is conjugated and the conjugated
        // propagation factor exp(-i w tau) keeps the physical two-way delay.
        const std::complex<double> f_inf = std::conj(interp_ff(ff, f));
        const std::complex<double> prop =
            std::polar(1.0, -2.0 * std::numbers::pi * f * delay_s);
        sp.values[i] *= f_inf * prop / (k * range_m * range_m);
    }
    Waveform out = inverse_transform(sp, n_fft);
    // Reconstructing fs from the bin spacing loses a few ulps; keep it exact.
    out.sample_rate_hz = fs;
    return out;
}

Waveform inject_direct_signal(const Waveform& recording, const Waveform& pulse) {
    if (recording.samples.size() <= pulse.samples.size())
        throw ParameterError("inject_direct_signal: recording shorter than pulse");
    double echo_peak = 0.0;
    for (double v : recording.samples) echo_peak = std::max(echo_peak, std::abs(v));
    double pulse_peak = 0.0;
    for (double v : pulse.samples) pulse_peak = std::max(pulse_peak, std::abs(v));
    const double scale = (pulse_peak > 0.0) ? 10.0 * echo_peak / pulse_peak : 0.0;

    Waveform out = recording;
    for (std::size_t i = 0; i < pulse.samples.size(); ++i) out.samples[i] += scale * pulse.samples[i];
    return out;
}

Waveform add_noise(const Waveform& w, double snr_db, std::uint64_t seed) {
    if (std::isinf(snr_db) && snr_db > 0) return w;

    const double fs = w.sample_rate_hz;
    int gate_begin = static_cast<int>(std::lround(kGateBeginS * fs));
    int gate_end = static_cast<int>(std::lround(kGateEndS * fs));
    gate_begin = std::clamp(gate_begin, 0, static_cast<int>(w.samples.size()));
    gate_end = std::clamp(gate_end, 0, static_cast<int>(w.samples.size()));

    double power = 0.0;
    int count = 0;
    for (int i = gate_begin; i < gate_end; ++i, ++count) power += w.samples[i] * w.samples[i];
    if (count == 0 || power == 0.0) {  // fall back to full-signal power
        power = 0.0;
        count = static_cast<int>(w.samples.size());
        for (double v : w.samples) power += v * v;
    }
    if (count == 0 || power <= 0.0) throw ParameterError("add_noise: zero-energy input");
    power /= count;

    const double noise_power = power / std::pow(10.0, snr_db / 10.0);
    const double sigma = std::sqrt(noise_power);

    auto rng = seeded_rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    Waveform out = w;
    for (double& v : out.samples) v += gauss(rng);
    return out;
}

Waveform add_clutter(const Waveform& w, const Waveform& pulse, std::uint64_t seed) {
    if (w.duration_s() < 0.030)
        throw ParameterError("add_clutter: recording must be at least 30 ms long");
    double echo_peak = 0.0;
    for (double v : w.samples) echo_peak = std::max(echo_peak, std::abs(v));
    if (echo_peak == 0.0) echo_peak = 1.0;
    double pulse_peak = 0.0;
    for (double v : pulse.samples) pulse_peak = std::max(pulse_peak, std::abs(v));

    auto rng = seeded_rng(seed);
    std::uniform_int_distribution<int> n_dist(3, 6);
    // Wall/bottom paths in the 3x4x2 m tank arrive well after the target gate.
    const double lo = kGateEndS + 5.0e-4;
    const double hi = std::max(lo + 1.0e-3, w.duration_s() - pulse.duration_s() - 1.0e-3);
    std::uniform_real_distribution<double> delay_dist(lo, hi);
    std::uniform_real_distribution<double> amp_dist(0.1, 1.0);

    Waveform out = w;
    const int n_clutter = n_dist(rng);
    for (int c = 0; c < n_clutter; ++c) {
        const int start = static_cast<int>(std::lround(delay_dist(rng) * w.sample_rate_hz));
        const double amp = amp_dist(rng) * echo_peak / (pulse_peak > 0 ? pulse_peak : 1.0);
        for (std::size_t i = 0; i < pulse.samples.size(); ++i) {
            const std::size_t k = start + i;
            if (k < out.samples.size()) out.samples[k] += amp * pulse.samples[i];
        }
    }
    return out;
}

DatasetParams default_dataset_params() {
    DatasetParams p;
    p.shell_material = preset_solid("aluminium");
    p.host = preset_fluid("water");
    return p;
}

FormFunction scene_form_function(const ShellTarget& target, double band_lo_hz, double band_hi_hz,
                                 int n_points) {
    std::vector<double> grid(n_points);
    for (int i = 0; i < n_points; ++i)
        grid[i] = band_lo_hz + (band_hi_hz - band_lo_hz) * i / (n_points - 1);
    return form_function_shell(target, grid);
}

Waveform synthesize_scene(const SceneConfig& scene, const Waveform& pulse, double ff_band_lo_hz,
                          double ff_band_hi_hz, int ff_grid_points) {
    int n_fft = static_cast<int>(std::lround(scene.recording_duration_s * pulse.sample_rate_hz));
    if (n_fft % 2 != 0) ++n_fft;
    const FormFunction ff =
        scene_form_function(scene.target, ff_band_lo_hz, ff_band_hi_hz, ff_grid_points);

    Waveform rec = synthesize_echo(pulse, ff, scene.range_m, scene.target.host, n_fft);
    rec = inject_direct_signal(rec, pulse);
    if (scene.clutter_enabled) rec = add_clutter(rec, pulse, scene.seed ^ 0x9e3779b97f4a7c15ull);
    rec = add_noise(rec, scene.snr_db, scene.seed);
    return rec;
}

std::vector<LabeledRecording> generate_dataset(const DatasetParams& params, const Waveform& pulse,
                                               std::uint64_t master_seed) {
    if (params.n_per_class < 1) throw ParameterError("generate_dataset: n_per_class must be >= 1");

    DatasetParams p = params;
    if (p.shell_material.density_kg_m3 == 0.0) p.shell_material = preset_solid("aluminium");
    if (p.host.density_kg_m3 == 0.0) p.host = preset_fluid("water");

    const int total = 2 * p.n_per_class;
    std::vector<LabeledRecording> out(total);

    for (int idx = 0; idx < total; ++idx) {
        // Independent per-example stream so parallel and serial agree bit-for-bit.
        std::mt19937_64 rng(master_seed * 0x100000001b3ull + static_cast<std::uint64_t>(idx));
        std::uniform_real_distribution<double> u01(0.0, 1.0);

        SceneConfig scene;
        scene.target.outer_radius_m = p.radius_min_m + (p.radius_max_m - p.radius_min_m) * u01(rng);
        scene.target.thickness_m =
            p.thickness_min_m + (p.thickness_max_m - p.thickness_min_m) * u01(rng);
        scene.range_m = p.range_min_m + (p.range_max_m - p.range_min_m) * u01(rng);
        scene.snr_db = p.snr_min_db + (p.snr_max_db - p.snr_min_db) * u01(rng);
        scene.target.shell = p.shell_material;
        scene.target.host = p.host;
        scene.clutter_enabled = p.clutter_enabled;
        scene.recording_duration_s = p.recording_duration_s;
        scene.seed = rng();

        const FillerClass label = (idx % 2 == 0) ? FillerClass::air : FillerClass::water;
        scene.target.filler = preset_fluid(to_string(label));

        LabeledRecording& rec = out[idx];
        rec.label = label;
        rec.truth = scene;
        rec.recording =
            synthesize_scene(scene, pulse, p.ff_band_lo_hz, p.ff_band_hi_hz, p.ff_grid_points);
    }
    return out;
}

}  // namespace echoform
