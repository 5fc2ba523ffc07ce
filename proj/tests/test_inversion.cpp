#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>

#include "echoform/inversion.hpp"
#include "echoform/synth.hpp"

using namespace echoform;

namespace {

Waveform default_pulse() { return make_chirp(160.0e3, 30.0e3, 1.0e-3, 1.0e6); }

ShellTarget reference_shell(const char* filler) {
    ShellTarget t;
    t.outer_radius_m = 0.050;
    t.thickness_m = 0.005;
    t.shell = preset_solid("aluminium");
    t.filler = preset_fluid(filler);
    t.host = preset_fluid("water");
    return t;
}

SceneConfig clean_scene(double range_m, const char* filler) {
    SceneConfig s;
    s.target = reference_shell(filler);
    s.range_m = range_m;
    s.snr_db = std::numeric_limits<double>::infinity();
    s.clutter_enabled = false;
    s.seed = 1;
    return s;
}

}  // namespace

TEST_CASE("range arithmetic r = delta_t c / 2") {
    CHECK(estimate_range(0.002, 1500.0) == doctest::Approx(1.5));
    CHECK(estimate_range(0.004, 1500.0) == doctest::Approx(3.0));
    CHECK_THROWS_AS(estimate_range(-1.0, 1500.0), ParameterError);
    CHECK_THROWS_AS(estimate_range(0.002, 0.0), ParameterError);
}

TEST_CASE("segmentation delay matches the two-way surface travel time") {
    const Waveform pulse = default_pulse();
    const SceneConfig scene = clean_scene(2.0, "air");
    const double c = scene.target.host.sound_speed_m_s;
    const Waveform rec = synthesize_scene(scene, pulse);
    const SegmentationResult seg = segment_echo(rec, pulse, c);

    // The first echo peak marks the object surface, so the reference delay is
    // the two-way time to range minus outer radius.
    const double expect_s = 2.0 * (scene.range_m - scene.target.outer_radius_m) / c;
    CHECK(std::abs(seg.delta_t_s - expect_s) * 1.0e6 <= 2.0);  // within 2 samples
    CHECK(seg.segment.samples.size() == 2000);
    CHECK(seg.segment.sample_rate_hz == 1.0e6);
}

TEST_CASE("noise-only recordings raise NoDetectionError") {
    const Waveform pulse = default_pulse();
    for (std::uint64_t seed : {4ull, 5ull, 6ull}) {
        Waveform rec;
        rec.sample_rate_hz = 1.0e6;
        rec.samples.assign(30000, 0.0);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        for (double& v : rec.samples) v = g(rng);
        Waveform with_direct = inject_direct_signal(rec, pulse);
        CHECK_THROWS_AS(segment_echo(with_direct, pulse, 1480.0), NoDetectionError);
    }
}

TEST_CASE("peak ordering follows range ordering") {
    const Waveform pulse = default_pulse();
    const double c = 1480.0;
    const Waveform near_rec = synthesize_scene(clean_scene(1.6, "water"), pulse);
    const Waveform far_rec = synthesize_scene(clean_scene(2.8, "water"), pulse);
    const SegmentationResult a = segment_echo(near_rec, pulse, c);
    const SegmentationResult b = segment_echo(far_rec, pulse, c);
    CHECK(a.peak_index < b.peak_index);
    CHECK(a.delta_t_s < b.delta_t_s);
    CHECK(estimate_range(a.delta_t_s, c) < estimate_range(b.delta_t_s, c));
}

TEST_CASE("segmentation input validation") {
    const Waveform pulse = default_pulse();
    Waveform rec;
    rec.sample_rate_hz = 1.0e6;
    rec.samples.assign(3000, 0.0);  // shorter than the gate
    CHECK_THROWS_AS(segment_echo(rec, pulse, 1480.0), ParameterError);
    rec.samples.assign(30000, 0.0);
    CHECK_THROWS_AS(segment_echo(rec, pulse, -1.0), ParameterError);
}

TEST_CASE("zero segment estimates a zero form function") {
    const Waveform pulse = default_pulse();
    Waveform segment;
    segment.sample_rate_hz = 1.0e6;
    segment.samples.assign(2000, 0.0);
    const FormFunction ff = estimate_form_function(segment, pulse, 2.0, preset_fluid("water"),
                                                   {30.0e3, 160.0e3});
    REQUIRE(!ff.values.empty());
    for (const auto& v : ff.values) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("estimation band must sit inside the pulse band") {
    const Waveform pulse = default_pulse();
    Waveform segment;
    segment.sample_rate_hz = 1.0e6;
    segment.samples.assign(2000, 0.0);
    const FluidMedium water = preset_fluid("water");
    CHECK_THROWS_AS(estimate_form_function(segment, pulse, 2.0, water, {200.0e3, 400.0e3}),
                    IllConditionedBandError);
    CHECK_THROWS_AS(estimate_form_function(segment, pulse, -2.0, water, {30.0e3, 160.0e3}),
                    ParameterError);
    CHECK_THROWS_AS(estimate_form_function(segment, pulse, 2.0, water, {160.0e3, 30.0e3}),
                    ParameterError);
}

TEST_CASE("recovered spectrum shape is pulse-independent") {
    // The estimated |f_inf| of the same target must agree between an up-chirp
    // and a down-chirp interrogation (correlation >= 0.95 in band).
    const FluidMedium water = preset_fluid("water");
    const double r = 2.0;
    const int n_fft = 32768;
    const FormFunction analytic =
        scene_form_function(reference_shell("water"), 25.0e3, 170.0e3, 1024);

    auto estimate_mag = [&](const Waveform& pulse) {
        const Waveform echo = synthesize_echo(pulse, analytic, r, water, n_fft);
        const FormFunction est =
            estimate_form_function(echo, pulse, r, water, {30.0e3, 160.0e3}, 0.0, n_fft);
        std::vector<double> mag(est.values.size());
        for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(est.values[i]);
        return mag;
    };

    const std::vector<double> down = estimate_mag(make_chirp(160.0e3, 30.0e3, 1.0e-3, 1.0e6));
    const std::vector<double> up = estimate_mag(make_chirp(30.0e3, 160.0e3, 1.0e-3, 1.0e6));
    REQUIRE(down.size() == up.size());

    double sd = 0, su = 0;
    for (std::size_t i = 0; i < down.size(); ++i) { sd += down[i]; su += up[i]; }
    const double md = sd / down.size(), mu = su / up.size();
    double num = 0, dd = 0, du = 0;
    for (std::size_t i = 0; i < down.size(); ++i) {
        num += (down[i] - md) * (up[i] - mu);
        dd += (down[i] - md) * (down[i] - md);
        du += (up[i] - mu) * (up[i] - mu);
    }
    CHECK(num / std::sqrt(dd * du) >= 0.95);
}

TEST_CASE("end-to-end range estimation across random noisy scenes") {
    const Waveform pulse = default_pulse();
    const FluidMedium water = preset_fluid("water");
    const double c = water.sound_speed_m_s;
    const double budget = c / 1.0e6;  // c/(2 fs) + one sample-equivalent

    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        SceneConfig scene;
        scene.target.outer_radius_m = 0.03 + 0.05 * u01(rng);
        scene.target.thickness_m = 0.002 + 0.006 * u01(rng);
        scene.target.shell = preset_solid("aluminium");
        scene.target.host = water;
        scene.target.filler = preset_fluid((i % 2) ? "air" : "water");
        scene.range_m = 1.6 + 1.3 * u01(rng);
        scene.snr_db = 10.0 + 20.0 * u01(rng);
        scene.clutter_enabled = true;
        scene.seed = rng();
        const Waveform rec = synthesize_scene(scene, pulse);
        const SegmentationResult seg = segment_echo(rec, pulse, c);
        const double r_est = estimate_range(seg.delta_t_s, c);
        const double r_true = scene.range_m - scene.target.outer_radius_m;
        CHECK(std::abs(r_est - r_true) <= budget);
    }
}
