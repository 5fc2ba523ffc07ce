#include "echoform/inversion.hpp"

#include "echoform/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace echoform {

namespace {

// Multiplier on the median in-gate correlation envelope used as the detection
// threshold. A noise-only gate of ~2000 envelope samples peaks near 3.3x its
// median, so 10x rejects noise while any usable compressed echo sits far above.
constexpr double kThresholdFactor = 10.0;

// Compression-lobe selection. The arrival of interest is the earliest real
// lobe (the surface reflection); elastic re-radiation can produce stronger
// lobes later, and every lobe drags a sidelobe tail that extends hundreds of
// samples to both sides. Starting from the strongest in-gate lobe, the
// detector walks backwards and accepts an earlier local maximum as real only
// when it exceeds the background predicted from the already-accepted lobes via
// the replica autocorrelation envelope (kTmplMaxOffset samples long), scaled
// by kBgMargin for unmodelled lobes and interference, plus kNoiseMargin times
// the median in-gate envelope for noise.
constexpr int kTmplMaxOffset = 600;
constexpr double kBgMargin = 4.0;
constexpr double kNoiseMargin = 5.0;

// Arrival-time refinement reads the lobe's leading edge at this fraction of
// the lobe peak: the edge is formed by the earliest (specular) energy, whereas
// the peak is dragged late by shell reverberation. The edge-to-peak offset of
// the clean replica autocorrelation is added back as calibration.
constexpr double kEdgeLevel = 0.3;

// An elastic shell's impulse response is not an impulse: transmission into the
// shell and internal reverberation stretch the compressed lobe, so its leading
// edge trails the geometric surface arrival. Over the operating ensemble of
// shell targets the measured delay spans about 0.2 to 2.7 samples with median
// near 0.9; subtracting that median centers the arrival-time estimate.
constexpr double kShellEdgeBiasSamples = 0.9;

// Interpolated position where env crosses level*env[peak] on the leading edge.
double leading_edge(const std::vector<double>& env, int peak, double level) {
    const double target = level * env[peak];
    int k = peak;
    while (k > 0 && env[k] > target) --k;
    const double d = env[k + 1] - env[k];
    const double t = (d > 0.0) ? (target - env[k]) / d : 0.0;
    return k + t;
}

// Properties of the replica's own compressed pulse: the peak-to-leading-edge
// offset used to calibrate arrival times, and the envelope sidelobe level as a
// function of distance ahead of the main lobe.
struct ReplicaAnalysis {
    double edge_offset = 0.0;
    std::vector<double> sidelobe;  // sidelobe[d] = env(peak - d) / env(peak), peak-held over +/-2

    double level(int d) const {
        return sidelobe[std::min<int>(std::abs(d), sidelobe.size() - 1)];
    }
};

ReplicaAnalysis analyze_replica(const Waveform& replica) {
    const int n_rep = static_cast<int>(replica.samples.size());
    const int pad_front = std::max(n_rep, kTmplMaxOffset + 8);
    Waveform padded;
    padded.sample_rate_hz = replica.sample_rate_hz;
    padded.samples.assign(2 * pad_front + n_rep, 0.0);
    std::copy(replica.samples.begin(), replica.samples.end(), padded.samples.begin() + pad_front);
    const Waveform acorr = matched_filter(padded, replica);
    const std::vector<double> env = analytic_envelope(acorr.samples);
    int peak = 0;
    for (std::size_t k = 1; k < env.size(); ++k)
        if (env[k] > env[peak]) peak = static_cast<int>(k);

    ReplicaAnalysis ra;
    ra.edge_offset = peak - leading_edge(env, peak, kEdgeLevel);
    ra.sidelobe.assign(kTmplMaxOffset + 1, 0.0);
    for (int d = 0; d <= kTmplMaxOffset; ++d) {
        // Hold the local maximum so envelope nulls between sidelobes do not
        // produce an unrealistically low prediction.
        double m = 0.0;
        for (int k = std::max(0, peak - d - 2); k <= std::min<int>(env.size() - 1, peak - d + 2); ++k)
            m = std::max(m, env[k]);
        ra.sidelobe[d] = m / env[peak];
    }
    return ra;
}

}  // namespace

SegmentationResult segment_echo(const Waveform& recording, const Waveform& replica, double c_host) {
    if (!(c_host > 0)) throw ParameterError("segment_echo: sound speed must be positive");
    const double fs = recording.sample_rate_hz;
    const int seg_len = static_cast<int>(std::lround(kSegmentDurationS * fs));
    const double gate_lo_s = 2.0 * kGateMinRangeM / c_host;
    const double gate_hi_s = 2.0 * kGateMaxRangeM / c_host;
    if (recording.duration_s() < gate_hi_s + kSegmentDurationS)
        throw ParameterError("segment_echo: recording shorter than gate plus segment");

    const Waveform mf = matched_filter(recording, replica);
    const std::vector<double> env = analytic_envelope(mf.samples);

    // Direct arrival: global envelope maximum in the first millisecond.
    const int direct_window = static_cast<int>(std::lround(1.0e-3 * fs));
    int direct_index = 0;
    for (int i = 1; i < std::min<int>(direct_window, env.size()); ++i)
        if (env[i] > env[direct_index]) direct_index = i;

    const int gate_begin = direct_index + static_cast<int>(std::lround(gate_lo_s * fs));
    const int gate_end = direct_index + static_cast<int>(std::lround(gate_hi_s * fs));
    if (gate_end >= static_cast<int>(env.size()))
        throw ParameterError("segment_echo: gate exceeds recording");

    std::vector<double> sorted(env.begin() + gate_begin, env.begin() + gate_end);
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double threshold = kThresholdFactor * sorted[sorted.size() / 2];

    // Strongest in-gate lobe: the detection anchor.
    int strongest = gate_begin;
    for (int i = gate_begin; i < gate_end; ++i)
        if (env[i] > env[strongest]) strongest = i;
    if (env[strongest] < threshold)
        throw NoDetectionError("segment_echo: no in-gate peak above threshold");

    // Backward walk to the earliest real lobe (the surface reflection).
    const ReplicaAnalysis ra = analyze_replica(replica);
    const double median = threshold / kThresholdFactor;
    std::vector<int> accepted = {strongest};
    int earliest = strongest;
    bool grew = true;
    while (grew) {
        grew = false;
        for (int q = earliest - 3; q > gate_begin; --q) {
            if (env[q] < env[q - 1] || env[q] < env[q + 1]) continue;
            double background = 0.0;
            for (int p : accepted) background += ra.level(p - q) * env[p];
            if (env[q] > kBgMargin * background + kNoiseMargin * median) {
                accepted.push_back(q);
                earliest = q;
                grew = true;
                break;
            }
        }
    }
    const int peak_index = earliest;

    // Sub-sample arrival time from the lobe's leading edge.
    const double refined =
        leading_edge(env, peak_index, kEdgeLevel) + ra.edge_offset - kShellEdgeBiasSamples;

    SegmentationResult res;
    res.peak_index = peak_index;
    res.direct_index = direct_index;
    res.delta_t_s = (refined - direct_index) / fs;

    // Rewind one replica length so the segment contains the full echo onset.
    int start = peak_index - static_cast<int>(replica.samples.size()) + 1;
    start = std::clamp(start, 0, static_cast<int>(recording.samples.size()) - seg_len);
    res.segment_start = start;
    res.segment.sample_rate_hz = fs;
    res.segment.samples.assign(recording.samples.begin() + start,
                               recording.samples.begin() + start + seg_len);
    return res;
}

double estimate_range(double delta_t_s, double c_host) {
    if (!(delta_t_s > 0) || !(c_host > 0))
        throw ParameterError("estimate_range: delta_t and sound speed must be positive");
    return delta_t_s * c_host / 2.0;
}

FormFunction estimate_form_function(const Waveform& segment, const Waveform& pulse, double range_m,
                                    const FluidMedium& host, std::pair<double, double> band_hz,
                                    double segment_start_s, int n_fft) {
    validate(host);
    if (!(range_m > 0)) throw ParameterError("estimate_form_function: range must be positive");
    const double fs = segment.sample_rate_hz;
    if (band_hz.first <= 0 || band_hz.second <= band_hz.first || band_hz.second >= fs / 2.0)
        throw ParameterError("estimate_form_function: band must lie inside (0, fs/2)");

    // Place the segment on the transmit clock so the exp(-2jkr) factor cancels
    // the true propagation delay.
    const int offset = static_cast<int>(std::lround(segment_start_s * fs));
    if (offset < 0) throw ParameterError("estimate_form_function: negative segment start");
    const int needed = offset + static_cast<int>(segment.samples.size());
    if (n_fft <= 0) {
        n_fft = 2;
        while (n_fft < needed) n_fft *= 2;
    }
    if (n_fft < needed)
        throw ParameterError("estimate_form_function: n_fft too small for the aligned segment");

    Waveform aligned;
    aligned.sample_rate_hz = fs;
    aligned.samples.assign(offset, 0.0);
    aligned.samples.insert(aligned.samples.end(), segment.samples.begin(), segment.samples.end());

    const Spectrum s = forward_transform(aligned, n_fft);
    const Spectrum si = forward_transform(pulse, n_fft);

    // Band conditioning: the pulse must actually occupy the requested band.
    double peak = 0.0;
    for (const auto& v : si.values) peak = std::max(peak, std::abs(v));
    int band_bins = 0, weak_bins = 0;
    for (std::size_t i = 0; i < si.freq_hz.size(); ++i) {
        if (si.freq_hz[i] < band_hz.first || si.freq_hz[i] > band_hz.second) continue;
        ++band_bins;
        if (std::abs(si.values[i]) < 1.0e-2 * peak) ++weak_bins;  // -40 dB
    }
    if (band_bins == 0 || weak_bins > band_bins / 10)
        throw IllConditionedBandError(
            "estimate_form_function: pulse spectrum below -40 dB over >10% of the band");

    double max_y2 = 0.0;
    for (const auto& v : si.values) max_y2 = std::max(max_y2, std::norm(v));
    const double eps = 1.0e-12 * max_y2;

    FormFunction ff;
    ff.outer_radius_m = 0.0;
    const double c = host.sound_speed_m_s;
    const double delay_s = 2.0 * range_m / c;
    for (std::size_t i = 0; i < si.freq_hz.size(); ++i) {
        const double f = si.freq_hz[i];
        if (f < band_hz.first || f > band_hz.second) continue;
        const double k = 2.0 * std::numbers::pi * f / c;
        const std::complex<double> prop = std::polar(1.0, -2.0 * std::numbers::pi * f * delay_s);
        const std::complex<double> denom = prop * si.values[i];
        const std::complex<double> q =
            s.values[i] * std::conj(denom) / (std::norm(denom) + eps);
        // Conjugate back onto the exp(-i w t) physics convention.
        ff.freq_hz.push_back(f);
        ff.values.push_back(std::conj(k * range_m * range_m * q));
    }
    return ff;
}

FormFunction estimate_form_function(const SegmentationResult& seg, const Waveform& pulse,
                                    const FluidMedium& host, std::pair<double, double> band_hz) {
    const double fs = seg.segment.sample_rate_hz;
    const double r = estimate_range(seg.delta_t_s, host.sound_speed_m_s);
    // Segment start relative to the transmit reference (the direct arrival).
    const double start_s = (seg.segment_start - seg.direct_index) / fs;
    return estimate_form_function(seg.segment, pulse, r, host, band_hz, std::max(start_s, 0.0));
}

}  // namespace echoform
