#include "echoform/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace echoform {

const char* to_string(DescriptorKind k) {
    switch (k) {
        case DescriptorKind::form_function: return "form_function";
        case DescriptorKind::frequency: return "frequency";
        case DescriptorKind::time: return "time";
    }
    return "?";
}

namespace {

// Linear resample of (x, y) samples onto n uniform points over [lo, hi].
std::vector<double> linear_resample(const std::vector<double>& x, const std::vector<double>& y,
                                    double lo, double hi, int n) {
    std::vector<double> out(n);
    std::size_t seg = 0;
    for (int i = 0; i < n; ++i) {
        const double xi = lo + (hi - lo) * i / (n - 1);
        while (seg + 2 < x.size() && x[seg + 1] < xi) ++seg;
        const double x0 = x[seg], x1 = x[seg + 1];
        double t = (x1 > x0) ? (xi - x0) / (x1 - x0) : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        out[i] = y[seg] + t * (y[seg + 1] - y[seg]);
    }
    return out;
}

}  // namespace

Descriptor descriptor_form_function(const FormFunction& ff, double band_lo_hz, double band_hi_hz,
                                    bool log_magnitude) {
    std::vector<double> fx, fy;
    for (std::size_t i = 0; i < ff.freq_hz.size(); ++i) {
        if (ff.freq_hz[i] < band_lo_hz - 1e-9 || ff.freq_hz[i] > band_hi_hz + 1e-9) continue;
        fx.push_back(ff.freq_hz[i]);
        fy.push_back(std::abs(ff.values[i]));
    }
    if (fx.size() < 2)
        throw ParameterError("descriptor_form_function: form function empty over the band");
    if (log_magnitude)
        for (double& v : fy) v = 20.0 * std::log10(std::max(v, 1e-12));

    Descriptor d;
    d.kind = DescriptorKind::form_function;
    d.values = linear_resample(fx, fy, std::max(band_lo_hz, fx.front()),
                               std::min(band_hi_hz, fx.back()), kDescriptorLength);
    return d;
}

Descriptor descriptor_frequency(const Waveform& segment, double band_lo_hz, double band_hi_hz) {
    int n_fft = 2;
    while (n_fft < static_cast<int>(segment.samples.size())) n_fft *= 2;
    const Spectrum s = forward_transform(segment, n_fft);

    std::vector<double> fx, fy;
    for (std::size_t i = 0; i < s.freq_hz.size(); ++i) {
        if (s.freq_hz[i] < band_lo_hz || s.freq_hz[i] > band_hi_hz) continue;
        fx.push_back(s.freq_hz[i]);
        fy.push_back(std::abs(s.values[i]));
    }
    Descriptor d;
    d.kind = DescriptorKind::frequency;
    d.values = linear_resample(fx, fy, fx.front(), fx.back(), kDescriptorLength);
    return d;
}

Descriptor descriptor_time(const Waveform& segment) {
    const int n_in = static_cast<int>(segment.samples.size());
    const int n_out = kDescriptorLength;

    // Windowed-sinc resampler: anti-aliasing cutoff at the output Nyquist,
    // symmetric kernel and symmetric sample grid so reversal commutes.
    const double ratio = static_cast<double>(n_in - 1) / (n_out - 1);
    const double cutoff = 0.5 / std::max(ratio, 1.0);  // cycles per input sample
    const int half_width = 32;

    Descriptor d;
    d.kind = DescriptorKind::time;
    d.values.resize(n_out);
    for (int i = 0; i < n_out; ++i) {
        const double center = i * ratio;
        const int lo = std::max(0, static_cast<int>(std::ceil(center - half_width)));
        const int hi = std::min(n_in - 1, static_cast<int>(std::floor(center + half_width)));
        double acc = 0.0, wsum = 0.0;
        for (int k = lo; k <= hi; ++k) {
            const double t = k - center;
            double sinc = (std::abs(t) < 1e-12)
                              ? 2.0 * cutoff
                              : std::sin(2.0 * std::numbers::pi * cutoff * t) /
                                    (std::numbers::pi * t);
            const double win = 0.5 * (1.0 + std::cos(std::numbers::pi * t / (half_width + 1)));
            acc += segment.samples[k] * sinc * win;
            wsum += sinc * win;
        }
        d.values[i] = (wsum != 0.0) ? acc / wsum : 0.0;
    }
    return d;
}

StandardizeStats standardize(std::vector<Descriptor>& train_set, std::vector<Descriptor>& apply_set) {
    if (train_set.empty()) throw ParameterError("standardize: empty training set");
    const std::size_t L = train_set.front().values.size();

    StandardizeStats st;
    st.mean.assign(L, 0.0);
    st.stddev.assign(L, 0.0);
    for (const auto& d : train_set)
        for (std::size_t i = 0; i < L; ++i) st.mean[i] += d.values[i];
    for (double& m : st.mean) m /= static_cast<double>(train_set.size());
    for (const auto& d : train_set)
        for (std::size_t i = 0; i < L; ++i) {
            const double dv = d.values[i] - st.mean[i];
            st.stddev[i] += dv * dv;
        }
    for (double& s : st.stddev) s = std::max(std::sqrt(s / train_set.size()), 1e-12);

    auto apply = [&](std::vector<Descriptor>& set) {
        for (auto& d : set)
            for (std::size_t i = 0; i < L; ++i) d.values[i] = (d.values[i] - st.mean[i]) / st.stddev[i];
    };
    apply(train_set);
    apply(apply_set);
    return st;
}

}  // namespace echoform
