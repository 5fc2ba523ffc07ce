#include "echoform/signal.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace echoform {

namespace detail {

namespace {
// FFTW plan creation is not thread safe; execution of a plan on its own arrays is.
std::mutex g_plan_mutex;
}  // namespace

std::vector<std::complex<double>> fft_real_forward(const std::vector<double>& x, int n) {
    if (n < static_cast<int>(x.size())) throw ParameterError("fft: n_fft smaller than signal");
    if (n <= 0 || n % 2 != 0) throw ParameterError("fft: n_fft must be positive and even");

    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    std::copy(x.begin(), x.end(), in);
    std::fill(in + x.size(), in + n, 0.0);

    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(detail::g_plan_mutex);
        plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    }
    fftw_execute(plan);

    std::vector<std::complex<double>> bins(n / 2 + 1);
    for (int i = 0; i <= n / 2; ++i) bins[i] = {out[i][0], out[i][1]};

    {
        std::lock_guard<std::mutex> lock(detail::g_plan_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return bins;
}

std::vector<double> fft_real_inverse(const std::vector<std::complex<double>>& bins, int n) {
    if (n <= 0 || n % 2 != 0) throw ParameterError("ifft: n_fft must be positive and even");
    if (static_cast<int>(bins.size()) != n / 2 + 1)
        throw ParameterError("ifft: bin count inconsistent with n_fft");

    fftw_complex* in = fftw_alloc_complex(n / 2 + 1);
    double* out = fftw_alloc_real(n);
    for (int i = 0; i <= n / 2; ++i) {
        in[i][0] = bins[i].real();
        in[i][1] = bins[i].imag();
    }

    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(detail::g_plan_mutex);
        plan = fftw_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE);
    }
    fftw_execute(plan);

    std::vector<double> x(n);
    const double scale = 1.0 / n;
    for (int i = 0; i < n; ++i) x[i] = out[i] * scale;

    {
        std::lock_guard<std::mutex> lock(detail::g_plan_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return x;
}

}  // namespace detail

Waveform make_chirp(double f_start_hz, double f_end_hz, double duration_s, double sample_rate_hz,
                    double taper_fraction) {
    if (sample_rate_hz <= 0 || duration_s <= 0)
        throw ParameterError("make_chirp: non-positive duration or sample rate");
    const double nyquist = sample_rate_hz / 2.0;
    if (f_start_hz <= 0 || f_end_hz <= 0 || f_start_hz >= nyquist || f_end_hz >= nyquist)
        throw ParameterError("make_chirp: sweep endpoints must lie in (0, Nyquist)");
    if (taper_fraction < 0.0 || taper_fraction > 0.5)
        throw ParameterError("make_chirp: taper fraction must be in [0, 0.5]");

    const int n = static_cast<int>(std::lround(duration_s * sample_rate_hz));
    const double sweep_rate = (f_end_hz - f_start_hz) / duration_s;

    Waveform w;
    w.sample_rate_hz = sample_rate_hz;
    w.samples.resize(n);
    for (int k = 0; k < n; ++k) {
        const double t = k / sample_rate_hz;
        // phi(t) = integral of f(t') = f_start*t + sweep_rate*t^2/2
        const double phase = f_start_hz * t + 0.5 * sweep_rate * t * t;
        double s = std::sin(2.0 * std::numbers::pi * phase);
        if (taper_fraction > 0.0) {
            const double ramp = taper_fraction * duration_s;
            double env = 1.0;
            if (t < ramp)
                env = 0.5 * (1.0 - std::cos(std::numbers::pi * t / ramp));
            else if (t > duration_s - ramp)
                env = 0.5 * (1.0 - std::cos(std::numbers::pi * (duration_s - t) / ramp));
            s *= env;
        }
        w.samples[k] = s;
    }
    return w;
}

Spectrum forward_transform(const Waveform& w, int n_fft) {
    if (n_fft < static_cast<int>(w.samples.size()))
        throw ParameterError("forward_transform: n_fft smaller than signal length");
    Spectrum s;
    s.values = detail::fft_real_forward(w.samples, n_fft);
    s.freq_hz.resize(s.values.size());
    const double df = w.sample_rate_hz / n_fft;
    for (std::size_t i = 0; i < s.freq_hz.size(); ++i) s.freq_hz[i] = df * static_cast<double>(i);
    return s;
}

Waveform inverse_transform(const Spectrum& s, int out_len) {
    const int n = s.n_fft();
    if (out_len > n) throw ParameterError("inverse_transform: out_len exceeds n_fft");
    if (out_len < 0) throw ParameterError("inverse_transform: negative out_len");
    std::vector<double> x = detail::fft_real_inverse(s.values, n);
    Waveform w;
    w.sample_rate_hz = s.sample_rate_hz();
    w.samples.assign(x.begin(), x.begin() + out_len);
    return w;
}

std::vector<double> analytic_envelope(const std::vector<double>& x) {
    if (x.empty()) return {};
    int n = 2;
    while (n < static_cast<int>(x.size())) n *= 2;

    fftw_complex* buf = fftw_alloc_complex(n);
    for (std::size_t i = 0; i < x.size(); ++i) {
        buf[i][0] = x[i];
        buf[i][1] = 0.0;
    }
    for (int i = static_cast<int>(x.size()); i < n; ++i) buf[i][0] = buf[i][1] = 0.0;

    fftw_plan pf, pb;
    {
        std::lock_guard<std::mutex> lock(detail::g_plan_mutex);
        pf = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        pb = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(pf);
    // Analytic signal: double positive frequencies, zero negative ones.
    for (int i = 1; i < n / 2; ++i) {
        buf[i][0] *= 2.0;
        buf[i][1] *= 2.0;
    }
    for (int i = n / 2 + 1; i < n; ++i) buf[i][0] = buf[i][1] = 0.0;
    fftw_execute(pb);

    std::vector<double> env(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        env[i] = std::hypot(buf[i][0], buf[i][1]) / n;
    {
        std::lock_guard<std::mutex> lock(detail::g_plan_mutex);
        fftw_destroy_plan(pf);
        fftw_destroy_plan(pb);
    }
    fftw_free(buf);
    return env;
}

Waveform matched_filter(const Waveform& recording, const Waveform& replica) {
    if (recording.sample_rate_hz != replica.sample_rate_hz)
        throw ParameterError("matched_filter: sample-rate mismatch");
    if (replica.samples.empty() || recording.samples.size() <= replica.samples.size())
        throw ParameterError("matched_filter: replica must be shorter than recording");

    const int n_rec = static_cast<int>(recording.samples.size());
    const int n_rep = static_cast<int>(replica.samples.size());

    double energy = 0.0;
    for (double v : replica.samples) energy += v * v;
    if (energy <= 0.0) throw ParameterError("matched_filter: zero-energy replica");

    // Zero-pad to at least n_rec + n_rep - 1 so the circular correlation never wraps.
    int n = 2;
    while (n < n_rec + n_rep - 1) n *= 2;

    auto rec_bins = detail::fft_real_forward(recording.samples, n);
    auto rep_bins = detail::fft_real_forward(replica.samples, n);
    for (std::size_t i = 0; i < rec_bins.size(); ++i) rec_bins[i] *= std::conj(rep_bins[i]);
    std::vector<double> corr = detail::fft_real_inverse(rec_bins, n);

    Waveform out;
    out.sample_rate_hz = recording.sample_rate_hz;
    out.samples.resize(n_rec);
    for (int k = 0; k < n_rec; ++k) out.samples[k] = corr[k] / energy;
    return out;
}

}  // namespace echoform
