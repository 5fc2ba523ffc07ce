#pragma once

#include <complex>
#include <vector>

#include "echoform/errors.hpp"

namespace echoform {

// Pipeline-wide sample rate. 1 MHz keeps the 160 kHz band top comfortably
// below Nyquist and quantizes two-way range at c/(2 fs) ~ 0.74 mm in water.
inline constexpr double kPipelineSampleRateHz = 1.0e6;

// Uniformly sampled real pressure time series (arbitrary units).
struct Waveform {
    std::vector<double> samples;
    double sample_rate_hz = kPipelineSampleRateHz;

    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

// One-sided complex spectrum of a real signal on the uniform grid
// freq[i] = i * sample_rate / n_fft, i = 0 .. n_fft/2. n_fft is always even.
struct Spectrum {
    std::vector<std::complex<double>> values;
    std::vector<double> freq_hz;

    int n_fft() const { return 2 * (static_cast<int>(values.size()) - 1); }
    double bin_spacing_hz() const { return freq_hz.size() > 1 ? freq_hz[1] - freq_hz[0] : 0.0; }
    double sample_rate_hz() const { return bin_spacing_hz() * n_fft(); }
};

// Linear sweep from f_start_hz at t=0 to f_end_hz at t=duration_s,
// s[k] = sin(2*pi*phi(t_k)) with phi the integral of the instantaneous frequency.
// taper_fraction in [0, 0.5] applies a raised-cosine ramp over that fraction of
// the duration at each end (0 = rectangular envelope).
Waveform make_chirp(double f_start_hz, double f_end_hz, double duration_s,
                    double sample_rate_hz, double taper_fraction = 0.0);

// Zero-padded one-sided DFT. n_fft must be even and >= signal length.
Spectrum forward_transform(const Waveform& w, int n_fft);

// Real inverse of forward_transform, truncated to out_len samples.
Waveform inverse_transform(const Spectrum& s, int out_len);

// Magnitude of the analytic signal (Hilbert envelope) of a real series.
std::vector<double> analytic_envelope(const std::vector<double>& x);

// Cross-correlation of recording with replica, normalized by replica energy.
// Output sample k is the correlation of the replica aligned at recording
// sample k; output length equals the recording length.
Waveform matched_filter(const Waveform& recording, const Waveform& replica);

namespace detail {
// Unnormalized forward r2c DFT of x zero-padded to n (n even). Returns n/2+1 bins.
std::vector<std::complex<double>> fft_real_forward(const std::vector<double>& x, int n);
// Inverse of fft_real_forward including the 1/n normalization. Returns n samples.
std::vector<double> fft_real_inverse(const std::vector<std::complex<double>>& bins, int n);
}  // namespace detail

}  // namespace echoform
