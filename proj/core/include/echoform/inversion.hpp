#pragma once

#include <utility>

#include "echoform/physics.hpp"
#include "echoform/signal.hpp"

namespace echoform {

// Fixed echo duration cut out of the recording.
inline constexpr double kSegmentDurationS = 0.002;

struct SegmentationResult {
    Waveform segment;      // raw recording samples, exactly 2.0 ms
    double delta_t_s = 0;  // (peak_index - direct_index) / sample_rate
    int peak_index = 0;    // echo correlation peak (recording sample index)
    int direct_index = 0;  // transmit-breakthrough correlation peak
    int segment_start = 0; // first recording sample of `segment`
};

// Matched-filter segmentation. The direct arrival is the global correlation
// maximum in [0, 1 ms]; the echo is the correlation maximum inside the
// [2*1.5/c, 2*3.0/c] gate after it, and must exceed 10x the median absolute
// in-gate correlation or a NoDetectionError is thrown. The segment starts one
// replica length before the peak so it contains the full echo onset.
SegmentationResult segment_echo(const Waveform& recording, const Waveform& replica, double c_host);

// r = delta_t * c / 2.
double estimate_range(double delta_t_s, double c_host);

// Spectral form-function estimation:
//   f_inf(w) = |k| r^2 FT[s](w) / (exp(-2jkr) FT[s_i](w)),  k = w/c_host,
// on transform bins restricted to [band.first, band.second]. The division is
// regularized as X*conj(Y)/(|Y|^2 + eps), eps = 1e-12 * max|Y|^2.
// `segment_start_s` places the segment on the transmit clock (segment sample 0
// happened at that time); pass 0 when the segment already starts at transmit.
// Throws IllConditionedBandError when the pulse spectrum sits below -40 dB of
// its peak across more than 10% of the requested band.
FormFunction estimate_form_function(const Waveform& segment, const Waveform& pulse, double range_m,
                                    const FluidMedium& host, std::pair<double, double> band_hz,
                                    double segment_start_s = 0.0, int n_fft = 0);

// Convenience: estimate from a SegmentationResult, deriving range via Eq. r =
// delta_t*c/2 and the segment's absolute offset from the segmentation indices.
FormFunction estimate_form_function(const SegmentationResult& seg, const Waveform& pulse,
                                    const FluidMedium& host, std::pair<double, double> band_hz);

}  // namespace echoform
