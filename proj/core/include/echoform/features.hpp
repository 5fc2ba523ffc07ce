#pragma once

#include <optional>
#include <vector>

#include "echoform/physics.hpp"
#include "echoform/signal.hpp"
#include "echoform/synth.hpp"

namespace echoform {

inline constexpr int kDescriptorLength = 512;
inline constexpr double kBandLoHz = 30.0e3;
inline constexpr double kBandHiHz = 160.0e3;

enum class DescriptorKind { form_function, frequency, time };

const char* to_string(DescriptorKind k);

// Fixed-length real feature vector fed to the classifiers.
struct Descriptor {
    DescriptorKind kind = DescriptorKind::form_function;
    std::vector<double> values;  // length exactly kDescriptorLength
    std::optional<FillerClass> label;
};

// |f_inf| linearly resampled onto kDescriptorLength uniform points over
// [band_lo, band_hi]. log_magnitude switches to 20*log10(|f_inf|) (floored).
Descriptor descriptor_form_function(const FormFunction& ff, double band_lo_hz = kBandLoHz,
                                    double band_hi_hz = kBandHiHz, bool log_magnitude = false);

// Magnitude spectrum of the gated segment restricted to the band, resampled to
// kDescriptorLength points.
Descriptor descriptor_frequency(const Waveform& segment, double band_lo_hz = kBandLoHz,
                                double band_hi_hz = kBandHiHz);

// Gated segment decimated to kDescriptorLength samples by band-limited
// (windowed-sinc) resampling.
Descriptor descriptor_time(const Waveform& segment);

struct StandardizeStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // floored at 1e-12
};

// Per-position standardization. Statistics come from train_set only and are
// applied to both sets in place.
StandardizeStats standardize(std::vector<Descriptor>& train_set, std::vector<Descriptor>& apply_set);

}  // namespace echoform
