#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "echoform/classify.hpp"
#include "echoform/dataset_io.hpp"
#include "echoform/inversion.hpp"
#include "echoform/synth.hpp"

namespace echoform {

struct PulseConfig {
    double f_start_hz = 160.0e3;
    double f_end_hz = 30.0e3;
    double duration_s = 1.0e-3;
    double sample_rate_hz = kPipelineSampleRateHz;
    double taper_fraction = 0.0;
};

struct RunConfig {
    std::filesystem::path dataset_dir = "dataset";
    std::filesystem::path model_dir = "models";
    std::filesystem::path report_path = "report";

    PulseConfig pulse;
    DatasetParams dataset;

    // Analytic form-function generation grid.
    double physics_band_lo_hz = 28.0e3;
    double physics_band_hi_hz = 162.0e3;
    int physics_grid_points = 1400;

    double feature_band_lo_hz = kBandLoHz;
    double feature_band_hi_hz = kBandHiHz;
    bool log_magnitude = false;

    MLPHyper mlp;
    double mlp_val_fraction = 0.15;
    SVMGrid svm;
    int cv_folds = 3;

    std::uint64_t master_seed = 20260823;
    std::uint64_t init_seed = 7;
    std::uint64_t fold_seed = 13;

    std::vector<DescriptorKind> descriptors = {DescriptorKind::form_function,
                                               DescriptorKind::frequency, DescriptorKind::time};
    int jobs = 1;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text);

Waveform make_pulse(const PulseConfig& p);

// generate: dataset + manifest on disk. Returns the manifest.
Manifest run_generate(const RunConfig& cfg);

struct EvaluationCell {
    DescriptorKind descriptor;
    std::string classifier;  // "MLP" or "SVM"
    CVReport report;
};

struct EvaluationResult {
    std::vector<EvaluationCell> cells;
    std::vector<std::string> failed_examples;  // ids with no in-gate detection
    int total_examples = 0;

    std::string table_text() const;  // human-readable 3x2 grid
    std::string csv_text() const;    // one row per cell plus per-fold detail
    double accuracy(DescriptorKind d, const std::string& classifier) const;
};

// evaluate: segmentation -> descriptors -> both classifiers x k-fold CV on the
// dataset found in cfg.dataset_dir.
EvaluationResult run_evaluate(const RunConfig& cfg);

// Descriptor extraction for one recording (the evaluate path for one example).
struct ExtractedDescriptors {
    Descriptor form_function;
    Descriptor frequency;
    Descriptor time;
};
ExtractedDescriptors extract_descriptors(const Waveform& recording, const Waveform& pulse,
                                         const FluidMedium& host, const RunConfig& cfg);

struct RoundtripResult {
    double max_relative_error = 0.0;  // over all targets, -20 dB band bins
    int targets = 0;
    std::string csv_text;  // freq_hz, |f_analytic|, |f_estimated| of the last target
};

// roundtrip: noiseless synth -> estimation for n random shell targets, known
// range and alignment; reports the max relative form-function error.
RoundtripResult run_roundtrip(const RunConfig& cfg, int n_targets = 20, double snr_db = 0.0,
                              bool noiseless = true);

// plot: CSV dumps of a form function, a matched-filter trace and descriptors.
void run_plot(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace echoform
