#include "echoform/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace echoform {

using nlohmann::json;

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).template get<T>();
}

DescriptorKind descriptor_kind_from_string(const std::string& s) {
    if (s == "form_function") return DescriptorKind::form_function;
    if (s == "frequency") return DescriptorKind::frequency;
    if (s == "time") return DescriptorKind::time;
    throw ParameterError("unknown descriptor kind: " + s);
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParameterError("config parse error: " + std::string(e.what()));
    }

    RunConfig cfg;
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        std::string s;
        if (p.contains("dataset_dir")) cfg.dataset_dir = p["dataset_dir"].get<std::string>();
        if (p.contains("model_dir")) cfg.model_dir = p["model_dir"].get<std::string>();
        if (p.contains("report_path")) cfg.report_path = p["report_path"].get<std::string>();
        (void)s;
    }
    if (j.contains("pulse")) {
        const auto& p = j["pulse"];
        maybe(p, "f_start_hz", cfg.pulse.f_start_hz);
        maybe(p, "f_end_hz", cfg.pulse.f_end_hz);
        maybe(p, "duration_s", cfg.pulse.duration_s);
        maybe(p, "sample_rate_hz", cfg.pulse.sample_rate_hz);
        maybe(p, "taper_fraction", cfg.pulse.taper_fraction);
    }
    if (j.contains("dataset")) {
        const auto& d = j["dataset"];
        cfg.dataset = default_dataset_params();
        maybe(d, "n_per_class", cfg.dataset.n_per_class);
        maybe(d, "radius_min_m", cfg.dataset.radius_min_m);
        maybe(d, "radius_max_m", cfg.dataset.radius_max_m);
        maybe(d, "thickness_min_m", cfg.dataset.thickness_min_m);
        maybe(d, "thickness_max_m", cfg.dataset.thickness_max_m);
        maybe(d, "range_min_m", cfg.dataset.range_min_m);
        maybe(d, "range_max_m", cfg.dataset.range_max_m);
        maybe(d, "snr_min_db", cfg.dataset.snr_min_db);
        maybe(d, "snr_max_db", cfg.dataset.snr_max_db);
        maybe(d, "clutter", cfg.dataset.clutter_enabled);
        maybe(d, "recording_duration_s", cfg.dataset.recording_duration_s);
        if (d.contains("shell_material")) {
            if (d["shell_material"].is_string())
                cfg.dataset.shell_material = preset_solid(d["shell_material"].get<std::string>());
            else
                cfg.dataset.shell_material = {d["shell_material"].at("density"),
                                              d["shell_material"].at("c_l"),
                                              d["shell_material"].at("c_t")};
        }
        if (d.contains("host")) {
            if (d["host"].is_string())
                cfg.dataset.host = preset_fluid(d["host"].get<std::string>());
            else
                cfg.dataset.host = {d["host"].at("density"), d["host"].at("c")};
        }
    } else {
        cfg.dataset = default_dataset_params();
    }
    if (j.contains("physics")) {
        const auto& p = j["physics"];
        maybe(p, "band_lo_hz", cfg.physics_band_lo_hz);
        maybe(p, "band_hi_hz", cfg.physics_band_hi_hz);
        maybe(p, "grid_points", cfg.physics_grid_points);
    }
    if (j.contains("features")) {
        const auto& ft = j["features"];
        maybe(ft, "band_lo_hz", cfg.feature_band_lo_hz);
        maybe(ft, "band_hi_hz", cfg.feature_band_hi_hz);
        maybe(ft, "log_magnitude", cfg.log_magnitude);
    }
    if (j.contains("mlp")) {
        const auto& m = j["mlp"];
        maybe(m, "epochs", cfg.mlp.epochs);
        maybe(m, "batch", cfg.mlp.batch);
        maybe(m, "lr", cfg.mlp.lr);
        maybe(m, "dropout", cfg.mlp.dropout_p);
        if (m.contains("hidden")) cfg.mlp.hidden = m["hidden"].get<std::vector<int>>();
        maybe(m, "val_fraction", cfg.mlp_val_fraction);
    }
    if (j.contains("svm")) {
        const auto& s = j["svm"];
        if (s.contains("c_grid")) cfg.svm.c_grid = s["c_grid"].get<std::vector<double>>();
        if (s.contains("gamma_scale_grid"))
            cfg.svm.gamma_scale_grid = s["gamma_scale_grid"].get<std::vector<double>>();
        maybe(s, "tol", cfg.svm.tol);
    }
    if (j.contains("cv")) maybe(j["cv"], "folds", cfg.cv_folds);
    if (j.contains("seeds")) {
        const auto& s = j["seeds"];
        maybe(s, "master", cfg.master_seed);
        maybe(s, "init", cfg.init_seed);
        maybe(s, "fold", cfg.fold_seed);
    }
    if (j.contains("descriptors")) {
        cfg.descriptors.clear();
        for (const auto& d : j["descriptors"])
            cfg.descriptors.push_back(descriptor_kind_from_string(d.get<std::string>()));
    }
    maybe(j, "jobs", cfg.jobs);

    // Generation grid follows the physics settings.
    cfg.dataset.ff_band_lo_hz = cfg.physics_band_lo_hz;
    cfg.dataset.ff_band_hi_hz = cfg.physics_band_hi_hz;
    cfg.dataset.ff_grid_points = cfg.physics_grid_points;
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_run_config(ss.str());
}

Waveform make_pulse(const PulseConfig& p) {
    return make_chirp(p.f_start_hz, p.f_end_hz, p.duration_s, p.sample_rate_hz, p.taper_fraction);
}

Manifest run_generate(const RunConfig& cfg) {
    const Waveform pulse = make_pulse(cfg.pulse);
    const auto data = generate_dataset(cfg.dataset, pulse, cfg.master_seed);
    return write_dataset(cfg.dataset_dir, data, cfg.master_seed);
}

ExtractedDescriptors extract_descriptors(const Waveform& recording, const Waveform& pulse,
                                         const FluidMedium& host, const RunConfig& cfg) {
    const SegmentationResult seg = segment_echo(recording, pulse, host.sound_speed_m_s);
    const FormFunction ff = estimate_form_function(
        seg, pulse, host, {cfg.feature_band_lo_hz, cfg.feature_band_hi_hz});

    ExtractedDescriptors out;
    out.form_function = descriptor_form_function(ff, cfg.feature_band_lo_hz, cfg.feature_band_hi_hz,
                                                 cfg.log_magnitude);
    out.frequency = descriptor_frequency(seg.segment, cfg.feature_band_lo_hz, cfg.feature_band_hi_hz);
    out.time = descriptor_time(seg.segment);
    return out;
}

std::string EvaluationResult::table_text() const {
    std::ostringstream os;
    os << "Echo representation   Mean Accuracy ± Standard Deviation, %\n";
    os << "                      MLP              SVM\n";
    auto row = [&](DescriptorKind d, const char* name) {
        std::string mlp = "-", svm = "-";
        for (const auto& c : cells) {
            if (c.descriptor != d) continue;
            if (c.classifier == "MLP") mlp = c.report.cell();
            if (c.classifier == "SVM") svm = c.report.cell();
        }
        os << name;
        for (std::size_t i = std::strlen(name); i < 22; ++i) os << ' ';
        os << mlp;
        for (std::size_t i = mlp.size(); i < 17; ++i) os << ' ';
        os << svm << "\n";
    };
    row(DescriptorKind::form_function, "Form Function");
    row(DescriptorKind::frequency, "Frequency Domain");
    row(DescriptorKind::time, "Time Domain");
    if (!failed_examples.empty()) {
        os << "# warning: " << failed_examples.size() << "/" << total_examples
           << " examples had no in-gate detection\n";
    }
    return os.str();
}

std::string EvaluationResult::csv_text() const {
    std::ostringstream os;
    os << "descriptor,classifier,mean_pct,std_pct";
    std::size_t max_folds = 0;
    for (const auto& c : cells) max_folds = std::max(max_folds, c.report.fold_accuracy_pct.size());
    for (std::size_t i = 0; i < max_folds; ++i) os << ",fold" << i + 1;
    os << "\n";
    os.precision(10);
    for (const auto& c : cells) {
        os << to_string(c.descriptor) << "," << c.classifier << "," << c.report.mean_pct << ","
           << c.report.std_pct;
        for (double a : c.report.fold_accuracy_pct) os << "," << a;
        os << "\n";
    }
    return os.str();
}

double EvaluationResult::accuracy(DescriptorKind d, const std::string& classifier) const {
    for (const auto& c : cells)
        if (c.descriptor == d && c.classifier == classifier) return c.report.mean_pct;
    throw ParameterError("no such evaluation cell");
}

EvaluationResult run_evaluate(const RunConfig& cfg) {
    const Manifest manifest = read_manifest(cfg.dataset_dir / "manifest.json");
    if (manifest.entries.empty()) throw IoError("dataset is empty");

    const Waveform pulse = make_pulse(cfg.pulse);
    const FluidMedium host =
        cfg.dataset.host.density_kg_m3 > 0 ? cfg.dataset.host : preset_fluid("water");

    std::vector<Descriptor> ff_set, fq_set, tm_set;
    EvaluationResult result;
    result.total_examples = static_cast<int>(manifest.entries.size());

    for (const auto& entry : manifest.entries) {
        const Waveform rec = read_waveform(cfg.dataset_dir / entry.file);
        try {
            ExtractedDescriptors d = extract_descriptors(rec, pulse, host, cfg);
            d.form_function.label = d.frequency.label = d.time.label = entry.label;
            ff_set.push_back(std::move(d.form_function));
            fq_set.push_back(std::move(d.frequency));
            tm_set.push_back(std::move(d.time));
        } catch (const NoDetectionError&) {
            result.failed_examples.push_back(entry.file);
        }
    }
    if (ff_set.empty()) throw NoDetectionError("evaluate: no example produced a detection");

    // Mix the parameter-init seed into the per-fold seed supplied by the CV
    // harness so init and fold assignment can be varied independently.
    const auto with_init = [init = cfg.init_seed](ClassifierFactory f) {
        return ClassifierFactory([f = std::move(f), init](const Eigen::MatrixXd& X,
                                                          const Eigen::VectorXi& y,
                                                          std::uint64_t seed) {
            return f(X, y, seed ^ (init * 0x9e3779b97f4a7c15ull));
        });
    };
    const ClassifierFactory mlp = with_init(make_mlp_factory(cfg.mlp, cfg.mlp_val_fraction));
    const ClassifierFactory svm = with_init(make_svm_factory(cfg.svm));

    for (DescriptorKind kind : cfg.descriptors) {
        const std::vector<Descriptor>* set = nullptr;
        switch (kind) {
            case DescriptorKind::form_function: set = &ff_set; break;
            case DescriptorKind::frequency: set = &fq_set; break;
            case DescriptorKind::time: set = &tm_set; break;
        }
        result.cells.push_back(
            {kind, "MLP", cross_validate(*set, mlp, cfg.cv_folds, cfg.fold_seed, "MLP")});
        result.cells.push_back(
            {kind, "SVM", cross_validate(*set, svm, cfg.cv_folds, cfg.fold_seed, "SVM")});
    }
    return result;
}

RoundtripResult run_roundtrip(const RunConfig& cfg, int n_targets, double snr_db, bool noiseless) {
    const Waveform pulse = make_pulse(cfg.pulse);
    const double fs = pulse.sample_rate_hz;
    const FluidMedium host =
        cfg.dataset.host.density_kg_m3 > 0 ? cfg.dataset.host : preset_fluid("water");
    const ElasticSolid shell = cfg.dataset.shell_material.density_kg_m3 > 0
                                   ? cfg.dataset.shell_material
                                   : preset_solid("aluminium");

    int n_fft = 1;
    while (n_fft < static_cast<int>(std::lround(0.016 * fs))) n_fft *= 2;

    std::mt19937_64 rng(cfg.master_seed ^ 0x5bd1e995u);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    RoundtripResult res;
    res.targets = n_targets;

    const std::pair<double, double> band{cfg.feature_band_lo_hz, cfg.feature_band_hi_hz};
    for (int t = 0; t < n_targets; ++t) {
        ShellTarget target;
        target.outer_radius_m =
            cfg.dataset.radius_min_m + (cfg.dataset.radius_max_m - cfg.dataset.radius_min_m) * u01(rng);
        target.thickness_m = cfg.dataset.thickness_min_m +
                             (cfg.dataset.thickness_max_m - cfg.dataset.thickness_min_m) * u01(rng);
        target.shell = shell;
        target.host = host;
        target.filler = preset_fluid(t % 2 == 0 ? "air" : "water");
        const double range =
            cfg.dataset.range_min_m + (cfg.dataset.range_max_m - cfg.dataset.range_min_m) * u01(rng);

        // Analytic form function sampled exactly on the in-band transform bins.
        std::vector<double> bins;
        const double df = fs / n_fft;
        for (int i = 0; i <= n_fft / 2; ++i) {
            const double f = i * df;
            if (f >= band.first && f <= band.second) bins.push_back(f);
        }
        const FormFunction analytic = form_function_shell(target, bins);

        Waveform echo = synthesize_echo(pulse, analytic, range, host, n_fft);
        if (!noiseless) echo = add_noise(echo, snr_db, rng());

        const FormFunction est = estimate_form_function(echo, pulse, range, host, band, 0.0, n_fft);

        // Compare on bins within 20 dB of the pulse's spectral peak.
        const Spectrum si = forward_transform(pulse, n_fft);
        double peak = 0.0;
        for (const auto& v : si.values) peak = std::max(peak, std::abs(v));

        std::ostringstream csv;
        csv << "freq_hz,abs_analytic,abs_estimated\n";
        std::size_t bi = 0;
        for (std::size_t i = 0; i < est.freq_hz.size(); ++i) {
            while (bi < analytic.freq_hz.size() && analytic.freq_hz[bi] < est.freq_hz[i] - 1e-6) ++bi;
            if (bi >= analytic.freq_hz.size() ||
                std::abs(analytic.freq_hz[bi] - est.freq_hz[i]) > 1e-6)
                continue;
            const int bin_index = static_cast<int>(std::lround(est.freq_hz[i] / df));
            if (std::abs(si.values[bin_index]) < 0.1 * peak) continue;  // outside -20 dB band
            const double rel = std::abs(est.values[i] - analytic.values[bi]) /
                               std::max(std::abs(analytic.values[bi]), 1e-300);
            res.max_relative_error = std::max(res.max_relative_error, rel);
            csv << est.freq_hz[i] << "," << std::abs(analytic.values[bi]) << ","
                << std::abs(est.values[i]) << "\n";
        }
        res.csv_text = csv.str();
    }
    return res;
}

void run_plot(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    const Manifest manifest = read_manifest(cfg.dataset_dir / "manifest.json");
    if (manifest.entries.empty()) throw IoError("plot: dataset is empty");
    std::filesystem::create_directories(out_dir);

    const Waveform pulse = make_pulse(cfg.pulse);
    const FluidMedium host =
        cfg.dataset.host.density_kg_m3 > 0 ? cfg.dataset.host : preset_fluid("water");
    const ManifestEntry& entry = manifest.entries.front();
    const Waveform rec = read_waveform(cfg.dataset_dir / entry.file);

    {
        const FormFunction ff = scene_form_function(entry.truth.target, cfg.physics_band_lo_hz,
                                                    cfg.physics_band_hi_hz, cfg.physics_grid_points);
        std::ofstream f(out_dir / "form_function.csv");
        f << "freq_hz,abs_f\n";
        f.precision(12);
        for (std::size_t i = 0; i < ff.freq_hz.size(); ++i)
            f << ff.freq_hz[i] << "," << std::abs(ff.values[i]) << "\n";
    }
    {
        const Waveform mf = matched_filter(rec, pulse);
        std::ofstream f(out_dir / "matched_filter.csv");
        f << "t_s,correlation\n";
        f.precision(12);
        for (std::size_t i = 0; i < mf.samples.size(); ++i)
            f << i / mf.sample_rate_hz << "," << mf.samples[i] << "\n";
    }
    {
        const ExtractedDescriptors d = extract_descriptors(rec, pulse, host, cfg);
        for (const Descriptor* desc : {&d.form_function, &d.frequency, &d.time}) {
            std::ofstream f(out_dir / (std::string("descriptor_") + to_string(desc->kind) + ".csv"));
            f << "index,value\n";
            f.precision(12);
            for (std::size_t i = 0; i < desc->values.size(); ++i) f << i << "," << desc->values[i] << "\n";
        }
    }
}

}  // namespace echoform
