// echoform: batch front end for the echo synthesis / classification pipeline.
//
// Subcommands:
//   generate   synthesize a labeled dataset and write it with a manifest
//   evaluate   descriptors + MLP/SVM k-fold cross-validation report
//   roundtrip  noiseless synthesis -> estimation self-consistency check
//   plot       CSV dumps of a form function, correlation trace and descriptors
//
// Exit codes: 0 ok, 2 config error, 3 I/O error, 4 no detection, 1 other.

#include <CLI11.hpp>

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "echoform/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNoDetection = 4;

// Concurrent runs on the same output directory are unsupported; a lock file
// makes the collision explicit instead of silently interleaving writes.
class DirLock {
  public:
    explicit DirLock(const std::filesystem::path& dir) : path_(dir / ".echoform.lock") {
        std::filesystem::create_directories(dir);
        if (std::filesystem::exists(path_))
            throw echoform::IoError("output directory is locked by another run: " + path_.string() +
                                    " (remove the lock file if that run is dead)");
        std::ofstream f(path_);
        if (!f) throw echoform::IoError("cannot create lock file: " + path_.string());
        f << "pid " << ::getpid() << "\n";
    }
    ~DirLock() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

  private:
    std::filesystem::path path_;
};

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
};

echoform::RunConfig make_config(const CommonArgs& a) {
    echoform::RunConfig cfg =
        a.config_path.empty() ? echoform::RunConfig{} : echoform::load_run_config(a.config_path);
    if (a.seed_set) cfg.master_seed = a.seed;
    if (a.jobs > 0) cfg.jobs = a.jobs;
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "JSON run configuration")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", a.out_path, "Output path override");
    cmd->add_option("--seed", a.seed, "Master seed override")
        ->each([&a](const std::string&) { a.seed_set = true; });
    cmd->add_option("--jobs", a.jobs, "Worker count hint");
}

int cmd_generate(const CommonArgs& a) {
    echoform::RunConfig cfg = make_config(a);
    if (!a.out_path.empty()) cfg.dataset_dir = a.out_path;
    DirLock lock(cfg.dataset_dir);
    const echoform::Manifest m = echoform::run_generate(cfg);
    int air = 0, water = 0;
    for (const auto& e : m.entries) (e.label == echoform::FillerClass::air ? air : water)++;
    std::cout << "generated " << m.entries.size() << " recordings (" << air << " air, " << water
              << " water) in " << cfg.dataset_dir.string() << "\n"
              << "master seed " << m.master_seed << "\n";
    return kExitOk;
}

int cmd_evaluate(const CommonArgs& a) {
    echoform::RunConfig cfg = make_config(a);
    if (!a.out_path.empty()) cfg.report_path = a.out_path;
    DirLock lock(cfg.report_path.has_parent_path() ? cfg.report_path.parent_path()
                                                   : std::filesystem::path("."));
    const echoform::EvaluationResult res = echoform::run_evaluate(cfg);

    const std::string table = res.table_text();
    std::cout << table;
    if (!res.failed_examples.empty() &&
        res.failed_examples.size() * 100 > static_cast<std::size_t>(res.total_examples)) {
        std::cerr << "warning: no in-gate detection on " << res.failed_examples.size()
                  << " examples:\n";
        for (const auto& id : res.failed_examples) std::cerr << "  " << id << "\n";
    }

    std::ofstream ft(cfg.report_path.string() + ".txt");
    std::ofstream fc(cfg.report_path.string() + ".csv");
    if (!ft || !fc)
        throw echoform::IoError("cannot write report: " + cfg.report_path.string() + ".{txt,csv}");
    ft << table;
    fc << res.csv_text();
    return kExitOk;
}

int cmd_roundtrip(const CommonArgs& a, int targets, double snr_db, bool noisy) {
    echoform::RunConfig cfg = make_config(a);
    const echoform::RoundtripResult res = echoform::run_roundtrip(cfg, targets, snr_db, !noisy);
    std::printf("roundtrip over %d targets: max relative form-function error %.3e\n", res.targets,
                res.max_relative_error);
    if (!a.out_path.empty()) {
        std::ofstream f(a.out_path);
        if (!f) throw echoform::IoError("cannot write: " + a.out_path);
        f << res.csv_text;
    }
    return kExitOk;
}

int cmd_plot(const CommonArgs& a) {
    echoform::RunConfig cfg = make_config(a);
    const std::filesystem::path out = a.out_path.empty() ? "plots" : a.out_path;
    DirLock lock(out);
    echoform::run_plot(cfg, out);
    std::cout << "wrote CSV dumps to " << out.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spherical-shell echo synthesis, estimation and classification"};
    app.require_subcommand(1);

    CommonArgs gen_a, eval_a, rt_a, plot_a;
    CLI::App* gen = app.add_subcommand("generate", "Synthesize a labeled dataset");
    add_common(gen, gen_a);
    CLI::App* eval = app.add_subcommand("evaluate", "Cross-validated classification report");
    add_common(eval, eval_a);
    CLI::App* rt = app.add_subcommand("roundtrip", "Synthesis/estimation self-consistency check");
    add_common(rt, rt_a);
    int rt_targets = 20;
    double rt_snr = 20.0;
    bool rt_noisy = false;
    rt->add_option("--targets", rt_targets, "Number of random targets");
    rt->add_option("--snr", rt_snr, "SNR in dB when --noisy is set");
    rt->add_flag("--noisy", rt_noisy, "Add noise before estimation");
    CLI::App* plot = app.add_subcommand("plot", "CSV dumps for figures");
    add_common(plot, plot_a);

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_generate(gen_a);
        if (eval->parsed()) return cmd_evaluate(eval_a);
        if (rt->parsed()) return cmd_roundtrip(rt_a, rt_targets, rt_snr, rt_noisy);
        if (plot->parsed()) return cmd_plot(plot_a);
        return kExitOther;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const echoform::ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const echoform::NoDetectionError& e) {
        std::cerr << "no detection: " << e.what() << "\n";
        return kExitNoDetection;
    } catch (const echoform::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
}
