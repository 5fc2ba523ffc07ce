#include "echoform/dataset_io.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <sstream>

namespace echoform {

using nlohmann::json;

namespace {

template <typename T>
void write_raw(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw IoError("unexpected end of file");
    return v;
}

json scene_to_json(const SceneConfig& s) {
    return json{{"range_m", s.range_m},
                {"snr_db", s.snr_db},
                {"clutter", s.clutter_enabled},
                {"recording_duration_s", s.recording_duration_s},
                {"seed", s.seed},
                {"target",
                 {{"outer_radius_m", s.target.outer_radius_m},
                  {"thickness_m", s.target.thickness_m},
                  {"shell",
                   {{"density", s.target.shell.density_kg_m3},
                    {"c_l", s.target.shell.longitudinal_speed_m_s},
                    {"c_t", s.target.shell.shear_speed_m_s}}},
                  {"filler",
                   {{"density", s.target.filler.density_kg_m3},
                    {"c", s.target.filler.sound_speed_m_s}}},
                  {"host",
                   {{"density", s.target.host.density_kg_m3},
                    {"c", s.target.host.sound_speed_m_s}}}}}};
}

SceneConfig scene_from_json(const json& j) {
    SceneConfig s;
    s.range_m = j.at("range_m");
    s.snr_db = j.at("snr_db");
    s.clutter_enabled = j.at("clutter");
    s.recording_duration_s = j.at("recording_duration_s");
    s.seed = j.at("seed");
    const json& t = j.at("target");
    s.target.outer_radius_m = t.at("outer_radius_m");
    s.target.thickness_m = t.at("thickness_m");
    s.target.shell = {t.at("shell").at("density"), t.at("shell").at("c_l"), t.at("shell").at("c_t")};
    s.target.filler = {t.at("filler").at("density"), t.at("filler").at("c")};
    s.target.host = {t.at("host").at("density"), t.at("host").at("c")};
    return s;
}

}  // namespace

void write_waveform(const std::filesystem::path& path, const Waveform& w) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write("EFW1", 4);
    write_raw(f, static_cast<std::uint32_t>(w.samples.size()));
    write_raw(f, static_cast<float>(w.sample_rate_hz));
    for (double v : w.samples) write_raw(f, static_cast<float>(v));
    if (!f) throw IoError("write failed: " + path.string());
}

Waveform read_waveform(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "EFW1", 4) != 0)
        throw IoError("bad waveform magic: " + path.string());
    const auto count = read_raw<std::uint32_t>(f);
    Waveform w;
    w.sample_rate_hz = read_raw<float>(f);
    w.samples.resize(count);
    for (auto& v : w.samples) v = read_raw<float>(f);
    return w;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
    json j;
    j["master_seed"] = m.master_seed;
    j["entries"] = json::array();
    for (const auto& e : m.entries) {
        json je = scene_to_json(e.truth);
        je["file"] = e.file;
        je["label"] = to_string(e.label);
        j["entries"].push_back(std::move(je));
    }
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << j.dump(2) << "\n";
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path.string());
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw IoError("bad manifest json: " + std::string(e.what()));
    }
    Manifest m;
    m.master_seed = j.at("master_seed");
    for (const auto& je : j.at("entries")) {
        ManifestEntry e;
        e.file = je.at("file");
        e.label = (je.at("label") == "air") ? FillerClass::air : FillerClass::water;
        e.truth = scene_from_json(je);
        m.entries.push_back(std::move(e));
    }
    return m;
}

Manifest write_dataset(const std::filesystem::path& dir, const std::vector<LabeledRecording>& data,
                       std::uint64_t master_seed) {
    std::filesystem::create_directories(dir);
    Manifest m;
    m.master_seed = master_seed;
    for (std::size_t i = 0; i < data.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "rec_%05zu.efw", i);
        write_waveform(dir / name, data[i].recording);
        ManifestEntry e;
        e.file = name;
        e.label = data[i].label;
        e.truth = data[i].truth;
        m.entries.push_back(std::move(e));
    }
    write_manifest(dir / "manifest.json", m);
    return m;
}

void write_descriptors(const std::filesystem::path& path, const std::vector<Descriptor>& set) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    if (set.empty()) throw IoError("refusing to write an empty descriptor set");
    f << "# kind=" << to_string(set.front().kind) << " length=" << set.front().values.size() << "\n";
    f.precision(17);
    for (const auto& d : set) {
        f << (d.label ? to_string(*d.label) : "unlabeled");
        for (double v : d.values) f << "," << v;
        f << "\n";
    }
}

std::vector<Descriptor> read_descriptors(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path.string());
    std::string header;
    std::getline(f, header);
    DescriptorKind kind = DescriptorKind::form_function;
    if (header.find("kind=frequency") != std::string::npos) kind = DescriptorKind::frequency;
    if (header.find("kind=time") != std::string::npos) kind = DescriptorKind::time;

    std::vector<Descriptor> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        Descriptor d;
        d.kind = kind;
        if (tok == "air")
            d.label = FillerClass::air;
        else if (tok == "water")
            d.label = FillerClass::water;
        while (std::getline(ss, tok, ',')) d.values.push_back(std::stod(tok));
        out.push_back(std::move(d));
    }
    return out;
}

void save_mlp(const std::filesystem::path& path, const MLPModel& model) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write("EFMLP1\n", 7);
    write_raw(f, static_cast<std::uint32_t>(model.layer_sizes.size()));
    for (int s : model.layer_sizes) write_raw(f, static_cast<std::uint32_t>(s));
    write_raw(f, model.dropout_p);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const auto& w = model.weights[l];
        for (int i = 0; i < w.rows(); ++i)
            for (int j = 0; j < w.cols(); ++j) write_raw(f, w(i, j));
        for (int i = 0; i < model.biases[l].size(); ++i) write_raw(f, model.biases[l](i));
    }
}

MLPModel load_mlp(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    char magic[7];
    f.read(magic, 7);
    if (!f || std::memcmp(magic, "EFMLP1\n", 7) != 0) throw IoError("bad MLP model magic");
    const auto n = read_raw<std::uint32_t>(f);
    MLPModel m;
    for (std::uint32_t i = 0; i < n; ++i) m.layer_sizes.push_back(read_raw<std::uint32_t>(f));
    m.dropout_p = read_raw<double>(f);
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        Eigen::MatrixXd w(m.layer_sizes[l + 1], m.layer_sizes[l]);
        for (int i = 0; i < w.rows(); ++i)
            for (int j = 0; j < w.cols(); ++j) w(i, j) = read_raw<double>(f);
        Eigen::VectorXd b(m.layer_sizes[l + 1]);
        for (int i = 0; i < b.size(); ++i) b(i) = read_raw<double>(f);
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    return m;
}

void save_svm(const std::filesystem::path& path, const SVMModel& model) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write("EFSVM1\n", 7);
    write_raw(f, static_cast<std::uint32_t>(model.support_vectors.rows()));
    write_raw(f, static_cast<std::uint32_t>(model.support_vectors.cols()));
    write_raw(f, model.bias);
    write_raw(f, model.gamma);
    write_raw(f, model.C);
    for (int i = 0; i < model.support_vectors.rows(); ++i)
        for (int j = 0; j < model.support_vectors.cols(); ++j)
            write_raw(f, model.support_vectors(i, j));
    for (int i = 0; i < model.dual_coeffs.size(); ++i) write_raw(f, model.dual_coeffs(i));
}

SVMModel load_svm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    char magic[7];
    f.read(magic, 7);
    if (!f || std::memcmp(magic, "EFSVM1\n", 7) != 0) throw IoError("bad SVM model magic");
    const auto rows = read_raw<std::uint32_t>(f);
    const auto cols = read_raw<std::uint32_t>(f);
    SVMModel m;
    m.bias = read_raw<double>(f);
    m.gamma = read_raw<double>(f);
    m.C = read_raw<double>(f);
    m.support_vectors.resize(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
        for (std::uint32_t j = 0; j < cols; ++j) m.support_vectors(i, j) = read_raw<double>(f);
    m.dual_coeffs.resize(rows);
    for (std::uint32_t i = 0; i < rows; ++i) m.dual_coeffs(i) = read_raw<double>(f);
    return m;
}

}  // namespace echoform
