#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "echoform/classify.hpp"
#include "echoform/features.hpp"
#include "echoform/synth.hpp"

namespace echoform {

// Raw sample file: "EFW1" magic, uint32 sample count, float32 sample rate,
// then count little-endian float32 samples.
void write_waveform(const std::filesystem::path& path, const Waveform& w);
Waveform read_waveform(const std::filesystem::path& path);

struct ManifestEntry {
    std::string file;  // relative to the manifest directory
    FillerClass label = FillerClass::water;
    SceneConfig truth;
};

struct Manifest {
    std::uint64_t master_seed = 0;
    std::vector<ManifestEntry> entries;
};

// Manifest is a JSON document next to the per-example raw files.
void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

// Writes the recordings plus manifest.json into dir.
Manifest write_dataset(const std::filesystem::path& dir, const std::vector<LabeledRecording>& data,
                       std::uint64_t master_seed);

// Descriptor matrix: CSV with a comment header carrying kind and length,
// rows "label,v0,...,v511".
void write_descriptors(const std::filesystem::path& path, const std::vector<Descriptor>& set);
std::vector<Descriptor> read_descriptors(const std::filesystem::path& path);

// Versioned binary model formats ("EFMLP1\n" / "EFSVM1\n" magic, uint32 shape
// header, little-endian float64 payload).
void save_mlp(const std::filesystem::path& path, const MLPModel& model);
MLPModel load_mlp(const std::filesystem::path& path);
void save_svm(const std::filesystem::path& path, const SVMModel& model);
SVMModel load_svm(const std::filesystem::path& path);

}  // namespace echoform
