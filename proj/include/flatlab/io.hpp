#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "flatlab/dynamics.hpp"
#include "flatlab/histogram.hpp"
#include "flatlab/mlp.hpp"

namespace flatlab {

// All CSV files: ',' separator, '.' decimal point, LF line endings, one
// header row; '#'-prefixed lines before the header carry `key = value`
// metadata so every artifact can be reproduced from itself.

struct CsvTable {
    std::map<std::string, std::string> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const std::map<std::string, std::string>& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows, const char* fmt = "%.12g");
CsvTable read_csv(const std::filesystem::path& path);

// key = value lines; '#' comments and blank lines ignored (TOML-compatible
// subset). Quotes around values are stripped.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// Sample trajectories: columns traj,t,coord_0..coord_{d-1}.
void write_samples_csv(const std::filesystem::path& path, const std::vector<SampleSet>& sets);

// Histogram: columns bin_lo,bin_hi,prob (1D only).
void write_histogram_csv(const std::filesystem::path& path,
                         const std::map<std::string, std::string>& meta, const HistogramND& hist);
HistogramND read_histogram_csv(const std::filesystem::path& path);

// Checkpoint: one header line encoding the MLPSpec, then one weight per line
// in MLPParams layout. Round-trips bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const MLPSpec& spec, const Vec& params);
std::pair<MLPSpec, Vec> load_checkpoint(const std::filesystem::path& path);

// Dataset CSV: x_0..x_{d-1},label with metadata lines for classes, label
// mode and the train/held-out split.
void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds);
LabeledDataset load_dataset(const std::filesystem::path& path);

// Raw point list from a samples CSV (all trajectories pooled).
std::vector<Vec> load_points_csv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

} // namespace flatlab
