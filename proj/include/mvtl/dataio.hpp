#pragma once

#include "mvtl/features.hpp"
#include "mvtl/kvconfig.hpp"

#include <string>

namespace mvtl::dataio {

/// Files describing one recording: "<name>.csv" (header "t,ch1..chC"),
/// "<name>.meta" (key=value, must contain fs) and "<name>.ann.csv"
/// (header "start_s,end_s").
struct RecordPaths {
    std::string signal;
    std::string annotation;
    std::string metadata;
};

RecordPaths record_paths(const std::string& directory, const std::string& name);

// Sidecar defaults to the signal path with ".csv" replaced by ".meta".
SignalRecord load_raw(const std::string& signal_path, const std::string& annotation_path,
                      const std::string& metadata_path = {});

void save_raw(const SignalRecord& record, const RecordPaths& paths);

// Every record in `directory` (signal CSVs with a .meta sidecar), sorted by name.
std::vector<RecordPaths> discover_records(const std::string& directory);

// Subdirectories of `raw_dir` holding at least one record, sorted.
std::vector<std::string> discover_datasets(const std::string& raw_dir);

std::vector<SignalRecord> load_dataset(const std::string& directory);

std::string feature_path(const std::string& directory, const std::string& dataset_id, std::size_t view);
std::string normalizer_path(const std::string& directory, const std::string& dataset_id);

/// One CSV per view: header "<view>_0,...,<view>_{d-1},label", one row per window.
void write_features(const std::string& directory, const std::string& dataset_id,
                    const MultiViewDataset& ds);
MultiViewDataset read_features(const std::string& directory, const std::string& dataset_id,
                               std::size_t classes = 2);

void write_normalizer(const std::string& path, const Normalizer& n);
Normalizer read_normalizer(const std::string& path);

}  // namespace mvtl::dataio
