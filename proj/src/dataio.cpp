#include "mvtl/dataio.hpp"

#include "mvtl/csv.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace fs = std::filesystem;

namespace mvtl::dataio {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string strip_csv(const std::string& path) {
    return ends_with(path, ".csv") ? path.substr(0, path.size() - 4) : path;
}

}  // namespace

RecordPaths record_paths(const std::string& directory, const std::string& name) {
    const fs::path base = fs::path(directory) / name;
    return {base.string() + ".csv", base.string() + ".ann.csv", base.string() + ".meta"};
}

SignalRecord load_raw(const std::string& signal_path, const std::string& annotation_path,
                      const std::string& metadata_path) {
    const std::string meta = metadata_path.empty() ? strip_csv(signal_path) + ".meta" : metadata_path;
    const KeyValues kv = KeyValues::load(meta);
    if (!kv.has("fs")) throw ParseError("metadata lacks fs=<Hz>", meta, 0);
    SignalRecord rec;
    rec.fs = kv.get_double("fs");
    if (!(rec.fs > 0.0)) throw ParseError("fs must be positive", meta, 0);
    rec.id = kv.get("id", fs::path(strip_csv(signal_path)).filename().string());

    const auto table = csv::read_numeric(signal_path);
    if (table.header.empty() || table.header.front() != "t")
        throw ParseError("signal header must start with 't'", signal_path, 1);
    const auto channels = static_cast<Eigen::Index>(table.header.size()) - 1;
    if (channels < 1) throw ParseError("signal file has no channel columns", signal_path, 1);
    const auto T = static_cast<Eigen::Index>(table.rows.size());
    rec.samples.resize(channels, T);
    const double dt_expected = 1.0 / rec.fs;
    for (Eigen::Index i = 0; i < T; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        if (i > 0) {
            const double dt = row[0] - table.rows[static_cast<std::size_t>(i - 1)][0];
            if (!(dt > 0.0))
                throw ParseError("time column is not increasing", signal_path, table.lines[static_cast<std::size_t>(i)]);
            if (std::abs(dt - dt_expected) > 1e-6)
                throw ParseError("sampling interval deviates from 1/fs", signal_path,
                                 table.lines[static_cast<std::size_t>(i)]);
        }
        for (Eigen::Index c = 0; c < channels; ++c) rec.samples(c, i) = row[static_cast<std::size_t>(c + 1)];
    }

    const auto ann = csv::read_numeric(annotation_path);
    if (ann.header.size() != 2 || ann.header[0] != "start_s" || ann.header[1] != "end_s")
        throw ParseError("annotation header must be start_s,end_s", annotation_path, 1);
    const double duration = rec.duration_s();
    double prev_end = -1.0;
    for (std::size_t r = 0; r < ann.rows.size(); ++r) {
        const Interval iv{ann.rows[r][0], ann.rows[r][1]};
        if (!(iv.start_s >= 0.0) || !(iv.end_s > iv.start_s))
            throw ParseError("interval must satisfy 0 <= start_s < end_s", annotation_path, ann.lines[r]);
        if (iv.end_s > duration + 1e-9)
            throw ParseError("interval ends after the record (" + csv::format_number(duration) + " s)",
                             annotation_path, ann.lines[r]);
        if (iv.start_s < prev_end)
            throw ParseError("interval overlaps the previous one or is out of order", annotation_path, ann.lines[r]);
        prev_end = iv.end_s;
        rec.seizure_intervals.push_back(iv);
    }
    return rec;
}

void save_raw(const SignalRecord& record, const RecordPaths& paths) {
    validate(record);
    std::string sig = "t";
    for (std::size_t c = 0; c < record.channels(); ++c) sig += ",ch" + std::to_string(c + 1);
    sig += '\n';
    for (Eigen::Index i = 0; i < record.samples.cols(); ++i) {
        sig += csv::format_number(static_cast<double>(i) / record.fs);
        for (Eigen::Index c = 0; c < record.samples.rows(); ++c) {
            sig += ',';
            sig += csv::format_number(record.samples(c, i));
        }
        sig += '\n';
    }
    csv::write_file(paths.signal, sig);

    std::string ann = "start_s,end_s\n";
    for (const auto& iv : record.seizure_intervals)
        ann += csv::format_number(iv.start_s) + "," + csv::format_number(iv.end_s) + "\n";
    csv::write_file(paths.annotation, ann);

    KeyValues meta;
    meta.set("fs", csv::format_number(record.fs));
    if (!record.id.empty()) meta.set("id", record.id);
    csv::write_file(paths.metadata, meta.to_string());
}

std::vector<RecordPaths> discover_records(const std::string& directory) {
    std::vector<std::string> names;
    if (!fs::is_directory(directory)) return {};
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (!entry.is_regular_file()) continue;
        const std::string file = entry.path().filename().string();
        if (!ends_with(file, ".csv") || ends_with(file, ".ann.csv")) continue;
        const std::string name = file.substr(0, file.size() - 4);
        if (!fs::exists(fs::path(directory) / (name + ".meta"))) continue;
        names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    std::vector<RecordPaths> out;
    for (const auto& n : names) out.push_back(record_paths(directory, n));
    return out;
}

std::vector<std::string> discover_datasets(const std::string& raw_dir) {
    std::vector<std::string> ids;
    if (!fs::is_directory(raw_dir)) return ids;
    for (const auto& entry : fs::directory_iterator(raw_dir)) {
        if (entry.is_directory() && !discover_records(entry.path().string()).empty())
            ids.push_back(entry.path().filename().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<SignalRecord> load_dataset(const std::string& directory) {
    std::vector<SignalRecord> out;
    for (const auto& p : discover_records(directory)) out.push_back(load_raw(p.signal, p.annotation, p.metadata));
    return out;
}

std::string feature_path(const std::string& directory, const std::string& dataset_id, std::size_t view) {
    return (fs::path(directory) / (dataset_id + "_" + view_name(view) + ".csv")).string();
}

std::string normalizer_path(const std::string& directory, const std::string& dataset_id) {
    return (fs::path(directory) / (dataset_id + "_norm.csv")).string();
}

void write_features(const std::string& directory, const std::string& dataset_id,
                    const MultiViewDataset& ds) {
    validate_multiview(ds);
    const auto labels = argmax_decode(ds.labels());
    for (std::size_t v = 0; v < ds.num_views(); ++v) {
        const std::string name = view_name(v);
        const Matrix& x = ds.views[v].data;
        std::string out;
        for (Eigen::Index j = 0; j < x.cols(); ++j) out += name + "_" + std::to_string(j) + ",";
        out += "label\n";
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < x.cols(); ++j) out += csv::format_number(x(i, j)) + ",";
            out += std::to_string(labels[static_cast<std::size_t>(i)]) + "\n";
        }
        csv::write_file(feature_path(directory, dataset_id, v), out);
    }
}

MultiViewDataset read_features(const std::string& directory, const std::string& dataset_id,
                               std::size_t classes) {
    std::vector<Matrix> views;
    std::vector<std::size_t> labels;
    for (std::size_t v = 0; v < kNumViews; ++v) {
        const std::string path = feature_path(directory, dataset_id, v);
        if (!fs::exists(path)) throw ParseError("missing feature file", path, 0);
        const auto t = csv::read_numeric(path);
        if (t.header.empty() || t.header.back() != "label") throw ParseError("last column must be 'label'", path, 1);
        const auto d = static_cast<Eigen::Index>(t.header.size()) - 1;
        Matrix x(static_cast<Eigen::Index>(t.rows.size()), d);
        std::vector<std::size_t> view_labels;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            for (Eigen::Index j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), j) = t.rows[i][static_cast<std::size_t>(j)];
            const double lab = t.rows[i].back();
            if (lab < 0.0 || lab != std::floor(lab) || lab >= static_cast<double>(classes))
                throw ParseError("label must be an integer in [0, " + std::to_string(classes) + ")", path, t.lines[i]);
            view_labels.push_back(static_cast<std::size_t>(lab));
        }
        if (v == 0) {
            labels = view_labels;
        } else if (view_labels != labels) {
            throw ParseError("labels differ from the " + std::string(view_name(0)) + " view", path, 0);
        }
        views.push_back(std::move(x));
    }
    auto ds = make_multiview(std::move(views), one_hot_encode(labels, classes), DomainTag::source);
    validate_multiview(ds);
    return ds;
}

void write_normalizer(const std::string& path, const Normalizer& n) {
    std::string out = "view,feature,mean,scale\n";
    for (std::size_t v = 0; v < n.mean.size(); ++v) {
        for (Eigen::Index j = 0; j < n.mean[v].size(); ++j) {
            out += std::to_string(v) + "," + std::to_string(j) + "," + csv::format_number(n.mean[v](j)) + "," +
                   csv::format_number(n.scale[v](j)) + "\n";
        }
    }
    csv::write_file(path, out);
}

Normalizer read_normalizer(const std::string& path) {
    const auto t = csv::read_numeric(path);
    if (t.header.size() != 4) throw ParseError("expected view,feature,mean,scale", path, 1);
    std::vector<std::vector<std::pair<double, double>>> cols;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto v = static_cast<std::size_t>(t.rows[i][0]);
        const auto j = static_cast<std::size_t>(t.rows[i][1]);
        if (v > cols.size()) throw ParseError("views out of order", path, t.lines[i]);
        if (v == cols.size()) cols.emplace_back();
        if (j != cols[v].size()) throw ParseError("features out of order", path, t.lines[i]);
        if (!(t.rows[i][3] > 0.0)) throw ParseError("scale must be positive", path, t.lines[i]);
        cols[v].emplace_back(t.rows[i][2], t.rows[i][3]);
    }
    Normalizer n;
    for (const auto& c : cols) {
        Vector mu(static_cast<Eigen::Index>(c.size()));
        Vector sd(static_cast<Eigen::Index>(c.size()));
        for (std::size_t j = 0; j < c.size(); ++j) {
            mu(static_cast<Eigen::Index>(j)) = c[j].first;
            sd(static_cast<Eigen::Index>(j)) = c[j].second;
        }
        n.mean.push_back(std::move(mu));
        n.scale.push_back(std::move(sd));
    }
    return n;
}

}  // namespace mvtl::dataio
