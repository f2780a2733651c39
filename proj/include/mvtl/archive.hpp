#pragma once

#include "mvtl/features.hpp"
#include "mvtl/trainer.hpp"

#include <string>

namespace mvtl {

inline constexpr int kArchiveVersion = 1;

class ArchiveError : public Error {
public:
    enum class Kind { checksum, version, format };
    ArchiveError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// A trained model plus the feature statistics it expects its inputs in.
struct ModelArchive {
    MvTlModel model;
    Normalizer normalizer;
};

std::string sha256_hex(const std::string& bytes);

// Text body followed by a final "sha256=<hex>" line over all preceding bytes.
std::string serialize_model(const ModelArchive& archive);
ModelArchive parse_model(const std::string& text);

void save_model(const ModelArchive& archive, const std::string& path);
ModelArchive load_model(const std::string& path);

}  // namespace mvtl
