#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvtl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input that violates a documented precondition or invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Linear system that cannot be solved, or an objective that went non-finite.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Malformed file content. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string file, std::size_t line);
    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

enum class DomainTag { source, target };

const char* to_string(DomainTag tag);

struct LabeledSample {
    Vector features;
    std::size_t label = 0;
};

// One feature representation of a set of samples. `labels` is N x C one-hot
// and may be absent for data used only through its distribution.
struct ViewDataset {
    std::size_t view_id = 0;
    Matrix data;
    std::optional<Matrix> labels;

    std::size_t samples() const { return static_cast<std::size_t>(data.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(data.cols()); }
};

struct MultiViewDataset {
    std::vector<ViewDataset> views;
    DomainTag domain = DomainTag::source;

    std::size_t num_views() const { return views.size(); }
    std::size_t samples() const { return views.empty() ? 0 : views.front().samples(); }
    bool labeled() const { return !views.empty() && views.front().labels.has_value(); }
    std::size_t num_classes() const;
    const Matrix& labels() const;

    // Rows `rows` of every view, labels included when present.
    MultiViewDataset subset(std::span<const std::size_t> rows) const;
};

// Builds a dataset whose views share one label matrix.
MultiViewDataset make_multiview(std::vector<Matrix> view_data, std::optional<Matrix> labels,
                                DomainTag domain);

struct TrainConfig {
    std::size_t rules = 3;
    double fuzzy_index = 2.0;
    double lambda_pg = 1.0;
    double lambda_t = 1.0;
    double lambda_d = 1.0;
    double lambda_un = 1.0;
    std::size_t max_iters = 10;
    double tol = 1e-6;
    std::uint64_t seed = 42;
    bool prior_refresh = false;

    // Antecedent clustering.
    double clustering_fuzzifier = 2.0;
    double spread_scale = 1.0;
};

void validate(const TrainConfig& cfg);

Matrix one_hot_encode(std::span<const std::size_t> labels, std::size_t classes);

// Row-wise argmax, ties to the lowest column.
std::vector<std::size_t> argmax_decode(const Matrix& scores);

bool all_finite(const Matrix& m);

// Checks every invariant of MultiViewDataset and its views. Returns the input
// unchanged on success.
const MultiViewDataset& validate_multiview(const MultiViewDataset& ds);

}  // namespace mvtl
