#include "mvtl/archive.hpp"

#include "mvtl/csv.hpp"
#include "mvtl/kvconfig.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <memory>

namespace mvtl {

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
        throw Error("sha256: digest computation failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

namespace {

constexpr const char* kMagic = "mvtl-model-archive";

std::string numbers(const Matrix& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (!out.empty()) out += ',';
            out += csv::format_number(m(i, j));
        }
    }
    return out;
}

std::string numbers(const Vector& v) {
    return numbers(Matrix(v));
}

Matrix parse_matrix(const KeyValues& kv, const std::string& key, Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    if (rows * cols == 0) return m;
    const auto values = kv.get_doubles(key, {});
    if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
        throw ArchiveError(ArchiveError::Kind::format, "archive: '" + key + "' has " +
                                                           std::to_string(values.size()) + " values, expected " +
                                                           std::to_string(rows * cols));
    }
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
    return m;
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string serialize_model(const ModelArchive& archive) {
    const MvTlModel& m = archive.model;
    const TrainConfig& c = m.config;
    std::string body = std::string(kMagic) + "\n";
    body += "version=" + std::to_string(kArchiveVersion) + "\n";
    body += "classes=" + std::to_string(m.classes) + "\n";
    body += "views=" + std::to_string(m.num_views()) + "\n";
    body += "fuzzy_index=" + csv::format_number(m.fuzzy_index) + "\n";
    body += "weights=" + numbers(m.weights) + "\n";
    body += "config.rules=" + std::to_string(c.rules) + "\n";
    body += "config.fuzzy_index=" + csv::format_number(c.fuzzy_index) + "\n";
    body += "config.lambda_pg=" + csv::format_number(c.lambda_pg) + "\n";
    body += "config.lambda_t=" + csv::format_number(c.lambda_t) + "\n";
    body += "config.lambda_d=" + csv::format_number(c.lambda_d) + "\n";
    body += "config.lambda_un=" + csv::format_number(c.lambda_un) + "\n";
    body += "config.max_iters=" + std::to_string(c.max_iters) + "\n";
    body += "config.tol=" + csv::format_number(c.tol) + "\n";
    body += "config.seed=" + std::to_string(c.seed) + "\n";
    body += "config.prior_refresh=" + bool_str(c.prior_refresh) + "\n";
    body += "config.clustering_fuzzifier=" + csv::format_number(c.clustering_fuzzifier) + "\n";
    body += "config.spread_scale=" + csv::format_number(c.spread_scale) + "\n";
    body += "normalizer=" + bool_str(!archive.normalizer.empty()) + "\n";
    for (std::size_t v = 0; v < m.num_views(); ++v) {
        const std::string p = "view." + std::to_string(v) + ".";
        const auto& a = m.antecedents.views[v];
        const auto& q = m.consequents[v];
        body += p + "rules=" + std::to_string(a.rules()) + "\n";
        body += p + "dim=" + std::to_string(a.dim()) + "\n";
        body += p + "scale=" + csv::format_number(a.scale) + "\n";
        body += p + "centers=" + numbers(a.centers) + "\n";
        body += p + "spreads=" + numbers(a.spreads) + "\n";
        body += p + "lambda=" + csv::format_number(q.lambda) + "\n";
        body += p + "consequents=" + numbers(q.P) + "\n";
        if (!archive.normalizer.empty()) {
            body += p + "norm_mean=" + numbers(archive.normalizer.mean[v]) + "\n";
            body += p + "norm_scale=" + numbers(archive.normalizer.scale[v]) + "\n";
        }
    }
    return body + "sha256=" + sha256_hex(body) + "\n";
}

ModelArchive parse_model(const std::string& text) {
    const auto first_nl = text.find('\n');
    if (first_nl == std::string::npos || text.substr(0, first_nl) != kMagic)
        throw ArchiveError(ArchiveError::Kind::format, "archive: missing mvtl-model-archive header");
    const auto second_nl = text.find('\n', first_nl + 1);
    const std::string version_line = text.substr(first_nl + 1, second_nl - first_nl - 1);
    if (version_line.rfind("version=", 0) != 0)
        throw ArchiveError(ArchiveError::Kind::format, "archive: missing version line");
    int version = 0;
    try {
        version = std::stoi(version_line.substr(8));
    } catch (const std::exception&) {
        throw ArchiveError(ArchiveError::Kind::format, "archive: unreadable version '" + version_line + "'");
    }
    if (version != kArchiveVersion) {
        throw ArchiveError(ArchiveError::Kind::version,
                           "archive: format version " + std::to_string(version) + " is not supported (this build reads version " +
                               std::to_string(kArchiveVersion) + ")");
    }

    // Checksum line is last; anything else means truncation or tampering.
    std::string trimmed = text;
    while (!trimmed.empty() && trimmed.back() == '\n') trimmed.pop_back();
    const auto last_nl = trimmed.rfind('\n');
    const std::string last = last_nl == std::string::npos ? trimmed : trimmed.substr(last_nl + 1);
    if (last.rfind("sha256=", 0) != 0)
        throw ArchiveError(ArchiveError::Kind::checksum, "archive: checksum line missing (file truncated?)");
    const std::string body = text.substr(0, last_nl + 1);
    if (sha256_hex(body) != last.substr(7))
        throw ArchiveError(ArchiveError::Kind::checksum, "archive: checksum mismatch");

    KeyValues kv;
    try {
        kv = KeyValues::parse(body.substr(first_nl + 1), "archive");
    } catch (const ParseError& e) {
        throw ArchiveError(ArchiveError::Kind::format, e.what());
    }

    ModelArchive out;
    try {
        MvTlModel& m = out.model;
        m.classes = kv.get_size("classes", 0);
        const std::size_t views = kv.get_size("views", 0);
        m.fuzzy_index = kv.get_double("fuzzy_index");
        TrainConfig& c = m.config;
        c.rules = kv.get_size("config.rules", c.rules);
        c.fuzzy_index = kv.get_double("config.fuzzy_index", c.fuzzy_index);
        c.lambda_pg = kv.get_double("config.lambda_pg", c.lambda_pg);
        c.lambda_t = kv.get_double("config.lambda_t", c.lambda_t);
        c.lambda_d = kv.get_double("config.lambda_d", c.lambda_d);
        c.lambda_un = kv.get_double("config.lambda_un", c.lambda_un);
        c.max_iters = kv.get_size("config.max_iters", c.max_iters);
        c.tol = kv.get_double("config.tol", c.tol);
        c.seed = static_cast<std::uint64_t>(std::stoull(kv.get("config.seed", "42")));
        c.prior_refresh = kv.get_bool("config.prior_refresh", c.prior_refresh);
        c.clustering_fuzzifier = kv.get_double("config.clustering_fuzzifier", c.clustering_fuzzifier);
        c.spread_scale = kv.get_double("config.spread_scale", c.spread_scale);
        m.weights = parse_matrix(kv, "weights", static_cast<Eigen::Index>(views), 1);
        const bool has_norm = kv.get_bool("normalizer", false);
        for (std::size_t v = 0; v < views; ++v) {
            const std::string p = "view." + std::to_string(v) + ".";
            const auto k = static_cast<Eigen::Index>(kv.get_size(p + "rules", 0));
            const auto d = static_cast<Eigen::Index>(kv.get_size(p + "dim", 0));
            ViewAntecedents a;
            a.scale = kv.get_double(p + "scale");
            a.centers = parse_matrix(kv, p + "centers", k, d);
            a.spreads = parse_matrix(kv, p + "spreads", k, d);
            m.antecedents.views.push_back(std::move(a));
            ConsequentBlock q;
            q.lambda = kv.get_double(p + "lambda");
            q.P = parse_matrix(kv, p + "consequents", k * (d + 1), static_cast<Eigen::Index>(m.classes));
            m.consequents.push_back(std::move(q));
            if (has_norm) {
                out.normalizer.mean.push_back(parse_matrix(kv, p + "norm_mean", d, 1));
                out.normalizer.scale.push_back(parse_matrix(kv, p + "norm_scale", d, 1));
            }
        }
    } catch (const ArchiveError&) {
        throw;
    } catch (const std::exception& e) {
        throw ArchiveError(ArchiveError::Kind::format, std::string("archive: ") + e.what());
    }
    return out;
}

void save_model(const ModelArchive& archive, const std::string& path) {
    csv::write_file(path, serialize_model(archive));
}

ModelArchive load_model(const std::string& path) {
    return parse_model(csv::read_file(path));
}

}  // namespace mvtl
