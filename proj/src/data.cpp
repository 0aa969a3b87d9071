#include "gafs/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gafs {
namespace {

// Parses a full token as a finite double. Rejects partial parses such as
// "1.5x" and non-finite values ("nan", "inf").
bool parse_finite(const std::string& token, double& out) {
    if (token.empty()) return false;
    const char* begin = token.c_str();
    char* end = nullptr;
    errno = 0;
    double value = std::strtod(begin, &end);
    if (end != begin + token.size() || errno == ERANGE) return false;
    if (!std::isfinite(value)) return false;
    out = value;
    return true;
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::string normalized = line;
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    std::istringstream stream(normalized);
    std::vector<std::string> tokens;
    std::string token;
    while (stream >> token) tokens.push_back(token);
    return tokens;
}

}  // namespace

DataMatrix load_matrix(const std::string& path, Layout layout) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open data file: " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    int line_number = 0;
    bool saw_content = false;
    std::size_t arity = 0;

    while (std::getline(in, line)) {
        ++line_number;
        auto tokens = split_tokens(line);
        if (tokens.empty()) continue;

        if (!saw_content) {
            saw_content = true;
            // Header auto-detection: if any token of the first content line is
            // not a finite real, the whole line is treated as a header.
            double ignored;
            bool numeric = std::all_of(tokens.begin(), tokens.end(),
                                       [&](const std::string& t) { return parse_finite(t, ignored); });
            if (!numeric) continue;
        }

        std::vector<double> values(tokens.size());
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (!parse_finite(tokens[i], values[i])) {
                throw ParseError(line_number, static_cast<int>(i + 1),
                                 "non-numeric or non-finite token '" + tokens[i] + "' at row " +
                                     std::to_string(line_number) + ", column " + std::to_string(i + 1));
            }
        }
        if (!rows.empty() && values.size() != arity) {
            throw ParseError(line_number, 0,
                             "ragged row at line " + std::to_string(line_number) + ": expected " +
                                 std::to_string(arity) + " values, got " + std::to_string(values.size()));
        }
        arity = values.size();
        rows.push_back(std::move(values));
    }

    if (rows.empty()) throw ParseError("file contains no data rows: " + path);

    const auto file_rows = static_cast<Index>(rows.size());
    const auto file_cols = static_cast<Index>(arity);

    DataMatrix out;
    if (layout == Layout::kSamplesAsRows) {
        out.values.resize(file_cols, file_rows);
        for (Index i = 0; i < file_rows; ++i)
            for (Index j = 0; j < file_cols; ++j) out.values(j, i) = rows[i][j];
    } else {
        out.values.resize(file_rows, file_cols);
        for (Index i = 0; i < file_rows; ++i)
            for (Index j = 0; j < file_cols; ++j) out.values(i, j) = rows[i][j];
    }

    if (out.samples() < 2) {
        throw ParseError("dataset must contain at least two samples, got " +
                         std::to_string(out.samples()));
    }
    return out;
}

DataMatrix scale_features(const DataMatrix& x, double delta) {
    if (!(delta > 0.0 && delta < 0.5)) {
        throw ConfigError("scaling delta must lie in (0, 0.5), got " + std::to_string(delta));
    }

    DataMatrix out;
    out.values.resizeLike(x.values);
    out.scaling.resize(static_cast<std::size_t>(x.features()));
    out.scale_delta = delta;

    const double span = 1.0 - 2.0 * delta;
    for (Index i = 0; i < x.features(); ++i) {
        const double lo = x.values.row(i).minCoeff();
        const double hi = x.values.row(i).maxCoeff();
        out.scaling[static_cast<std::size_t>(i)] = {lo, hi};
        if (hi == lo) {
            out.values.row(i).setConstant(0.5);
        } else {
            // t = (x - lo) / (hi - lo) hits 0 and 1 exactly at the endpoints.
            out.values.row(i) = ((x.values.row(i).array() - lo) / (hi - lo)) * span + delta;
        }
    }
    return out;
}

DataMatrix unscale_features(const DataMatrix& x) {
    if (!x.scaled()) throw ConfigError("unscale_features requires scaling metadata");
    if (static_cast<Index>(x.scaling.size()) != x.features()) {
        throw ShapeError("scaling metadata size does not match feature count");
    }

    DataMatrix out;
    out.values.resizeLike(x.values);
    const double delta = x.scale_delta;
    const double span = 1.0 - 2.0 * delta;
    for (Index i = 0; i < x.features(); ++i) {
        const auto& scale = x.scaling[static_cast<std::size_t>(i)];
        if (scale.max == scale.min) {
            out.values.row(i).setConstant(scale.min);
        } else {
            out.values.row(i) =
                ((x.values.row(i).array() - delta) / span) * (scale.max - scale.min) + scale.min;
        }
    }
    return out;
}

std::vector<int> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open label file: " + path);

    std::vector<int> labels;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        auto tokens = split_tokens(line);
        if (tokens.empty()) continue;
        if (tokens.size() != 1) {
            throw ParseError(line_number, 0,
                             "label file must have one value per line, got " +
                                 std::to_string(tokens.size()) + " at line " + std::to_string(line_number));
        }
        const char* begin = tokens[0].c_str();
        char* end = nullptr;
        long value = std::strtol(begin, &end, 10);
        if (end != begin + tokens[0].size()) {
            throw ParseError(line_number, 1,
                             "non-integer label '" + tokens[0] + "' at line " + std::to_string(line_number));
        }
        if (value < 1) {
            throw ParseError(line_number, 1,
                             "class ids must be >= 1, got " + std::to_string(value) + " at line " +
                                 std::to_string(line_number));
        }
        labels.push_back(static_cast<int>(value));
    }
    if (labels.empty()) throw ParseError("label file contains no labels: " + path);
    return labels;
}

}  // namespace gafs
