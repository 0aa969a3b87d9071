#pragma once

#include <string>
#include <vector>

#include "gafs/error.hpp"
#include "gafs/types.hpp"

namespace gafs {

/// How samples are laid out in an input file. Internally samples are always
/// stored as columns.
enum class Layout { kSamplesAsRows, kSamplesAsColumns };

/// Per-feature (min, max) recorded when the feature was scaled.
struct FeatureScale {
    double min = 0.0;
    double max = 0.0;
};

/// Dense dataset of d features by n samples, columns are samples.
struct DataMatrix {
    Matrix values;  // d x n

    /// Per-feature scaling metadata; empty for raw (unscaled) data.
    std::vector<FeatureScale> scaling;

    /// The delta used by scale_features; meaningful only when scaled.
    double scale_delta = 0.0;

    Index features() const { return values.rows(); }
    Index samples() const { return values.cols(); }
    bool scaled() const { return !scaling.empty(); }
};

/// Reads a delimiter-separated text file (comma or whitespace) into a
/// DataMatrix. A non-numeric first line is treated as a single header line
/// and skipped. Throws IoError on unreadable files and ParseError (with
/// 1-based row/column) on ragged rows or non-finite tokens.
DataMatrix load_matrix(const std::string& path, Layout layout);

/// Affinely maps every feature row into [delta, 1 - delta]; constant features
/// map to 0.5. The (min, max) of each feature is recorded so the mapping can
/// be inverted. delta must lie in (0, 0.5).
DataMatrix scale_features(const DataMatrix& x, double delta = 1e-3);

/// Inverts scale_features using the recorded metadata. Constant features are
/// restored to their original value.
DataMatrix unscale_features(const DataMatrix& x);

/// Reads a one-column file of integer class ids (1-based). Throws ParseError
/// on non-integer tokens or ids < 1.
std::vector<int> load_labels(const std::string& path);

}  // namespace gafs
