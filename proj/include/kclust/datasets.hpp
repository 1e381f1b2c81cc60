#pragma once

#include <string>

#include "kclust/core.hpp"
#include "kclust/rng.hpp"

namespace kclust {

enum class SyntheticKind { two_rings, gaussian_blobs };
enum class FileFormat { csv, libsvm };

SyntheticKind synthetic_kind_from_name(const std::string& name);
FileFormat file_format_from_name(const std::string& name);

/// two_rings: two concentric circles (radii 1 and 2) with radial Gaussian
/// noise; gaussian_blobs: two isotropic blobs at (-3,0) and (3,0) with
/// standard deviation `noise`. Labels are balanced; 0 first.
DataMatrix generate_synthetic(SyntheticKind kind, int n, double noise, RandomSource& rng);

/// csv: numeric columns, optionally a final integer label column; libsvm:
/// "<label> index:value ...", 1-based indices, width inferred from the file.
DataMatrix load_dataset(const std::string& path, FileFormat format,
                        bool labels_in_last_column = false);

/// Full-precision CSV writer (round-trips doubles exactly). Labels, when
/// present and requested, become a final integer column.
void save_csv(const DataMatrix& X, const std::string& path, bool include_labels = true);

}  // namespace kclust
