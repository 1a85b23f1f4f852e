#pragma once

#include "cems/dataset.hpp"
#include "cems/samplers.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cems {

/// Header plus numeric rows (comma separated, '.' decimal point).
struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values);

/// Columns named in `target_selectors` become targets (in selector order),
/// the rest stay features in file order.
Dataset load_csv(const std::string& path, const std::vector<std::string>& target_selectors);

/// Features then targets, 17 significant digits.
void save_csv(const Dataset& dataset, const std::string& path);

struct ExportOptions {
    bool denormalize = false;        // map back to the units of the loaded file
    bool append_original = false;    // write the training rows before the generated ones
    bool include_provenance = false; // prov_anchor, prov_source, prov_residual, prov_eta_*
};

/// Writes generated samples (normalized joint space) with the column names
/// of `normalized_original`.
void save_augmented(const AugmentedSamples& samples, const Dataset& normalized_original,
                    const NormalizationState& state, const std::string& path, const ExportOptions& options);

}  // namespace cems
