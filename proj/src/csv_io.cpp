#include "cems/csv_io.hpp"

#include "cems/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cems {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path + "' for reading");
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        table.header = split_line(line);
        break;
    }
    if (table.header.empty()) fail(ErrorKind::Data, "'" + path + "' has no header row");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != table.header.size())
            fail(ErrorKind::Data, path + ":" + std::to_string(line_no) + ": expected " +
                                      std::to_string(table.header.size()) + " columns, found " +
                                      std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string& cell = cells[c];
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            if (first != last && *first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, row[c]);
            if (cell.empty() || ec != std::errc() || ptr != last)
                fail(ErrorKind::Data, path + ":" + std::to_string(line_no) + ": column " + std::to_string(c + 1) +
                                          " ('" + table.header[c] + "') is not numeric: '" + cell + "'");
            if (!std::isfinite(row[c]))
                fail(ErrorKind::Data, path + ":" + std::to_string(line_no) + ": column " + std::to_string(c + 1) +
                                          " ('" + table.header[c] + "') is not finite");
        }
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            table.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values) {
    if (static_cast<Index>(header.size()) != values.cols())
        fail(ErrorKind::Internal, "CSV header width does not match data");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (Index r = 0; r < values.rows(); ++r) {
        for (Index c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_double(values(r, c));
        out << '\n';
    }
    out.flush();
    if (!out) fail(ErrorKind::Io, "write to '" + path + "' failed");
}

Dataset load_csv(const std::string& path, const std::vector<std::string>& target_selectors) {
    if (target_selectors.empty()) fail(ErrorKind::Schema, "no target columns selected");
    const CsvTable table = read_csv(path);
    std::vector<Index> target_cols;
    for (const std::string& name : target_selectors) {
        const auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it == table.header.end()) fail(ErrorKind::Schema, "target column '" + name + "' not found in '" + path + "'");
        const auto col = static_cast<Index>(it - table.header.begin());
        if (std::find(target_cols.begin(), target_cols.end(), col) != target_cols.end())
            fail(ErrorKind::Schema, "target column '" + name + "' selected twice");
        target_cols.push_back(col);
    }
    std::vector<Index> feature_cols;
    for (Index c = 0; c < static_cast<Index>(table.header.size()); ++c)
        if (std::find(target_cols.begin(), target_cols.end(), c) == target_cols.end()) feature_cols.push_back(c);

    Dataset d;
    d.features = table.values(Eigen::all, feature_cols);
    d.targets = table.values(Eigen::all, target_cols);
    for (Index c : feature_cols) d.feature_names.push_back(table.header[static_cast<std::size_t>(c)]);
    for (Index c : target_cols) d.target_names.push_back(table.header[static_cast<std::size_t>(c)]);
    validate(d);
    return d;
}

void save_csv(const Dataset& dataset, const std::string& path) {
    std::vector<std::string> header = dataset.feature_names;
    header.insert(header.end(), dataset.target_names.begin(), dataset.target_names.end());
    write_csv(path, header, joint_matrix(dataset));
}

void save_augmented(const AugmentedSamples& samples, const Dataset& normalized_original,
                    const NormalizationState& state, const std::string& path, const ExportOptions& options) {
    const Index n_orig = options.append_original ? normalized_original.rows() : 0;
    const Index n = n_orig + samples.size();
    const Index dim = normalized_original.ambient_dim();

    Eigen::MatrixXd joint(n, dim);
    if (n_orig > 0) joint.topRows(n_orig) = joint_matrix(normalized_original);
    joint.bottomRows(samples.size()) = samples.samples;
    Dataset out = dataset_from_joint(normalized_original, joint);
    if (options.denormalize) out = denormalize_all(out, state);

    std::vector<std::string> header = out.feature_names;
    header.insert(header.end(), out.target_names.begin(), out.target_names.end());
    Eigen::MatrixXd values = joint_matrix(out);

    if (options.include_provenance) {
        Index eta_dim = 0;
        for (const auto& rec : samples.provenance) eta_dim = std::max(eta_dim, rec.eta.size());
        header.insert(header.end(), {"prov_anchor", "prov_source", "prov_residual"});
        for (Index i = 0; i < eta_dim; ++i) header.push_back("prov_eta_" + std::to_string(i + 1));
        Eigen::MatrixXd prov = Eigen::MatrixXd::Zero(n, 3 + eta_dim);
        for (Index r = 0; r < n_orig; ++r) {
            prov(r, 0) = -1.0;
            prov(r, 1) = static_cast<double>(r);
        }
        for (Index r = 0; r < samples.size(); ++r) {
            const SampleRecord& rec = samples.provenance[static_cast<std::size_t>(r)];
            prov(n_orig + r, 0) = static_cast<double>(rec.anchor);
            prov(n_orig + r, 1) = static_cast<double>(rec.source);
            prov(n_orig + r, 2) = rec.residual;
            prov.row(n_orig + r).segment(3, rec.eta.size()) = rec.eta.transpose();
        }
        Eigen::MatrixXd wide(n, values.cols() + prov.cols());
        wide << values, prov;
        values = std::move(wide);
    }
    write_csv(path, header, values);
}

}  // namespace cems
