#include "appwatch/dataset.hpp"

#include "appwatch/csv.hpp"
#include "appwatch/error.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace appwatch {

LabeledDataset LabeledDataset::subset(const std::vector<Eigen::Index>& rows) const
{
    LabeledDataset out;
    out.features = features(rows, Eigen::all);
    out.labels = labels(rows);
    out.feature_names = feature_names;
    if (!row_ids.empty()) {
        out.row_ids.reserve(rows.size());
        for (auto r : rows) out.row_ids.push_back(row_ids[static_cast<std::size_t>(r)]);
    }
    return out;
}

void LabeledDataset::validate() const
{
    if (features.rows() != labels.size()) {
        throw Error(Errc::DimensionMismatch, std::to_string(features.rows()) + " rows vs " +
                                                 std::to_string(labels.size()) + " labels");
    }
    if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != features.cols()) {
        throw Error(Errc::DimensionMismatch, "feature_names does not match column count");
    }
    if (!row_ids.empty() && static_cast<Eigen::Index>(row_ids.size()) != features.rows()) {
        throw Error(Errc::DimensionMismatch, "row_ids does not match row count");
    }
    if (!features.allFinite()) throw Error(Errc::NonFiniteFeature, "feature matrix has NaN/inf");
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels(i) != 0 && labels(i) != 1) throw Error(Errc::InvalidArgument, "labels must be 0/1");
    }
}

void write_dataset_csv(std::ostream& out, const LabeledDataset& data)
{
    const bool with_ids = !data.row_ids.empty();
    if (with_ids) out << "app_id,";
    for (const auto& name : data.feature_names) out << csv::field(name) << ',';
    out << "label\n";
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        if (with_ids) out << csv::field(data.row_ids[static_cast<std::size_t>(i)]) << ',';
        for (Eigen::Index j = 0; j < data.cols(); ++j) out << csv::number(data.features(i, j)) << ',';
        out << data.labels(i) << '\n';
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

}  // namespace

LabeledDataset read_dataset_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::EmptyDataset, "missing header");
    auto header = split_csv_line(line);
    if (header.empty() || header.back() != "label") {
        throw Error(Errc::MalformedLine, "header must end with 'label'");
    }
    const bool with_ids = header.front() == "app_id";
    LabeledDataset data;
    data.feature_names.assign(header.begin() + (with_ids ? 1 : 0), header.end() - 1);
    const std::size_t d = data.feature_names.size();

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": wrong cell count");
        }
        std::size_t c = 0;
        if (with_ids) data.row_ids.push_back(cells[c++]);
        std::vector<double> row(d);
        try {
            for (std::size_t j = 0; j < d; ++j) row[j] = std::stod(cells[c++]);
            labels.push_back(std::stoi(cells[c]));
        } catch (const std::exception&) {
            throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": not a number");
        }
        rows.push_back(std::move(row));
    }
    data.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    data.labels.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) data.features(i, j) = rows[i][j];
        data.labels(i) = labels[i];
    }
    data.validate();
    return data;
}

}  // namespace appwatch
