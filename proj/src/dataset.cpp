#include "sda/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sda {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, delim)) out.push_back(cell);
    if (!line.empty() && line.back() == delim) out.push_back("");
    return out;
}

bool parse_double(const std::string& s, double& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return false;
    return std::isfinite(v);
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

}  // namespace

Dataset load_csv(const std::string& path, const OutcomeSpec& spec, char delimiter) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line, delimiter);

    std::vector<int> outcome_cols;
    if (spec.kind == OutcomeKind::survival) {
        if (spec.time_column.empty() || spec.event_column.empty())
            throw ConfigError("survival outcome needs both time and event columns");
        int t = find_column(header, spec.time_column);
        int e = find_column(header, spec.event_column);
        if (t < 0) throw DataError("missing outcome column: " + spec.time_column);
        if (e < 0) throw DataError("missing outcome column: " + spec.event_column);
        outcome_cols = {t, e};
    } else {
        int c = find_column(header, spec.column);
        if (c < 0) throw DataError("missing outcome column: " + spec.column);
        outcome_cols = {c};
    }

    std::vector<int> predictor_cols;
    for (int j = 0; j < static_cast<int>(header.size()); ++j)
        if (std::find(outcome_cols.begin(), outcome_cols.end(), j) == outcome_cols.end())
            predictor_cols.push_back(j);
    if (predictor_cols.empty()) throw DataError("no predictor columns in " + path);

    std::vector<std::vector<double>> rows;
    std::vector<double> y_values, y_times;
    std::vector<int> y_events;
    std::vector<std::string> y_labels;

    int row_number = 1;  // header is row 1
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_line(line, delimiter);
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(row_number) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));

        std::vector<double> xrow(predictor_cols.size());
        for (std::size_t k = 0; k < predictor_cols.size(); ++k) {
            double v;
            if (!parse_double(cells[predictor_cols[k]], v))
                throw DataError("row " + std::to_string(row_number) + ", column '" +
                                header[predictor_cols[k]] + "': unparseable cell '" +
                                cells[predictor_cols[k]] + "'");
            xrow[k] = v;
        }
        rows.push_back(std::move(xrow));

        if (spec.kind == OutcomeKind::survival) {
            double t, e;
            if (!parse_double(cells[outcome_cols[0]], t))
                throw DataError("row " + std::to_string(row_number) + ", column '" +
                                spec.time_column + "': unparseable cell");
            if (!parse_double(cells[outcome_cols[1]], e))
                throw DataError("row " + std::to_string(row_number) + ", column '" +
                                spec.event_column + "': unparseable cell");
            if (t < 0)
                throw DataError("row " + std::to_string(row_number) + ": negative survival time");
            if (e != 0.0 && e != 1.0)
                throw DataError("row " + std::to_string(row_number) +
                                ": event indicator not in {0,1}");
            y_times.push_back(t);
            y_events.push_back(static_cast<int>(e));
        } else if (spec.kind == OutcomeKind::categorical) {
            y_labels.push_back(cells[outcome_cols[0]]);
        } else {
            double v;
            if (!parse_double(cells[outcome_cols[0]], v))
                throw DataError("row " + std::to_string(row_number) + ", column '" + spec.column +
                                "': unparseable cell");
            y_values.push_back(v);
        }
    }

    const int n = static_cast<int>(rows.size());
    const int p = static_cast<int>(predictor_cols.size());
    if (n < 2) throw DataError("need at least 2 data rows, got " + std::to_string(n));

    Dataset d;
    d.x.resize(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) d.x(i, j) = rows[i][j];
    for (int j : predictor_cols) d.column_names.push_back(header[j]);

    d.y.kind = spec.kind;
    if (spec.kind == OutcomeKind::survival) {
        d.y.values = Eigen::Map<Eigen::VectorXd>(y_times.data(), n);
        d.y.events = Eigen::Map<Eigen::VectorXi>(y_events.data(), n);
    } else if (spec.kind == OutcomeKind::categorical) {
        d.y.labels = std::move(y_labels);
    } else {
        d.y.values = Eigen::Map<Eigen::VectorXd>(y_values.data(), n);
    }

    d.column_means = Eigen::VectorXd::Zero(p);
    for (int j = 0; j < p; ++j) {
        const double lo = d.x.col(j).minCoeff(), hi = d.x.col(j).maxCoeff();
        if (lo == hi) d.constant_columns.push_back(j);
    }
    return d;
}

Eigen::VectorXd center_matrix(Eigen::MatrixXd& x) {
    Eigen::VectorXd means = x.colwise().mean();
    x.rowwise() -= means.transpose();
    return means;
}

Dataset center_columns(const Dataset& d) {
    if (d.centered) throw std::invalid_argument("dataset is already centered");
    Dataset out = d;
    out.column_means = center_matrix(out.x);
    out.centered = true;
    return out;
}

Dataset scale_columns(const Dataset& d) {
    Dataset out = d;
    const int n = d.n();
    for (int j = 0; j < d.p(); ++j) {
        const double mean = d.x.col(j).mean();
        const double var = (d.x.col(j).array() - mean).square().sum() / n;
        if (var > 0) out.x.col(j) /= std::sqrt(var);
    }
    return out;
}

void write_csv(const Dataset& d, const std::string& path, char delimiter) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    char buf[64];

    for (int j = 0; j < d.p(); ++j) {
        out << (d.column_names.empty() ? "x" + std::to_string(j + 1) : d.column_names[j]);
        out << delimiter;
    }
    switch (d.y.kind) {
        case OutcomeKind::continuous: out << "y"; break;
        case OutcomeKind::categorical: out << "y"; break;
        case OutcomeKind::survival: out << "time" << delimiter << "event"; break;
    }
    out << "\n";

    for (int i = 0; i < d.n(); ++i) {
        for (int j = 0; j < d.p(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", d.x(i, j));
            out << buf << delimiter;
        }
        switch (d.y.kind) {
            case OutcomeKind::continuous:
                std::snprintf(buf, sizeof(buf), "%.17g", d.y.values(i));
                out << buf;
                break;
            case OutcomeKind::categorical: out << d.y.labels[i]; break;
            case OutcomeKind::survival:
                std::snprintf(buf, sizeof(buf), "%.17g", d.y.values(i));
                out << buf << delimiter << d.y.events(i);
                break;
        }
        out << "\n";
    }
}

void validate(const Dataset& d) {
    if (d.n() < 2 || d.p() < 1) throw DataError("need n >= 2 and p >= 1");
    if (!d.x.allFinite()) throw DataError("non-finite predictor entry");
    if (d.y.size() != d.n()) throw DataError("outcome length does not match row count");
    if (d.y.kind != OutcomeKind::categorical && !d.y.values.allFinite())
        throw DataError("non-finite outcome entry");
    if (d.y.kind == OutcomeKind::survival) {
        if ((d.y.values.array() < 0).any()) throw DataError("negative survival time");
        for (int i = 0; i < d.y.events.size(); ++i)
            if (d.y.events(i) != 0 && d.y.events(i) != 1)
                throw DataError("event indicator not in {0,1}");
    }
    if (d.centered) {
        for (int j = 0; j < d.p(); ++j)
            if (std::abs(d.x.col(j).mean()) > 1e-10)
                throw DataError("column " + std::to_string(j + 1) +
                                " marked centered but has nonzero mean");
    }
}

}  // namespace sda
