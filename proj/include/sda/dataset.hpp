#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sda/errors.hpp"

namespace sda {

enum class OutcomeKind { continuous, categorical, survival };

// Outcome column(s). `values` holds the numeric outcome (the observed time
// for survival data); categorical outcomes are stored as string labels and
// survival data additionally carries the 0/1 event indicator.
struct Outcome {
    OutcomeKind kind = OutcomeKind::continuous;
    Eigen::VectorXd values;
    std::vector<std::string> labels;
    Eigen::VectorXi events;

    int size() const {
        return kind == OutcomeKind::categorical ? static_cast<int>(labels.size())
                                                : static_cast<int>(values.size());
    }
};

// Which column(s) of a CSV form the outcome.
struct OutcomeSpec {
    OutcomeKind kind = OutcomeKind::continuous;
    std::string column;        // continuous / categorical
    std::string time_column;   // survival
    std::string event_column;  // survival
};

// Immutable after construction; share read-only across workers.
struct Dataset {
    Eigen::MatrixXd x;  // n rows, p predictor columns
    Outcome y;
    std::vector<std::string> column_names;
    Eigen::VectorXd column_means;      // means subtracted by center_columns
    bool centered = false;
    std::vector<int> constant_columns;  // zero-variance predictors, flagged at load

    int n() const { return static_cast<int>(x.rows()); }
    int p() const { return static_cast<int>(x.cols()); }
};

// Parse a delimited text file with a header row. Predictor cells must be
// finite reals; the outcome column(s) are pulled out per `spec`. Row and
// column order are preserved and the result is not centered.
Dataset load_csv(const std::string& path, const OutcomeSpec& spec, char delimiter = ',');

// Subtract each predictor column's sample mean. Throws if `d` is already
// centered. The outcome is untouched.
Dataset center_columns(const Dataset& d);

// In-place column centering of a raw matrix; returns the subtracted means.
Eigen::VectorXd center_matrix(Eigen::MatrixXd& x);

// Optional unit-variance scaling for ill-conditioned data (off by default in
// the CLI). Columns with zero variance are left unscaled.
Dataset scale_columns(const Dataset& d);

// Write the dataset back out with 17 significant digits so that
// load_csv(write_csv(d)) round-trips bit-identically.
void write_csv(const Dataset& d, const std::string& path, char delimiter = ',');

// Validate the Dataset invariants (finiteness, outcome domain); throws
// DataError with a description of the first violation.
void validate(const Dataset& d);

}  // namespace sda
