#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ervmix/matrix.hpp"

namespace ervmix {

// Invariant violations in otherwise well-formed inputs.
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed file content; the message names the offending row/column.
class ParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Read-count table X: X(i,j) is the number of reads from sample column j
// assigned to virus (junction) i.
struct CountMatrix {
    std::vector<std::string> virus_ids;   // m, unique
    std::vector<std::string> column_ids;  // n, unique
    Matrix<std::int64_t> counts;          // m x n, entries >= 0

    std::size_t num_viruses() const { return virus_ids.size(); }
    std::size_t num_columns() const { return column_ids.size(); }
    void validate() const;
};

struct GeoPoint {
    double longitude;
    double latitude;
};

// Experiment assignment and replicate structure of the sample columns.
// Columns carrying the same animal id form one replicate group S; the
// group representative is its lowest column index and the set of
// representatives plays the role of the unique-animal index set U.
struct CohortMetadata {
    std::vector<std::string> animal_ids;            // per column
    std::vector<int> experiment_of_column;          // per column, 0-based
    std::vector<std::string> experiment_labels;     // K, in first-appearance order
    std::vector<std::vector<int>> replicate_groups; // partition of 0..n-1, members ascending
    std::vector<int> group_of_column;               // per column
    std::vector<int> unique_columns;                // representative per group, ascending
    std::vector<std::optional<GeoPoint>> geo;       // per column

    std::size_t num_columns() const { return animal_ids.size(); }
    std::size_t num_groups() const { return replicate_groups.size(); }
    int num_experiments() const { return static_cast<int>(experiment_labels.size()); }
    bool has_full_geo() const;
    void validate(std::size_t n_columns) const;

    // Derives the group/representative structure from per-column labels.
    static CohortMetadata build(std::vector<std::string> animal_ids,
                                const std::vector<std::string>& experiment_ids,
                                std::vector<std::optional<GeoPoint>> geo = {});

    // Every column its own animal, one experiment.
    static CohortMetadata trivial(std::size_t n_columns);
};

struct CountSummary {
    double zero_fraction = 0.0;
    double low_fraction = 0.0;  // counts in 1..10 inclusive
    double mean_nonzero = 0.0;
    std::size_t m = 0;
    std::size_t n = 0;
};

// CSV with a header row; first column holds virus ids, remaining header
// cells the sample column ids. UTF-8, LF line endings when written.
CountMatrix load_count_matrix(const std::filesystem::path& path);
void save_count_matrix(const CountMatrix& cm, const std::filesystem::path& path);

// CSV with columns (column_id, animal_id, experiment_id[, longitude,
// latitude]); rows may appear in any order but must cover every column of
// `cm` exactly once.
CohortMetadata load_metadata(const std::filesystem::path& path, const CountMatrix& cm);
void save_metadata(const CohortMetadata& meta, const std::vector<std::string>& column_ids,
                   const std::filesystem::path& path);

CountSummary summarize_counts(const CountMatrix& cm);

}  // namespace ervmix
