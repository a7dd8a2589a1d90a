#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ervmix/count_data.hpp"
#include "ervmix/mixture.hpp"

namespace ervmix {

struct PcaResult {
    MatrixD scores;  // one row per input column: (pc1, pc2)
    std::array<double, 2> explained_variance{0.0, 0.0};
    std::optional<MatrixD> aligned_scores;
    double alignment_residual = 0.0;
};

// Principal component scores treating each column of `points` as an
// observation in R^rows. Columns are centered by the mean column, the
// covariance uses the 1/(n-1) convention, and each direction is signed so
// that its largest-magnitude loading is positive.
PcaResult pca_scores(const MatrixD& points);

// Similarity Procrustes (rotation, reflection, isotropic scale, translation)
// of `scores` onto `target`, both n x 2; minimizes the summed squared
// distances, which are returned through *residual.
MatrixD align_to_geography(const MatrixD& scores, const MatrixD& target,
                           double* residual = nullptr);

struct VirusSummaryRow {
    std::string virus_id;
    std::size_t nonzero_cells;
    double mean_nonzero;  // 0 when the row has no nonzero count
    double log_alpha;
};

struct ColumnSummaryRow {
    std::string column_id;
    std::size_t nonzero_cells;
    double mean_nonzero;
    double log_r;
};

struct CountPosteriorRow {
    int experiment;      // 0-based
    std::int64_t count;  // a nonzero count value observed in that experiment
    double mean_z;
    std::size_t cells;
};

struct ZhatHistogram {
    std::vector<std::size_t> bin_counts;  // equal bins over (low, high)
    double low = 0.01;
    double high = 0.99;
    double fraction_below = 0.0;  // z < low
    double fraction_above = 0.0;  // z > high
};

struct FitSummaryTables {
    std::vector<VirusSummaryRow> per_virus;
    std::vector<ColumnSummaryRow> per_column;
    std::vector<CountPosteriorRow> count_posterior;
    ZhatHistogram zhat_histogram;
};

// Plot-ready summaries of a fit: nonzero-count means against the log
// parameter estimates, posterior means stratified by experiment and count,
// and the interior histogram of the posterior probabilities.
FitSummaryTables fit_summary_tables(const CountMatrix& cm, const CohortMetadata& meta,
                                    const FitResult& result, std::size_t histogram_bins = 49);

}  // namespace ervmix
