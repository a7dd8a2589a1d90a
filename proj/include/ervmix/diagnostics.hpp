#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ervmix/count_data.hpp"
#include "ervmix/mixture.hpp"

namespace ervmix {

// Row-by-column Poisson model for the large counts: X(i,j) ~ Poisson(a_i b_j)
// over cells with x > cutoff. Rows and columns with no qualifying cell are
// dropped and listed nowhere in `rows`/`cols`.
struct PoissonRowColFit {
    std::vector<int> rows, cols;  // kept indices, ascending
    std::vector<double> a, b;     // aligned with rows/cols; sum(b) = #cols kept
    std::int64_t cutoff = 9;
    int iterations = 0;
    double loglik = 0;
};

// Row-by-column negative binomial counterpart: X(i,j) ~ NB(r_j, alpha_i).
struct NBRowColFit {
    std::vector<int> rows, cols;
    std::vector<double> alpha;  // per kept row
    std::vector<double> r;      // per kept column
    std::int64_t cutoff = 9;
    int sweeps = 0;
    double loglik = 0;
};

PoissonRowColFit fit_poisson_rowcol(const CountMatrix& cm, std::int64_t cutoff = 9);
NBRowColFit fit_nb_rowcol(const CountMatrix& cm, std::int64_t cutoff = 9);

enum class ResidualModel { PoissonRowCol, NBRowCol };

struct ResidualReport {
    ResidualModel model;
    std::vector<double> residuals;                    // per qualifying cell, row-major order
    std::vector<std::pair<double, double>> qq_pairs;  // (standard-normal quantile, sorted residual)
};

ResidualReport pearson_residuals(const CountMatrix& cm, const PoissonRowColFit& fit);
ResidualReport pearson_residuals(const CountMatrix& cm, const NBRowColFit& fit);

// Hard calls: by count threshold (x >= t) or posterior cutoff (z > c).
MatrixB threshold_classify(const CountMatrix& cm, std::int64_t t);
MatrixB posterior_classify(const PosteriorMatrix& zhat, double cutoff);

struct CurvePoint {
    double sweep_value;          // the threshold t or the cutoff c
    double positive_proportion;  // positive calls among sensitive-case cells
    double consistency;          // sensitive cases whose replicates agree
};

struct ConsistencyCurve {
    std::vector<CurvePoint> points;
    std::size_t sensitive_cases = 0;
};

struct ReplicateCase {
    int virus;
    int group;
};

// (virus, replicated animal) cases split by their behaviour over the count
// threshold sweep.
struct CasePartition {
    std::size_t always_consistent = 0;
    std::size_t always_inconsistent = 0;
    std::vector<ReplicateCase> sensitive;
    std::size_t total() const { return always_consistent + always_inconsistent + sensitive.size(); }
};

struct ConsistencySweep {
    std::int64_t threshold_min = 1;
    std::int64_t threshold_max = 10;
    int cutoff_grid = 1001;  // evenly spaced cutoffs over [0, 1]
};

struct ReplicateValidation {
    ConsistencyCurve threshold_curve;
    ConsistencyCurve cutoff_curve;
    CasePartition partition;
};

// Compares hard calls across replicate columns: partitions the cases over
// the threshold sweep, then traces (positive proportion, consistency) over
// the sensitive cases for both call families. `zhat` should come from a fit
// that ignored the replication.
ReplicateValidation replicate_consistency(const CountMatrix& cm, const CohortMetadata& meta,
                                          const PosteriorMatrix& zhat,
                                          const ConsistencySweep& sweep = {});

// Piecewise-linear interpolation of curve consistency at a given positive
// proportion, clamped to the curve's range. Used to compare the two call
// families at matched positive rates.
double interpolate_consistency(const ConsistencyCurve& curve, double positive_proportion);

}  // namespace ervmix
