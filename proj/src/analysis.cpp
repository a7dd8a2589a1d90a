#include "ervmix/analysis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>

namespace ervmix {

PcaResult pca_scores(const MatrixD& points) {
    const std::size_t m = points.rows();
    const std::size_t n = points.cols();
    if (n < 3) throw ValidationError("PCA needs at least 3 columns");

    Eigen::MatrixXd y(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) y(i, j) = points(i, j);
    y.colwise() -= y.rowwise().mean().eval();

    // Work on the n x n Gram matrix; its eigenvalues over (n-1) are the
    // column-covariance eigenvalues and its eigenvectors give the scores.
    const Eigen::MatrixXd gram = y.transpose() * y;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

    PcaResult out;
    out.scores = MatrixD(n, 2);
    for (int comp = 0; comp < 2; ++comp) {
        const Eigen::Index idx = static_cast<Eigen::Index>(n) - 1 - comp;  // descending order
        const double lambda = eig.eigenvalues()(idx);
        if (!(lambda > 1e-10))
            throw ValidationError("column configuration has fewer than two variance directions");
        out.explained_variance[comp] = lambda / static_cast<double>(n - 1);
        const Eigen::VectorXd v = eig.eigenvectors().col(idx);
        const double sigma = std::sqrt(lambda);
        // Direction in R^m; sign fixed so its largest-magnitude entry is
        // positive (first such entry on ties).
        const Eigen::VectorXd direction = y * v / sigma;
        Eigen::Index at = 0;
        direction.cwiseAbs().maxCoeff(&at);
        const double sign = direction(at) >= 0.0 ? 1.0 : -1.0;
        for (std::size_t j = 0; j < n; ++j) out.scores(j, comp) = sign * sigma * v(j);
    }
    return out;
}

MatrixD align_to_geography(const MatrixD& scores, const MatrixD& target, double* residual) {
    const std::size_t n = scores.rows();
    if (scores.cols() != 2 || target.cols() != 2 || target.rows() != n || n < 2)
        throw ValidationError("alignment needs matching n x 2 configurations with n >= 2");

    Eigen::MatrixXd s(n, 2), g(n, 2);
    for (std::size_t j = 0; j < n; ++j)
        for (int c = 0; c < 2; ++c) {
            s(j, c) = scores(j, c);
            g(j, c) = target(j, c);
        }
    const Eigen::RowVector2d s_mean = s.colwise().mean();
    const Eigen::RowVector2d g_mean = g.colwise().mean();
    s.rowwise() -= s_mean;
    g.rowwise() -= g_mean;

    const double s_norm2 = s.squaredNorm();
    if (!(s_norm2 > 0.0)) throw ValidationError("degenerate score configuration");

    // Orthogonal Procrustes with reflection allowed: R = U V^T from the SVD
    // of g^T s, scale from the trace of the singular values.
    const Eigen::Matrix2d cross = g.transpose() * s;
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix2d rot = svd.matrixU() * svd.matrixV().transpose();
    const double scale = svd.singularValues().sum() / s_norm2;

    MatrixD aligned(n, 2);
    double rss = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const Eigen::Vector2d v = scale * rot * s.row(j).transpose() + g_mean.transpose();
        aligned(j, 0) = v(0);
        aligned(j, 1) = v(1);
        const double dx = v(0) - (g(j, 0) + g_mean(0));
        const double dy = v(1) - (g(j, 1) + g_mean(1));
        rss += dx * dx + dy * dy;
    }
    if (residual) *residual = rss;
    return aligned;
}

FitSummaryTables fit_summary_tables(const CountMatrix& cm, const CohortMetadata& meta,
                                    const FitResult& result, std::size_t histogram_bins) {
    cm.validate();
    meta.validate(cm.num_columns());
    const std::size_t m = cm.num_viruses(), n = cm.num_columns();
    const MatrixD& z = result.posterior.z;
    if (z.rows() != m || z.cols() != n)
        throw ValidationError("fit result does not match the count matrix");
    if (histogram_bins < 1) throw ValidationError("histogram needs at least one bin");

    FitSummaryTables out;
    out.per_virus.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        VirusSummaryRow row{cm.virus_ids[i], 0, 0.0, std::log(result.params.alpha[i])};
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (cm.counts(i, j) > 0) {
                ++row.nonzero_cells;
                sum += static_cast<double>(cm.counts(i, j));
            }
        if (row.nonzero_cells > 0) row.mean_nonzero = sum / static_cast<double>(row.nonzero_cells);
        out.per_virus.push_back(std::move(row));
    }

    out.per_column.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        ColumnSummaryRow row{cm.column_ids[j], 0, 0.0, std::log(result.params.r[j])};
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (cm.counts(i, j) > 0) {
                ++row.nonzero_cells;
                sum += static_cast<double>(cm.counts(i, j));
            }
        if (row.nonzero_cells > 0) row.mean_nonzero = sum / static_cast<double>(row.nonzero_cells);
        out.per_column.push_back(std::move(row));
    }

    // Mean posterior per (experiment, nonzero count value).
    std::map<std::pair<int, std::int64_t>, std::pair<double, std::size_t>> acc;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (cm.counts(i, j) > 0) {
                auto& slot = acc[{meta.experiment_of_column[j], cm.counts(i, j)}];
                slot.first += z(i, j);
                ++slot.second;
            }
    for (const auto& [key, slot] : acc)
        out.count_posterior.push_back(
            {key.first, key.second, slot.first / static_cast<double>(slot.second), slot.second});

    auto& hist = out.zhat_histogram;
    hist.bin_counts.assign(histogram_bins, 0);
    std::size_t below = 0, above = 0;
    const double width = (hist.high - hist.low) / static_cast<double>(histogram_bins);
    for (const double v : z.data()) {
        if (v < hist.low) {
            ++below;
        } else if (v > hist.high) {
            ++above;
        } else {
            auto bin = static_cast<std::size_t>((v - hist.low) / width);
            if (bin >= histogram_bins) bin = histogram_bins - 1;
            ++hist.bin_counts[bin];
        }
    }
    const double total = static_cast<double>(z.size());
    hist.fraction_below = static_cast<double>(below) / total;
    hist.fraction_above = static_cast<double>(above) / total;
    return out;
}

}  // namespace ervmix
