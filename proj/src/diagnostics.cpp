#include "ervmix/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ervmix/distributions.hpp"
#include "num_util.hpp"

namespace ervmix {

namespace {

struct QualifyingSet {
    std::vector<int> rows, cols;      // kept indices
    std::vector<int> row_pos, col_pos;  // full index -> kept position, -1 if dropped
    std::size_t cells = 0;
};

QualifyingSet build_qualifying(const CountMatrix& cm, std::int64_t cutoff) {
    const std::size_t m = cm.num_viruses(), n = cm.num_columns();
    QualifyingSet q;
    q.row_pos.assign(m, -1);
    q.col_pos.assign(n, -1);
    std::vector<char> row_has(m, 0), col_has(n, 0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (cm.counts(i, j) > cutoff) {
                row_has[i] = col_has[j] = 1;
                ++q.cells;
            }
    if (q.cells == 0)
        throw ValidationError("no cells above the diagnostic cutoff " + std::to_string(cutoff));
    for (std::size_t i = 0; i < m; ++i)
        if (row_has[i]) {
            q.row_pos[i] = static_cast<int>(q.rows.size());
            q.rows.push_back(static_cast<int>(i));
        }
    for (std::size_t j = 0; j < n; ++j)
        if (col_has[j]) {
            q.col_pos[j] = static_cast<int>(q.cols.size());
            q.cols.push_back(static_cast<int>(j));
        }
    return q;
}

}  // namespace

PoissonRowColFit fit_poisson_rowcol(const CountMatrix& cm, std::int64_t cutoff) {
    cm.validate();
    const QualifyingSet q = build_qualifying(cm, cutoff);
    const std::size_t mr = q.rows.size(), nc = q.cols.size();

    PoissonRowColFit fit;
    fit.rows = q.rows;
    fit.cols = q.cols;
    fit.cutoff = cutoff;
    fit.a.assign(mr, 1.0);
    fit.b.assign(nc, 1.0);

    const auto cell = [&](std::size_t ri, std::size_t cj) {
        return cm.counts(q.rows[ri], q.cols[cj]);
    };
    const auto qualifies = [&](std::size_t ri, std::size_t cj) { return cell(ri, cj) > cutoff; };

    for (int iter = 1; iter <= 10000; ++iter) {
        fit.iterations = iter;
        double change = 0.0;
        for (std::size_t ri = 0; ri < mr; ++ri) {
            double sx = 0.0, sb = 0.0;
            for (std::size_t cj = 0; cj < nc; ++cj)
                if (qualifies(ri, cj)) {
                    sx += static_cast<double>(cell(ri, cj));
                    sb += fit.b[cj];
                }
            const double next = sx / sb;
            change = std::max(change, std::abs(next - fit.a[ri]) / std::max(1.0, std::abs(next)));
            fit.a[ri] = next;
        }
        for (std::size_t cj = 0; cj < nc; ++cj) {
            double sx = 0.0, sa = 0.0;
            for (std::size_t ri = 0; ri < mr; ++ri)
                if (qualifies(ri, cj)) {
                    sx += static_cast<double>(cell(ri, cj));
                    sa += fit.a[ri];
                }
            const double next = sx / sa;
            change = std::max(change, std::abs(next - fit.b[cj]) / std::max(1.0, std::abs(next)));
            fit.b[cj] = next;
        }
        // Fix the multiplicative gauge: sum(b) equals the number of kept columns.
        double bsum = 0.0;
        for (const double v : fit.b) bsum += v;
        const double scale = static_cast<double>(nc) / bsum;
        for (auto& v : fit.b) v *= scale;
        for (auto& v : fit.a) v /= scale;
        if (change < 1e-10) break;
    }

    fit.loglik = 0.0;
    for (std::size_t ri = 0; ri < mr; ++ri)
        for (std::size_t cj = 0; cj < nc; ++cj)
            if (qualifies(ri, cj))
                fit.loglik += poisson_log_pmf(cell(ri, cj), fit.a[ri] * fit.b[cj]);
    return fit;
}

NBRowColFit fit_nb_rowcol(const CountMatrix& cm, std::int64_t cutoff) {
    cm.validate();
    const QualifyingSet q = build_qualifying(cm, cutoff);
    const std::size_t mr = q.rows.size(), nc = q.cols.size();

    NBRowColFit fit;
    fit.rows = q.rows;
    fit.cols = q.cols;
    fit.cutoff = cutoff;
    fit.alpha.assign(mr, 0.5);
    fit.r.assign(nc, 1.0);

    const auto cell = [&](std::size_t ri, std::size_t cj) {
        return cm.counts(q.rows[ri], q.cols[cj]);
    };
    const auto qualifies = [&](std::size_t ri, std::size_t cj) { return cell(ri, cj) > cutoff; };

    for (std::size_t cj = 0; cj < nc; ++cj) {
        double sx = 0.0;
        std::size_t cnt = 0;
        for (std::size_t ri = 0; ri < mr; ++ri)
            if (qualifies(ri, cj)) {
                sx += static_cast<double>(cell(ri, cj));
                ++cnt;
            }
        fit.r[cj] = sx / static_cast<double>(cnt);
    }

    const auto total_loglik = [&]() {
        double ll = 0.0;
        for (std::size_t ri = 0; ri < mr; ++ri)
            for (std::size_t cj = 0; cj < nc; ++cj)
                if (qualifies(ri, cj))
                    ll += nb_log_pmf(cell(ri, cj), {fit.r[cj], fit.alpha[ri]});
        return ll;
    };

    double loglik = total_loglik();
    for (int sweep = 1; sweep <= 1000; ++sweep) {
        fit.sweeps = sweep;
        // Column pass: bracketed maximization over r in log space.
        for (std::size_t cj = 0; cj < nc; ++cj) {
            double lasum = 0.0;
            std::vector<double> xs;
            for (std::size_t ri = 0; ri < mr; ++ri)
                if (qualifies(ri, cj)) {
                    lasum += std::log(fit.alpha[ri]);
                    xs.push_back(static_cast<double>(cell(ri, cj)));
                }
            const auto obj = [&](double t) {
                const double r = std::exp(t);
                double v = r * lasum - static_cast<double>(xs.size()) * std::lgamma(r);
                for (const double x : xs) v += std::lgamma(x + r);
                return v;
            };
            const auto deriv = [&](double t) {
                const double r = std::exp(t);
                double v = lasum - static_cast<double>(xs.size()) * num::digamma(r);
                for (const double x : xs) v += num::digamma(x + r);
                return v;
            };
            const auto g = num::golden_max(obj, std::log(1e-6), std::log(1e7), 1e-8);
            const auto [tstar, fstar] = num::polish_concave_max(g, obj, deriv);
            if (fstar > obj(std::log(fit.r[cj]))) fit.r[cj] = std::exp(tstar);
        }
        // Row pass: the alpha objective reduces to R log(a) + X log(1-a).
        // Running it last leaves the saturated configurations exactly matched.
        for (std::size_t ri = 0; ri < mr; ++ri) {
            double rsum = 0.0, xsum = 0.0;
            for (std::size_t cj = 0; cj < nc; ++cj)
                if (qualifies(ri, cj)) {
                    rsum += fit.r[cj];
                    xsum += static_cast<double>(cell(ri, cj));
                }
            const auto obj = [&](double a) { return rsum * std::log(a) + xsum * std::log1p(-a); };
            const auto deriv = [&](double a) { return rsum / a - xsum / (1.0 - a); };
            const auto g = num::golden_max(obj, 1e-9, 1.0 - 1e-9, 1e-10);
            const auto [astar, fstar] = num::polish_concave_max(g, obj, deriv, 1e-16);
            if (fstar > obj(fit.alpha[ri])) fit.alpha[ri] = astar;
        }
        const double next = total_loglik();
        const bool done = std::abs(next - loglik) < 1e-8 * std::max(1.0, std::abs(next));
        loglik = next;
        if (done) break;
    }
    fit.loglik = loglik;
    return fit;
}

namespace {

ResidualReport residuals_impl(const CountMatrix& cm, ResidualModel model, std::int64_t cutoff,
                              const std::vector<int>& row_pos, const std::vector<int>& col_pos,
                              const auto& mean_var) {
    ResidualReport rep;
    rep.model = model;
    for (std::size_t i = 0; i < cm.num_viruses(); ++i)
        for (std::size_t j = 0; j < cm.num_columns(); ++j) {
            if (cm.counts(i, j) <= cutoff) continue;
            if (row_pos[i] < 0 || col_pos[j] < 0)
                throw ValidationError("residuals requested for a matrix the fit did not cover");
            const auto [mu, var] = mean_var(row_pos[i], col_pos[j]);
            rep.residuals.push_back((static_cast<double>(cm.counts(i, j)) - mu) / std::sqrt(var));
        }
    std::vector<double> sorted = rep.residuals;
    std::sort(sorted.begin(), sorted.end());
    const double N = static_cast<double>(sorted.size());
    rep.qq_pairs.reserve(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k)
        rep.qq_pairs.emplace_back(normal_quantile((static_cast<double>(k) + 0.5) / N), sorted[k]);
    return rep;
}

std::vector<int> positions(std::size_t full, const std::vector<int>& kept) {
    std::vector<int> pos(full, -1);
    for (std::size_t idx = 0; idx < kept.size(); ++idx) pos[kept[idx]] = static_cast<int>(idx);
    return pos;
}

}  // namespace

ResidualReport pearson_residuals(const CountMatrix& cm, const PoissonRowColFit& fit) {
    const auto row_pos = positions(cm.num_viruses(), fit.rows);
    const auto col_pos = positions(cm.num_columns(), fit.cols);
    return residuals_impl(cm, ResidualModel::PoissonRowCol, fit.cutoff, row_pos, col_pos,
                          [&](int ri, int cj) {
                              const double mu = fit.a[ri] * fit.b[cj];
                              return std::make_pair(mu, mu);
                          });
}

ResidualReport pearson_residuals(const CountMatrix& cm, const NBRowColFit& fit) {
    const auto row_pos = positions(cm.num_viruses(), fit.rows);
    const auto col_pos = positions(cm.num_columns(), fit.cols);
    return residuals_impl(cm, ResidualModel::NBRowCol, fit.cutoff, row_pos, col_pos,
                          [&](int ri, int cj) {
                              const double a = fit.alpha[ri];
                              const double mu = fit.r[cj] * (1.0 - a) / a;
                              return std::make_pair(mu, mu / a);
                          });
}

MatrixB threshold_classify(const CountMatrix& cm, std::int64_t t) {
    if (t < 1) throw ValidationError("count threshold must be at least 1");
    MatrixB y(cm.num_viruses(), cm.num_columns());
    for (std::size_t i = 0; i < cm.num_viruses(); ++i)
        for (std::size_t j = 0; j < cm.num_columns(); ++j) y(i, j) = cm.counts(i, j) >= t ? 1 : 0;
    return y;
}

MatrixB posterior_classify(const PosteriorMatrix& zhat, double cutoff) {
    if (!(cutoff >= 0.0 && cutoff <= 1.0))
        throw ValidationError("posterior cutoff must lie in [0,1]");
    MatrixB y(zhat.z.rows(), zhat.z.cols());
    for (std::size_t i = 0; i < zhat.z.rows(); ++i)
        for (std::size_t j = 0; j < zhat.z.cols(); ++j) y(i, j) = zhat.z(i, j) > cutoff ? 1 : 0;
    return y;
}

ReplicateValidation replicate_consistency(const CountMatrix& cm, const CohortMetadata& meta,
                                          const PosteriorMatrix& zhat,
                                          const ConsistencySweep& sweep) {
    cm.validate();
    meta.validate(cm.num_columns());
    if (zhat.z.rows() != cm.num_viruses() || zhat.z.cols() != cm.num_columns())
        throw ValidationError("posterior matrix shape does not match the counts");
    if (sweep.threshold_min < 1 || sweep.threshold_max < sweep.threshold_min ||
        sweep.cutoff_grid < 2)
        throw ValidationError("invalid consistency sweep settings");

    std::vector<int> replicated_groups;
    for (std::size_t g = 0; g < meta.num_groups(); ++g)
        if (meta.replicate_groups[g].size() >= 2) replicated_groups.push_back(static_cast<int>(g));
    if (replicated_groups.empty())
        throw ValidationError("replicate validation needs at least one replicated animal");

    ReplicateValidation out;
    const std::size_t m = cm.num_viruses();

    // Partition the (virus, replicated animal) cases over the threshold sweep.
    for (std::size_t i = 0; i < m; ++i)
        for (const int g : replicated_groups) {
            const auto& members = meta.replicate_groups[g];
            bool all_consistent = true, all_inconsistent = true;
            for (std::int64_t t = sweep.threshold_min; t <= sweep.threshold_max; ++t) {
                const bool first = cm.counts(i, members[0]) >= t;
                bool agree = true;
                for (std::size_t idx = 1; idx < members.size(); ++idx)
                    agree &= (cm.counts(i, members[idx]) >= t) == first;
                all_consistent &= agree;
                all_inconsistent &= !agree;
            }
            if (all_consistent)
                ++out.partition.always_consistent;
            else if (all_inconsistent)
                ++out.partition.always_inconsistent;
            else
                out.partition.sensitive.push_back({static_cast<int>(i), g});
        }

    const auto& sens = out.partition.sensitive;
    out.threshold_curve.sensitive_cases = sens.size();
    out.cutoff_curve.sensitive_cases = sens.size();
    if (sens.empty()) return out;

    std::size_t member_cells = 0;
    for (const auto& c : sens) member_cells += meta.replicate_groups[c.group].size();

    const auto sweep_point = [&](double value, const auto& call) {
        std::size_t positives = 0, agreeing = 0;
        for (const auto& c : sens) {
            const auto& members = meta.replicate_groups[c.group];
            const bool first = call(c.virus, members[0]);
            bool agree = true;
            for (std::size_t idx = 0; idx < members.size(); ++idx) {
                const bool y = call(c.virus, members[idx]);
                positives += y;
                if (y != first) agree = false;
            }
            agreeing += agree;
        }
        return CurvePoint{value, static_cast<double>(positives) / static_cast<double>(member_cells),
                          static_cast<double>(agreeing) / static_cast<double>(sens.size())};
    };

    for (std::int64_t t = sweep.threshold_min; t <= sweep.threshold_max; ++t)
        out.threshold_curve.points.push_back(sweep_point(
            static_cast<double>(t), [&](int i, int j) { return cm.counts(i, j) >= t; }));
    for (int qi = 0; qi < sweep.cutoff_grid; ++qi) {
        const double c = static_cast<double>(qi) / static_cast<double>(sweep.cutoff_grid - 1);
        out.cutoff_curve.points.push_back(
            sweep_point(c, [&](int i, int j) { return zhat.z(i, j) > c; }));
    }
    return out;
}

double interpolate_consistency(const ConsistencyCurve& curve, double positive_proportion) {
    if (curve.points.empty()) throw ValidationError("empty consistency curve");
    // Collapse to one consistency value per distinct positive proportion.
    std::map<double, std::pair<double, int>> agg;
    for (const auto& pt : curve.points) {
        auto& slot = agg[pt.positive_proportion];
        slot.first += pt.consistency;
        ++slot.second;
    }
    std::vector<std::pair<double, double>> pts;
    pts.reserve(agg.size());
    for (const auto& [pos, acc] : agg) pts.emplace_back(pos, acc.first / acc.second);

    const double x = positive_proportion;
    if (x <= pts.front().first) return pts.front().second;
    if (x >= pts.back().first) return pts.back().second;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        if (x <= pts[k + 1].first) {
            const double w = (x - pts[k].first) / (pts[k + 1].first - pts[k].first);
            return pts[k].second + w * (pts[k + 1].second - pts[k].second);
        }
    }
    return pts.back().second;
}

}  // namespace ervmix
