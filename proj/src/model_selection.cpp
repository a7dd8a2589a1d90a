#include "ervmix/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ervmix {

long count_parameters(PiModel model, std::size_t m, std::size_t n, std::size_t K) {
    if (m == 0 || n == 0 || K == 0) throw std::invalid_argument("dims must be positive");
    const std::size_t pi_block = model == PiModel::Shared ? 1 : (model == PiModel::PerVirus ? m : n);
    return static_cast<long>(m + n + K + pi_block);
}

BicPair bic(double loglik, long d, std::size_t m, std::size_t n) {
    if (d < 1 || m == 0 || n == 0) throw std::invalid_argument("bic requires d >= 1 and mn >= 1");
    const double mn = static_cast<double>(m) * static_cast<double>(n);
    return {-2.0 * loglik + mn * std::log(static_cast<double>(d)),
            -2.0 * loglik + static_cast<double>(d) * std::log(mn)};
}

SelectionResult select_model(const CountMatrix& cm, const CohortMetadata& meta,
                             const FitConfig& base, bool rank_by_standard) {
    const std::size_t m = cm.num_viruses();
    const std::size_t n = cm.num_columns();
    const std::size_t K = meta.num_experiments();

    SelectionResult out;
    std::vector<FitResult> fits;
    for (const PiModel model : {PiModel::Shared, PiModel::PerVirus, PiModel::PerAnimal}) {
        FitConfig cfg = base;
        cfg.pi_model = model;
        FitResult fr;
        try {
            fr = fit(cm, meta, cfg);
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("fit failed for pi model '") + to_string(model) +
                                     "': " + e.what());
        }
        ModelScore score;
        score.pi_model = model;
        score.replicate_mode = base.replicate_mode;
        score.d = count_parameters(model, m, n, K);
        score.loglik = fr.final_loglik();
        const BicPair b = bic(score.loglik, score.d, m, n);
        score.bic_paper = b.paper;
        score.bic_standard = b.standard;
        out.scores.push_back(score);
        fits.push_back(std::move(fr));
    }

    std::vector<std::size_t> order{0, 1, 2};
    const auto key = [&](std::size_t idx) {
        const auto& s = out.scores[idx];
        return std::make_pair(rank_by_standard ? s.bic_standard : s.bic_paper, s.d);
    };
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

    out.best_model = out.scores[order[0]].pi_model;
    out.best_fit = std::move(fits[order[0]]);
    std::vector<ModelScore> ranked;
    for (const std::size_t idx : order) ranked.push_back(out.scores[idx]);
    out.scores = std::move(ranked);
    return out;
}

}  // namespace ervmix
