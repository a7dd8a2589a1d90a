#include "ervmix/simulator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ervmix {

namespace {

// Stream tags separating the independent draw families.
constexpr std::uint64_t kStreamParams = 0x706172616d730000ull;
constexpr std::uint64_t kStreamTruth = 0x7472757468000000ull;
constexpr std::uint64_t kStreamCounts = 0x636f756e74730000ull;

std::mt19937_64 cell_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t i,
                         std::uint64_t j) {
    std::uint64_t h = mix64(seed ^ stream);
    h = mix64(h ^ (i + 0x9E3779B97F4A7C15ull));
    h = mix64(h ^ (j + 0xD1B54A32D192ED03ull));
    return std::mt19937_64(h);
}

double uniform_in(std::mt19937_64& rng, const std::array<double, 2>& range) {
    return std::uniform_real_distribution<double>(range[0], range[1])(rng);
}

double log_uniform_in(std::mt19937_64& rng, const std::array<double, 2>& range) {
    const double lo = std::log(range[0]), hi = std::log(range[1]);
    return std::exp(std::uniform_real_distribution<double>(lo, hi)(rng));
}

void check_range(const std::array<double, 2>& range, double lo, double hi, const char* what) {
    if (!(range[0] >= lo && range[1] <= hi && range[0] <= range[1]))
        throw ValidationError(std::string("invalid sampling range for ") + what);
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::int64_t nb_draw(std::mt19937_64& rng, double r, double theta) {
    if (!(r > 0.0) || !(theta > 0.0 && theta < 1.0))
        throw std::domain_error("nb_draw requires r > 0 and theta in (0,1)");
    const double lambda = std::gamma_distribution<double>(r, (1.0 - theta) / theta)(rng);
    if (!(lambda > 0.0)) return 0;
    return std::poisson_distribution<std::int64_t>(lambda)(rng);
}

void SimSpec::validate() const {
    if (num_viruses == 0 || num_columns == 0) throw ValidationError("simulation dims must be positive");
    if (num_experiments < 1) throw ValidationError("need at least one experiment");
    if (replicated_animals < 0 || static_cast<std::size_t>(replicated_animals) >= num_columns ||
        static_cast<std::size_t>(replicated_animals) > num_unique())
        throw ValidationError("replicated_animals out of range");
    if (num_unique() < static_cast<std::size_t>(num_experiments))
        throw ValidationError("need at least one unique animal per experiment");
    check_range(alpha_range, 1e-12, 1.0 - 1e-12, "alpha");
    check_range(p_range, 1e-12, 1.0 - 1e-12, "p");
    check_range(pi_range, 0.0, 1.0, "pi");
    if (!(r_range[0] > 0.0 && r_range[0] <= r_range[1]))
        throw ValidationError("invalid sampling range for r");
    const std::size_t u = num_unique();
    if (alpha && alpha->size() != num_viruses) throw ValidationError("alpha vector length mismatch");
    if (r && r->size() != num_columns) throw ValidationError("r vector length mismatch");
    if (p && p->size() != static_cast<std::size_t>(num_experiments))
        throw ValidationError("p vector length mismatch");
    if (pi) {
        const std::size_t expect =
            pi_model == PiModel::Shared ? 1 : (pi_model == PiModel::PerVirus ? num_viruses : u);
        if (pi->size() != expect) throw ValidationError("pi vector length mismatch");
    }
}

SimData simulate(const SimSpec& spec) {
    spec.validate();
    const std::size_t m = spec.num_viruses;
    const std::size_t n = spec.num_columns;
    const std::size_t u = spec.num_unique();
    const int K = spec.num_experiments;

    SimData out;

    // Column layout: unique animals first, then the repeat runs of animals
    // 0..replicated_animals-1 shifted into the next experiment.
    std::vector<std::string> animal_ids(n), experiment_ids(n);
    std::vector<int> animal_of_column(n), experiment_of_column(n);
    for (std::size_t j = 0; j < u; ++j) {
        animal_of_column[j] = static_cast<int>(j);
        experiment_of_column[j] = static_cast<int>(j % K);
    }
    for (int t = 0; t < spec.replicated_animals; ++t) {
        const std::size_t j = u + t;
        animal_of_column[j] = t;
        experiment_of_column[j] = (t + 1) % K;
    }
    for (std::size_t j = 0; j < n; ++j) {
        animal_ids[j] = "A" + std::to_string(animal_of_column[j] + 1);
        experiment_ids[j] = "E" + std::to_string(experiment_of_column[j] + 1);
    }

    // True parameters.
    std::mt19937_64 param_rng(mix64(spec.seed ^ kStreamParams));
    MixtureParams& truth = out.true_params;
    truth.pi_model = spec.pi_model;
    if (spec.alpha) {
        truth.alpha = *spec.alpha;
    } else {
        truth.alpha.resize(m);
        for (auto& a : truth.alpha) a = log_uniform_in(param_rng, spec.alpha_range);
    }
    if (spec.r) {
        truth.r = *spec.r;
    } else {
        truth.r.resize(n);
        for (auto& r : truth.r) r = uniform_in(param_rng, spec.r_range);
    }
    if (spec.p) {
        truth.p = *spec.p;
    } else {
        truth.p.resize(K);
        for (auto& p : truth.p) p = uniform_in(param_rng, spec.p_range);
    }
    std::vector<double> pi_unique;  // per unique animal under PerAnimal
    switch (spec.pi_model) {
        case PiModel::Shared:
            truth.pi = spec.pi ? *spec.pi : std::vector<double>{uniform_in(param_rng, spec.pi_range)};
            break;
        case PiModel::PerVirus:
            if (spec.pi) {
                truth.pi = *spec.pi;
            } else {
                truth.pi.resize(m);
                for (auto& v : truth.pi) v = uniform_in(param_rng, spec.pi_range);
            }
            break;
        case PiModel::PerAnimal:
            if (spec.pi) {
                pi_unique = *spec.pi;
            } else {
                pi_unique.resize(u);
                for (auto& v : pi_unique) v = uniform_in(param_rng, spec.pi_range);
            }
            truth.pi.resize(n);
            for (std::size_t j = 0; j < n; ++j) truth.pi[j] = pi_unique[animal_of_column[j]];
            break;
    }

    // Carrier states per (virus, unique animal).
    out.truth = MatrixB(m, u);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t g = 0; g < u; ++g) {
            double pi;
            switch (spec.pi_model) {
                case PiModel::Shared: pi = truth.pi[0]; break;
                case PiModel::PerVirus: pi = truth.pi[i]; break;
                default: pi = pi_unique[g]; break;
            }
            auto rng = cell_rng(spec.seed, kStreamTruth, i, g);
            out.truth(i, g) = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < pi ? 1 : 0;
        }

    // Counts: replicate columns share the carrier state, draws independent.
    out.counts.virus_ids.resize(m);
    for (std::size_t i = 0; i < m; ++i) out.counts.virus_ids[i] = "V" + std::to_string(i + 1);
    out.counts.column_ids.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        out.counts.column_ids[j] = animal_ids[j] + "." + experiment_ids[j];
    out.counts.counts = MatrixI(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const bool carrier = out.truth(i, animal_of_column[j]) != 0;
            const double theta =
                carrier ? truth.alpha[i] : truth.p[experiment_of_column[j]];
            auto rng = cell_rng(spec.seed, kStreamCounts, i, j);
            out.counts.counts(i, j) = nb_draw(rng, truth.r[j], theta);
        }

    out.meta = CohortMetadata::build(std::move(animal_ids), experiment_ids);
    out.counts.validate();
    return out;
}

}  // namespace ervmix
