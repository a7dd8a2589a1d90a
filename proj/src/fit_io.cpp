#include "ervmix/fit_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ervmix {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string file_digest_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for digest: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char chunk[4096];
    while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
        for (std::streamsize k = 0; k < in.gcount(); ++k) {
            h ^= static_cast<unsigned char>(chunk[k]);
            h *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_id_value_csv(const std::filesystem::path& path, const std::string& id_header,
                        const std::string& value_header, const std::vector<std::string>& ids,
                        const std::vector<double>& values) {
    if (ids.size() != values.size()) throw std::invalid_argument("id/value length mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file " + path.string());
    out << id_header << ',' << value_header << '\n';
    for (std::size_t k = 0; k < ids.size(); ++k)
        out << ids[k] << ',' << format_double(values[k]) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::pair<std::string, double>> load_id_value_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    std::vector<std::pair<std::string, double>> out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError(path.string() + ": malformed row");
        out.emplace_back(line.substr(0, comma), std::stod(line.substr(comma + 1)));
    }
    return out;
}

void write_real_matrix(const std::filesystem::path& path, const std::string& corner,
                       const std::vector<std::string>& row_ids,
                       const std::vector<std::string>& col_ids, const MatrixD& values) {
    if (values.rows() != row_ids.size() || values.cols() != col_ids.size())
        throw std::invalid_argument("matrix shape does not match identifier lists");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file " + path.string());
    out << corner;
    for (const auto& id : col_ids) out << ',' << id;
    out << '\n';
    for (std::size_t i = 0; i < values.rows(); ++i) {
        out << row_ids[i];
        for (std::size_t j = 0; j < values.cols(); ++j) out << ',' << format_double(values(i, j));
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

RealMatrix load_real_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    RealMatrix rm;
    {
        std::istringstream ss(line);
        std::string field;
        bool first = true;
        while (std::getline(ss, field, ',')) {
            if (!first) rm.col_ids.push_back(field);
            first = false;
        }
    }
    const std::size_t n = rm.col_ids.size();
    if (n == 0) throw ParseError(path.string() + ": header names no columns");
    std::vector<double> cells;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        std::size_t k = 0;
        while (std::getline(ss, field, ',')) {
            if (k == 0)
                rm.row_ids.push_back(field);
            else
                cells.push_back(std::stod(field));
            ++k;
        }
        if (k != n + 1) throw ParseError(path.string() + ": ragged row");
    }
    rm.values = MatrixD(rm.row_ids.size(), n);
    rm.values.data() = std::move(cells);
    return rm;
}

namespace {

nlohmann::json config_json(const FitConfig& cfg) {
    return {{"pi_model", to_string(cfg.pi_model)},
            {"replicates", to_string(cfg.replicate_mode)},
            {"init_c", cfg.init_divisor_c},
            {"init_r0", cfg.init_r0},
            {"tolerance", cfg.z_change_tolerance},
            {"max_iterations", cfg.max_iterations},
            {"alpha_smoothing", {cfg.alpha_smoothing_num, cfg.alpha_smoothing_den}},
            {"threads", cfg.threads}};
}

}  // namespace

std::vector<std::string> write_fit_outputs(const std::filesystem::path& dir, const CountMatrix& cm,
                                           const CohortMetadata& meta, const FitConfig& cfg,
                                           const FitResult& result,
                                           const std::map<std::string, std::string>& input_digests) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;

    write_id_value_csv(dir / "alpha.csv", "virus_id", "alpha", cm.virus_ids, result.params.alpha);
    written.push_back("alpha.csv");
    write_id_value_csv(dir / "r.csv", "column_id", "r", cm.column_ids, result.params.r);
    written.push_back("r.csv");
    write_id_value_csv(dir / "p.csv", "experiment_id", "p", meta.experiment_labels, result.params.p);
    written.push_back("p.csv");
    switch (result.params.pi_model) {
        case PiModel::Shared:
            write_id_value_csv(dir / "pi.csv", "scope", "pi", {"shared"}, result.params.pi);
            break;
        case PiModel::PerVirus:
            write_id_value_csv(dir / "pi.csv", "virus_id", "pi", cm.virus_ids, result.params.pi);
            break;
        case PiModel::PerAnimal:
            write_id_value_csv(dir / "pi.csv", "column_id", "pi", cm.column_ids, result.params.pi);
            break;
    }
    written.push_back("pi.csv");
    write_real_matrix(dir / "zhat.csv", "virus_id", cm.virus_ids, cm.column_ids,
                      result.posterior.z);
    written.push_back("zhat.csv");

    nlohmann::json report;
    report["loglik"] = result.final_loglik();
    report["loglik_trace"] = result.loglik_trace;
    report["iterations"] = result.iterations;
    report["converged"] = result.converged;
    report["constraint_ok"] = result.constraint_ok;
    report["ascent_guard_activations"] = result.ascent_guard_activations;
    report["alpha_clamps"] = result.alpha_clamp_count;
    report["p_clamps"] = result.p_clamp_count;
    report["r_boundary_hits"] = result.r_boundary_count;
    report["posterior_defaults"] = result.posterior_default_count;
    report["config"] = config_json(cfg);
    report["input_digests"] = input_digests;
    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report.json");
    out << report.dump(2) << '\n';
    written.push_back("report.json");
    return written;
}

}  // namespace ervmix
