#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ervmix/count_data.hpp"
#include "ervmix/mixture.hpp"

namespace ervmix {

// Serializes a fit: alpha.csv, r.csv, p.csv, pi.csv, zhat.csv (same shape
// and ids as the input) and report.json with the trace, counters, config
// echo and input digests. Returns the file names written, in order.
std::vector<std::string> write_fit_outputs(const std::filesystem::path& dir, const CountMatrix& cm,
                                           const CohortMetadata& meta, const FitConfig& cfg,
                                           const FitResult& result,
                                           const std::map<std::string, std::string>& input_digests);

struct RealMatrix {
    std::vector<std::string> row_ids, col_ids;
    MatrixD values;
};

// Same CSV layout as the count matrix but with real-valued cells.
RealMatrix load_real_matrix(const std::filesystem::path& path);
void write_real_matrix(const std::filesystem::path& path, const std::string& corner,
                       const std::vector<std::string>& row_ids,
                       const std::vector<std::string>& col_ids, const MatrixD& values);

// Two-column (id, value) CSV used for the parameter vectors.
std::vector<std::pair<std::string, double>> load_id_value_csv(const std::filesystem::path& path);
void write_id_value_csv(const std::filesystem::path& path, const std::string& id_header,
                        const std::string& value_header, const std::vector<std::string>& ids,
                        const std::vector<double>& values);

// FNV-1a 64-bit digest of a file's bytes, as fixed-width hex.
std::string file_digest_hex(const std::filesystem::path& path);

// Shortest-exact decimal rendering used in every emitted CSV.
std::string format_double(double v);

}  // namespace ervmix
