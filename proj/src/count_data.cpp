#include "ervmix/count_data.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace ervmix {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

std::int64_t parse_count(const std::string& cell, std::size_t row, std::size_t col,
                         const std::filesystem::path& path) {
    const auto fail = [&](const char* what) {
        throw ParseError(path.string() + ": " + what + " at data row " + std::to_string(row + 1) +
                         ", column " + std::to_string(col + 1) + ": '" + cell + "'");
    };
    if (cell.empty()) fail("empty cell");
    std::size_t pos = 0;
    long long value = 0;
    try {
        value = std::stoll(cell, &pos);
    } catch (const std::exception&) {
        fail("non-integer cell");
    }
    if (pos != cell.size()) fail("non-integer cell");
    if (value < 0) fail("negative count");
    return value;
}

double parse_real(const std::string& cell, std::size_t row, const char* what,
                  const std::filesystem::path& path) {
    std::size_t pos = 0;
    double value = 0;
    try {
        value = std::stod(cell, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != cell.size())
        throw ParseError(path.string() + ": malformed " + what + " at data row " +
                         std::to_string(row + 1) + ": '" + cell + "'");
    return value;
}

void check_unique(const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second)
            throw ValidationError(std::string("duplicate ") + what + " '" + id + "'");
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file " + path.string());
    return in;
}

}  // namespace

void CountMatrix::validate() const {
    if (virus_ids.empty() || column_ids.empty())
        throw ValidationError("count matrix must have at least one row and one column");
    if (counts.rows() != virus_ids.size() || counts.cols() != column_ids.size())
        throw ValidationError("count matrix shape does not match identifier lists");
    check_unique(virus_ids, "virus id");
    check_unique(column_ids, "column id");
    for (const auto v : counts.data())
        if (v < 0) throw ValidationError("count matrix contains a negative entry");
}

bool CohortMetadata::has_full_geo() const {
    return !geo.empty() &&
           std::all_of(geo.begin(), geo.end(), [](const auto& g) { return g.has_value(); });
}

void CohortMetadata::validate(std::size_t n_columns) const {
    if (animal_ids.size() != n_columns || experiment_of_column.size() != n_columns ||
        group_of_column.size() != n_columns || geo.size() != n_columns)
        throw ValidationError("metadata column count mismatch");
    if (experiment_labels.empty()) throw ValidationError("metadata must define an experiment");
    std::vector<char> covered(n_columns, 0);
    for (std::size_t g = 0; g < replicate_groups.size(); ++g) {
        const auto& members = replicate_groups[g];
        if (members.empty()) throw ValidationError("empty replicate group");
        if (!std::is_sorted(members.begin(), members.end()))
            throw ValidationError("replicate group members not sorted");
        for (int j : members) {
            if (j < 0 || static_cast<std::size_t>(j) >= n_columns || covered[j])
                throw ValidationError("replicate groups are not a partition of the columns");
            covered[j] = 1;
            if (group_of_column[j] != static_cast<int>(g))
                throw ValidationError("group_of_column inconsistent with replicate_groups");
        }
        if (unique_columns.at(g) != members.front())
            throw ValidationError("group representative is not the lowest member column");
    }
    if (std::find(covered.begin(), covered.end(), 0) != covered.end())
        throw ValidationError("some column belongs to no replicate group");
    const int K = num_experiments();
    std::vector<char> used(K, 0);
    for (int k : experiment_of_column) {
        if (k < 0 || k >= K) throw ValidationError("experiment index out of range");
        used[k] = 1;
    }
    if (std::find(used.begin(), used.end(), 0) != used.end())
        throw ValidationError("experiment with no columns");
}

CohortMetadata CohortMetadata::build(std::vector<std::string> animal_ids,
                                     const std::vector<std::string>& experiment_ids,
                                     std::vector<std::optional<GeoPoint>> geo) {
    const std::size_t n = animal_ids.size();
    if (experiment_ids.size() != n)
        throw ValidationError("animal and experiment label lists differ in length");
    if (geo.empty()) geo.assign(n, std::nullopt);
    if (geo.size() != n) throw ValidationError("geo list length mismatch");

    CohortMetadata meta;
    meta.animal_ids = std::move(animal_ids);
    meta.geo = std::move(geo);

    std::unordered_map<std::string, int> experiment_index;
    meta.experiment_of_column.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& label = experiment_ids[j];
        if (label.empty()) throw ValidationError("column " + std::to_string(j) + " missing experiment label");
        auto [it, inserted] = experiment_index.emplace(label, static_cast<int>(meta.experiment_labels.size()));
        if (inserted) meta.experiment_labels.push_back(label);
        meta.experiment_of_column[j] = it->second;
    }

    // Groups ordered by first appearance of their animal id; representatives
    // (lowest member index) are therefore ascending.
    std::unordered_map<std::string, int> group_index;
    meta.group_of_column.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& animal = meta.animal_ids[j];
        if (animal.empty()) throw ValidationError("column " + std::to_string(j) + " missing animal id");
        auto [it, inserted] = group_index.emplace(animal, static_cast<int>(meta.replicate_groups.size()));
        if (inserted) meta.replicate_groups.emplace_back();
        meta.group_of_column[j] = it->second;
        meta.replicate_groups[it->second].push_back(static_cast<int>(j));
    }
    meta.unique_columns.reserve(meta.replicate_groups.size());
    for (const auto& members : meta.replicate_groups) meta.unique_columns.push_back(members.front());
    meta.validate(n);
    return meta;
}

CohortMetadata CohortMetadata::trivial(std::size_t n_columns) {
    std::vector<std::string> animals(n_columns), experiments(n_columns, "E1");
    for (std::size_t j = 0; j < n_columns; ++j) animals[j] = "col" + std::to_string(j);
    return build(std::move(animals), experiments);
}

CountMatrix load_count_matrix(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    auto header = split_csv_line(strip_cr(line));
    if (header.size() < 2)
        throw ParseError(path.string() + ": header must name at least one sample column");

    CountMatrix cm;
    cm.column_ids.assign(header.begin() + 1, header.end());
    const std::size_t n = cm.column_ids.size();

    std::vector<std::int64_t> cells;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != n + 1)
            throw ParseError(path.string() + ": data row " + std::to_string(row + 1) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(n + 1));
        cm.virus_ids.push_back(fields[0]);
        for (std::size_t j = 0; j < n; ++j) cells.push_back(parse_count(fields[j + 1], row, j, path));
        ++row;
    }
    if (row == 0) throw ParseError(path.string() + ": no data rows");
    cm.counts = Matrix<std::int64_t>(row, n);
    cm.counts.data() = std::move(cells);
    cm.validate();
    return cm;
}

void save_count_matrix(const CountMatrix& cm, const std::filesystem::path& path) {
    cm.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file " + path.string());
    out << "virus_id";
    for (const auto& id : cm.column_ids) out << ',' << id;
    out << '\n';
    for (std::size_t i = 0; i < cm.num_viruses(); ++i) {
        out << cm.virus_ids[i];
        for (std::size_t j = 0; j < cm.num_columns(); ++j) out << ',' << cm.counts(i, j);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

CohortMetadata load_metadata(const std::filesystem::path& path, const CountMatrix& cm) {
    auto in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    auto header = split_csv_line(strip_cr(line));
    const auto col_of = [&](const std::string& name) -> int {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };
    const int c_col = col_of("column_id"), c_animal = col_of("animal_id"),
              c_exp = col_of("experiment_id"), c_lon = col_of("longitude"),
              c_lat = col_of("latitude");
    if (c_col < 0 || c_animal < 0 || c_exp < 0)
        throw ParseError(path.string() + ": header must contain column_id, animal_id, experiment_id");
    if ((c_lon < 0) != (c_lat < 0))
        throw ParseError(path.string() + ": longitude and latitude must appear together");

    std::unordered_map<std::string, std::size_t> column_index;
    for (std::size_t j = 0; j < cm.num_columns(); ++j) column_index[cm.column_ids[j]] = j;

    const std::size_t n = cm.num_columns();
    std::vector<std::string> animals(n), experiments(n);
    std::vector<std::optional<GeoPoint>> geo(n);
    std::vector<char> seen(n, 0);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError(path.string() + ": data row " + std::to_string(row + 1) +
                             " has wrong field count");
        const auto& cid = fields[c_col];
        auto it = column_index.find(cid);
        if (it == column_index.end())
            throw ValidationError(path.string() + ": metadata names unknown column '" + cid + "'");
        const std::size_t j = it->second;
        if (seen[j])
            throw ValidationError(path.string() + ": duplicate metadata row for column '" + cid + "'");
        seen[j] = 1;
        animals[j] = fields[c_animal];
        experiments[j] = fields[c_exp];
        if (c_lon >= 0) {
            const auto& lon = fields[c_lon];
            const auto& lat = fields[c_lat];
            if (lon.empty() != lat.empty())
                throw ParseError(path.string() + ": row for column '" + cid +
                                 "' has only one of longitude/latitude");
            if (!lon.empty())
                geo[j] = GeoPoint{parse_real(lon, row, "longitude", path),
                                  parse_real(lat, row, "latitude", path)};
        }
        ++row;
    }
    for (std::size_t j = 0; j < n; ++j)
        if (!seen[j])
            throw ValidationError(path.string() + ": column '" + cm.column_ids[j] +
                                  "' missing from metadata");
    return CohortMetadata::build(std::move(animals), experiments, std::move(geo));
}

void save_metadata(const CohortMetadata& meta, const std::vector<std::string>& column_ids,
                   const std::filesystem::path& path) {
    meta.validate(column_ids.size());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file " + path.string());
    const bool with_geo = std::any_of(meta.geo.begin(), meta.geo.end(),
                                      [](const auto& g) { return g.has_value(); });
    out << "column_id,animal_id,experiment_id";
    if (with_geo) out << ",longitude,latitude";
    out << '\n';
    char buf[64];
    for (std::size_t j = 0; j < column_ids.size(); ++j) {
        out << column_ids[j] << ',' << meta.animal_ids[j] << ','
            << meta.experiment_labels[meta.experiment_of_column[j]];
        if (with_geo) {
            if (meta.geo[j]) {
                std::snprintf(buf, sizeof buf, ",%.17g,%.17g", meta.geo[j]->longitude,
                              meta.geo[j]->latitude);
                out << buf;
            } else {
                out << ",,";
            }
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

CountSummary summarize_counts(const CountMatrix& cm) {
    cm.validate();
    CountSummary s;
    s.m = cm.num_viruses();
    s.n = cm.num_columns();
    std::size_t zeros = 0, low = 0, nonzero = 0;
    double nonzero_sum = 0.0;
    for (const auto v : cm.counts.data()) {
        if (v == 0) {
            ++zeros;
        } else {
            ++nonzero;
            nonzero_sum += static_cast<double>(v);
            if (v <= 10) ++low;
        }
    }
    const double total = static_cast<double>(s.m * s.n);
    s.zero_fraction = static_cast<double>(zeros) / total;
    s.low_fraction = static_cast<double>(low) / total;
    s.mean_nonzero = nonzero == 0 ? 0.0 : nonzero_sum / static_cast<double>(nonzero);
    return s;
}

}  // namespace ervmix
