#include "caadam/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string_view>

#include "caadam/error.hpp"

namespace caadam {

std::string_view to_string(Task task) {
    return task == Task::regression ? "regression" : "classification";
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.features = gather_rows(features, rows);
    out.targets = gather_rows(targets, rows);
    out.task = task;
    out.feature_names = feature_names;
    out.target_name = target_name;
    out.num_classes = num_classes;
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

bool parse_double(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void finalize_classes(Dataset& ds) {
    double max_label = -1.0;
    for (std::size_t r = 0; r < ds.targets.rows(); ++r) {
        const double y = ds.targets(r, 0);
        if (y < 0.0 || y != std::floor(y)) {
            throw DataError("row " + std::to_string(r + 1) + ": class label must be a non-negative integer");
        }
        max_label = std::max(max_label, y);
    }
    ds.num_classes = static_cast<std::size_t>(max_label) + 1;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": missing header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header_views = split_commas(line);
    const std::vector<std::string> header(header_views.begin(), header_views.end());

    std::size_t target_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == schema.target_column) target_col = c;
    }
    if (target_col == header.size()) {
        throw DataError(path.string() + ": target column '" + schema.target_column + "' not in header");
    }
    if (header.size() < 2) throw DataError(path.string() + ": need at least one feature column");

    Dataset ds;
    ds.task = schema.task;
    ds.target_name = schema.target_column;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != target_col) ds.feature_names.emplace_back(header[c]);
    }

    const std::size_t m = header.size() - 1;
    std::vector<double> features;
    std::vector<double> targets;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split_commas(line);
        if (cells.size() != header.size()) {
            throw DataError(path.string() + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v;
            if (!parse_double(cells[c], v)) {
                throw DataError(path.string() + ": row " + std::to_string(row) + ", column '" +
                                header[c] + "': cannot parse '" + std::string(cells[c]) +
                                "' as a number");
            }
            (c == target_col ? targets : features).push_back(v);
        }
    }
    if (row == 0) throw DataError(path.string() + ": no data rows");
    ds.features = Matrix(row, m, std::move(features));
    ds.targets = Matrix(row, 1, std::move(targets));
    if (ds.task == Task::classification) finalize_classes(ds);
    return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (std::size_t c = 0; c < ds.num_features(); ++c) {
        out << (c < ds.feature_names.size() ? ds.feature_names[c] : "x" + std::to_string(c)) << ',';
    }
    out << ds.target_name << '\n';
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (double v : ds.features.row(r)) out << format_double(v) << ',';
        out << format_double(ds.targets(r, 0)) << '\n';
    }
}

Matrix Standardization::apply(const Matrix& features) const {
    if (features.cols() != mean.size()) throw ShapeError("standardization width mismatch");
    Matrix out = features;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / std[c];
    }
    return out;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitFractions& f) {
    for (double x : f) {
        if (!(x > 0.0)) throw DataError("split fractions must be positive");
    }
    if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) throw DataError("split fractions must sum to 1");
    const double dn = static_cast<double>(n);
    // The small slack keeps exact products such as 10 * 0.8 from flooring to 7.
    const auto train = static_cast<std::size_t>(std::floor(dn * f[0] + 1e-9));
    const auto val = static_cast<std::size_t>(std::floor(dn * f[1] + 1e-9));
    if (train + val > n) throw DataError("split fractions exceed dataset size");
    const std::array<std::size_t, 3> sizes = {train, val, n - train - val};
    for (std::size_t s : sizes) {
        if (s == 0) {
            throw DataError("dataset of " + std::to_string(n) + " rows leaves an empty partition");
        }
    }
    return sizes;
}

SplitDataset split_standardize(const Dataset& ds, const SplitFractions& fractions, std::uint64_t seed) {
    const auto sizes = split_sizes(ds.size(), fractions);
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    const std::span<const std::size_t> all(order);
    SplitDataset split;
    split.train = ds.subset(all.subspan(0, sizes[0]));
    split.validation = ds.subset(all.subspan(sizes[0], sizes[1]));
    split.test = ds.subset(all.subspan(sizes[0] + sizes[1]));

    const std::size_t m = ds.num_features();
    const Matrix& x = split.train.features;
    auto& stats = split.standardization;
    stats.mean.assign(m, 0.0);
    stats.std.assign(m, 0.0);
    for (std::size_t c = 0; c < m; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) sum += x(r, c);
        const double mean = sum / static_cast<double>(x.rows());
        double ss = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) ss += (x(r, c) - mean) * (x(r, c) - mean);
        stats.mean[c] = mean;
        stats.std[c] = std::max(std::sqrt(ss / static_cast<double>(x.rows())), kStdFloor);
    }
    split.train.features = stats.apply(split.train.features);
    split.validation.features = stats.apply(split.validation.features);
    split.test.features = stats.apply(split.test.features);
    return split;
}

double synth_regression_target(std::span<const double> x) {
    const std::size_t m = x.size();
    double y = std::sin(std::numbers::pi * x[0] * x[1 % m]);
    const double centered = x[2 % m] - 0.5;
    y += 2.0 * centered * centered;
    for (std::size_t j = 3; j < m; ++j) y += x[j] / static_cast<double>(j - 1);
    return y;
}

Dataset synth_regression(std::size_t n, std::size_t m, double noise_std, std::uint64_t seed) {
    if (n == 0 || m == 0) throw DataError("synth_regression needs n, m >= 1");
    if (!(noise_std >= 0.0)) throw DataError("noise_std must be >= 0");
    Rng feature_rng = Rng(seed).split(0);
    Rng noise_rng = Rng(seed).split(1);
    Dataset ds;
    ds.task = Task::regression;
    ds.features = Matrix(n, m);
    ds.targets = Matrix(n, 1);
    for (std::size_t c = 0; c < m; ++c) ds.feature_names.push_back("x" + std::to_string(c));
    for (std::size_t r = 0; r < n; ++r) {
        auto row = ds.features.row(r);
        for (double& v : row) v = feature_rng.uniform();
        const double noise = noise_std > 0.0 ? noise_std * noise_rng.normal() : 0.0;
        ds.targets(r, 0) = synth_regression_target(row) + noise;
    }
    return ds;
}

Dataset synth_classification(std::size_t n, std::size_t m, std::size_t classes, double spread, std::uint64_t seed) {
    if (n == 0 || m == 0) throw DataError("synth_classification needs n, m >= 1");
    if (classes < 2) throw DataError("synth_classification needs at least two classes");
    if (!(spread >= 0.0)) throw DataError("spread must be >= 0");
    Rng center_rng = Rng(seed).split(0);
    Rng sample_rng = Rng(seed).split(1);
    Matrix centers(classes, m);
    for (double& v : centers.values()) v = center_rng.uniform(-3.0, 3.0);

    Dataset ds;
    ds.task = Task::classification;
    ds.num_classes = classes;
    ds.features = Matrix(n, m);
    ds.targets = Matrix(n, 1);
    for (std::size_t c = 0; c < m; ++c) ds.feature_names.push_back("x" + std::to_string(c));
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t k = r % classes;
        for (std::size_t c = 0; c < m; ++c) ds.features(r, c) = centers(k, c) + spread * sample_rng.normal();
        ds.targets(r, 0) = static_cast<double>(k);
    }
    return ds;
}

}  // namespace caadam
