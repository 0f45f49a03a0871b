#include "tart/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace tart {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

double parse_real(const std::string& cell, int line_no, int col) {
    const std::string t = trim(cell);
    if (t.empty()) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": empty cell in column " +
                                 std::to_string(col + 1));
    }
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": cannot parse feature value '" + t + "'");
    }
    return v;
}

} // namespace

Dataset parse_csv(std::istream& in, int label_column, bool has_header,
                  const std::string& name) {
    struct Row {
        int line_no;
        std::vector<std::string> fields;
    };
    std::vector<Row> rows;
    std::string line;
    int line_no = 0;
    int width = -1;
    bool header_pending = has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;  // skip blank lines
        std::vector<std::string> fields = split_fields(line);
        if (header_pending) {
            header_pending = false;
            width = static_cast<int>(fields.size());
            continue;  // consume the header row
        }
        if (width < 0) {
            width = static_cast<int>(fields.size());
        } else if (static_cast<int>(fields.size()) != width) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(width) + " fields, got " +
                                     std::to_string(fields.size()));
        }
        rows.push_back({line_no, std::move(fields)});
    }
    if (rows.empty()) {
        throw std::runtime_error(name + ": no data rows");
    }
    if (width < 2) {
        throw std::runtime_error(name + ": need at least one feature and a label column");
    }
    int label_col = label_column < 0 ? width - 1 : label_column;
    if (label_col >= width) {
        throw std::runtime_error(name + ": label column " + std::to_string(label_col) +
                                 " out of range (row width " + std::to_string(width) + ")");
    }

    Dataset d;
    d.features = Matrix(static_cast<int>(rows.size()), width - 1);
    d.labels.reserve(rows.size());
    std::unordered_map<std::string, int> label_ids;
    for (size_t r = 0; r < rows.size(); ++r) {
        const Row& row = rows[r];
        int c_out = 0;
        for (int c = 0; c < width; ++c) {
            if (c == label_col) continue;
            d.features(static_cast<int>(r), c_out) = parse_real(row.fields[c], row.line_no, c);
            ++c_out;
        }
        const std::string& lab = row.fields[label_col];
        auto it = label_ids.find(lab);
        if (it == label_ids.end()) {
            it = label_ids.emplace(lab, static_cast<int>(d.label_names.size())).first;
            d.label_names.push_back(lab);
        }
        d.labels.push_back(it->second);
    }
    d.class_count = static_cast<int>(d.label_names.size());
    return d;
}

Dataset load_csv(const std::string& path, int label_column, bool has_header) {
    std::ifstream f(path);
    if (!f) {
        throw std::runtime_error("cannot open: " + path);
    }
    return parse_csv(f, label_column, has_header, path);
}

StandardizeStats standardize_fit(const Dataset& train) {
    if (train.size() < 1) {
        throw std::invalid_argument("standardize_fit: empty dataset");
    }
    const int n = train.size();
    const int dim = train.feature_count();
    StandardizeStats stats;
    stats.means.assign(static_cast<size_t>(dim), 0.0);
    stats.stds.assign(static_cast<size_t>(dim), 0.0);
    for (int c = 0; c < dim; ++c) {
        double mean = 0.0;
        for (int r = 0; r < n; ++r) mean += train.features(r, c);
        mean /= n;
        double var = 0.0;
        for (int r = 0; r < n; ++r) {
            const double dlt = train.features(r, c) - mean;
            var += dlt * dlt;
        }
        var /= n;  // population variance
        stats.means[c] = mean;
        stats.stds[c] = std::sqrt(var);
    }
    return stats;
}

void standardize_apply(const StandardizeStats& stats, Dataset& d) {
    if (static_cast<int>(stats.means.size()) != d.feature_count()) {
        throw std::invalid_argument("standardize_apply: feature count mismatch");
    }
    for (int r = 0; r < d.size(); ++r) {
        for (int c = 0; c < d.feature_count(); ++c) {
            const double s = stats.stds[c];
            d.features(r, c) = s > 0.0 ? (d.features(r, c) - stats.means[c]) / s : 0.0;
        }
    }
    d.feature_means = stats.means;
    d.feature_stds = stats.stds;
}

std::pair<Dataset, Dataset> split(const Dataset& d, double test_fraction,
                                  uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("split: test_fraction must be in (0, 1)");
    }
    std::vector<std::vector<int>> by_class(static_cast<size_t>(d.class_count));
    for (int r = 0; r < d.size(); ++r) {
        by_class[static_cast<size_t>(d.labels[r])].push_back(r);
    }
    Rng rng(seed);
    std::vector<char> in_test(static_cast<size_t>(d.size()), 0);
    for (auto& idx : by_class) {
        if (idx.size() < 2) continue;  // single-example classes stay in train
        std::shuffle(idx.begin(), idx.end(), rng);
        const long n_test = std::lround(test_fraction * static_cast<double>(idx.size()));
        const long capped = std::min<long>(std::max<long>(n_test, 0),
                                           static_cast<long>(idx.size()) - 1);
        for (long k = 0; k < capped; ++k) in_test[static_cast<size_t>(idx[k])] = 1;
    }

    auto take = [&](bool test_side) {
        Dataset out;
        out.class_count = d.class_count;
        out.label_names = d.label_names;
        out.feature_means = d.feature_means;
        out.feature_stds = d.feature_stds;
        std::vector<int> rows;
        for (int r = 0; r < d.size(); ++r) {
            if ((in_test[static_cast<size_t>(r)] != 0) == test_side) rows.push_back(r);
        }
        out.features = Matrix(static_cast<int>(rows.size()), d.feature_count());
        out.labels.reserve(rows.size());
        for (size_t k = 0; k < rows.size(); ++k) {
            for (int c = 0; c < d.feature_count(); ++c) {
                out.features(static_cast<int>(k), c) = d.features(rows[k], c);
            }
            out.labels.push_back(d.labels[static_cast<size_t>(rows[k])]);
        }
        return out;
    };
    return {take(false), take(true)};
}

std::vector<double> one_hot(int label, int class_count) {
    if (label < 0 || label >= class_count) {
        throw std::invalid_argument("one_hot: label out of range");
    }
    std::vector<double> v(static_cast<size_t>(class_count), 0.0);
    v[static_cast<size_t>(label)] = 1.0;
    return v;
}

} // namespace tart
