#include "wlda/masked_data.hpp"
#include "wlda/random.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace wlda {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

bool iequals(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) return false;
    return true;
}

bool parse_double(const std::string& cell, double& out) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

} // namespace

std::string format_number(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::string s(buf);
        if (parse_double(s, back) && back == v) return s;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void MaskedDataset::validate() const {
    if (values.rows() != mask.rows() || values.cols() != mask.cols())
        throw data_error("masked dataset: values and mask shapes differ");
    if (static_cast<Eigen::Index>(feature_names.size()) != values.cols())
        throw data_error("masked dataset: feature name count does not match columns");
    std::set<std::string> seen(feature_names.begin(), feature_names.end());
    if (static_cast<Eigen::Index>(seen.size()) != values.cols())
        throw data_error("masked dataset: duplicate feature names");
    if (!labels.empty()) {
        if (static_cast<Eigen::Index>(labels.size()) != values.rows())
            throw data_error("masked dataset: label count does not match rows");
        const int G = n_classes();
        for (int l : labels)
            if (l < 1 || l > G) throw data_error("masked dataset: label id out of range");
    }
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (mask(i, j) != 0 && mask(i, j) != 1)
                throw data_error("masked dataset: mask entries must be 0 or 1");
            if (mask(i, j) == 1 && !std::isfinite(values(i, j)))
                throw data_error("masked dataset: observed entry is not finite");
        }
}

MaskedDataset load_csv(const std::string& path,
                       const std::optional<std::string>& label_column,
                       const std::string& missing_token) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw data_error("empty CSV file: " + path);
    const std::vector<std::string> header = split_line(line);

    Eigen::Index label_idx = -1;
    if (label_column) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == *label_column) label_idx = static_cast<Eigen::Index>(j);
        if (label_idx < 0)
            throw config_error("label column '" + *label_column + "' not found in " + path);
    }

    MaskedDataset data;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (static_cast<Eigen::Index>(j) != label_idx)
            data.feature_names.push_back(header[j]);
    if (label_column) data.label_column = *label_column;

    std::vector<std::vector<double>> rows;
    std::vector<std::vector<int>> row_masks;
    std::vector<std::string> raw_labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw data_error("row " + std::to_string(line_no) + " in " + path + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        std::vector<double> vals;
        std::vector<int> ms;
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (static_cast<Eigen::Index>(j) == label_idx) {
                raw_labels.push_back(cells[j]);
                continue;
            }
            const std::string& cell = cells[j];
            if (cell.empty() || (!missing_token.empty() && iequals(cell, missing_token))) {
                vals.push_back(0.0);
                ms.push_back(0);
                continue;
            }
            double v = 0.0;
            if (!parse_double(cell, v))
                throw data_error("unparseable cell '" + cell + "' at row " +
                                 std::to_string(line_no) + ", column '" + header[j] + "'");
            vals.push_back(v);
            ms.push_back(1);
        }
        rows.push_back(std::move(vals));
        row_masks.push_back(std::move(ms));
    }

    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index p = static_cast<Eigen::Index>(data.feature_names.size());
    data.values.resize(n, p);
    data.mask.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) {
            data.values(i, j) = rows[i][j];
            data.mask(i, j) = row_masks[i][j];
        }

    if (label_column) {
        for (const std::string& lab : raw_labels) {
            auto it = std::find(data.class_names.begin(), data.class_names.end(), lab);
            int id;
            if (it == data.class_names.end()) {
                data.class_names.push_back(lab);
                id = static_cast<int>(data.class_names.size());
            } else {
                id = static_cast<int>(it - data.class_names.begin()) + 1;
            }
            data.labels.push_back(id);
        }
    }
    data.validate();
    return data;
}

void write_csv(const MaskedDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write CSV file: " + path);
    for (std::size_t j = 0; j < data.feature_names.size(); ++j) {
        if (j) out << ',';
        out << data.feature_names[j];
    }
    if (data.has_labels())
        out << ',' << (data.label_column.empty() ? "label" : data.label_column);
    out << '\n';
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (Eigen::Index j = 0; j < data.p(); ++j) {
            if (j) out << ',';
            if (data.mask(i, j) == 1) out << format_number(data.values(i, j));
        }
        if (data.has_labels())
            out << ',' << data.class_names[static_cast<std::size_t>(data.labels[i]) - 1];
        out << '\n';
    }
    if (!out) throw data_error("write failed: " + path);
}

MaskedDataset simulate_mcar(const MaskedDataset& data, const MissingSpec& spec) {
    if (spec.rate < 0.0 || spec.rate >= 1.0)
        throw config_error("missing rate must lie in [0,1)");
    const Eigen::Index row0 = spec.protect_first_row ? 1 : 0;
    const Eigen::Index col0 = spec.protect_first_feature ? 1 : 0;

    std::vector<std::pair<Eigen::Index, Eigen::Index>> pool;
    for (Eigen::Index i = row0; i < data.n(); ++i)
        for (Eigen::Index j = col0; j < data.p(); ++j) {
            if (data.mask(i, j) != 1)
                throw data_error("simulate_mcar: eligible entry (" + std::to_string(i) + "," +
                                 std::to_string(j) + ") is already missing");
            pool.emplace_back(i, j);
        }
    if (pool.empty() && spec.rate > 0.0)
        throw config_error("simulate_mcar: empty eligible pool with positive rate");

    const std::size_t deletions =
        static_cast<std::size_t>(spec.rate * static_cast<double>(pool.size()));
    MaskedDataset out = data;
    rng gen(spec.seed);
    // partial Fisher-Yates: the first `deletions` slots become the sample
    for (std::size_t t = 0; t < deletions; ++t) {
        const std::size_t j = t + static_cast<std::size_t>(gen.next_below(pool.size() - t));
        std::swap(pool[t], pool[j]);
        out.mask(pool[t].first, pool[t].second) = 0;
    }
    return out;
}

namespace {

MaskedDataset take_rows(const MaskedDataset& data, const std::vector<Eigen::Index>& idx) {
    MaskedDataset out;
    out.feature_names = data.feature_names;
    out.class_names = data.class_names;
    out.label_column = data.label_column;
    out.values.resize(static_cast<Eigen::Index>(idx.size()), data.p());
    out.mask.resize(static_cast<Eigen::Index>(idx.size()), data.p());
    for (std::size_t t = 0; t < idx.size(); ++t) {
        out.values.row(static_cast<Eigen::Index>(t)) = data.values.row(idx[t]);
        out.mask.row(static_cast<Eigen::Index>(t)) = data.mask.row(idx[t]);
        if (data.has_labels()) out.labels.push_back(data.labels[static_cast<std::size_t>(idx[t])]);
    }
    return out;
}

} // namespace

std::pair<MaskedDataset, MaskedDataset>
stratified_split(const MaskedDataset& data, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw config_error("test fraction must lie in (0,1)");
    if (!data.has_labels()) throw data_error("stratified split requires labels");

    const int G = data.n_classes();
    std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(G));
    for (Eigen::Index i = 0; i < data.n(); ++i)
        by_class[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)]) - 1]
            .push_back(i);

    rng gen(mix_seed(seed, 0x73706c6974ULL)); // "split"
    std::vector<Eigen::Index> test_idx;
    for (int g = 0; g < G; ++g) {
        auto& rows = by_class[static_cast<std::size_t>(g)];
        const auto n_g = static_cast<long>(rows.size());
        if (n_g < 2)
            throw data_error("stratified split: class '" + data.class_names[static_cast<std::size_t>(g)] +
                             "' has fewer than 2 samples");
        long k = std::lround(test_fraction * static_cast<double>(n_g));
        k = std::max(1L, std::min(n_g - 1, k));
        gen.shuffle(rows);
        test_idx.insert(test_idx.end(), rows.begin(), rows.begin() + k);
    }
    std::sort(test_idx.begin(), test_idx.end());

    std::vector<Eigen::Index> train_idx;
    std::size_t t = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        if (t < test_idx.size() && test_idx[t] == i) ++t;
        else train_idx.push_back(i);
    }
    return {take_rows(data, train_idx), take_rows(data, test_idx)};
}

Vector feature_missing_rates(const std::vector<const Mask*>& masks) {
    if (masks.empty()) throw data_error("feature_missing_rates: no masks supplied");
    const Eigen::Index p = masks.front()->cols();
    Eigen::Index total_rows = 0;
    Vector zeros = Vector::Zero(p);
    for (const Mask* m : masks) {
        if (m->cols() != p) throw data_error("feature_missing_rates: column counts differ");
        total_rows += m->rows();
        for (Eigen::Index i = 0; i < m->rows(); ++i)
            for (Eigen::Index j = 0; j < p; ++j)
                if ((*m)(i, j) == 0) zeros(j) += 1.0;
    }
    if (total_rows == 0) throw data_error("feature_missing_rates: no rows supplied");
    return zeros / static_cast<double>(total_rows);
}

} // namespace wlda
