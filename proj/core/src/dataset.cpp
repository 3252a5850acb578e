#include "credo/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <system_error>

#include "credo/errors.hpp"
#include "credo/stats.hpp"

namespace credo {

void validate_dataset(const Dataset& ds) {
    if (ds.features.rows() < 1) throw Error("dataset: needs at least one row");
    if (ds.features.cols() < 1) throw Error("dataset: needs at least one feature column");
    if (ds.targets.size() != ds.features.rows()) {
        throw Error("dataset: targets length does not match feature row count");
    }
    if (!ds.feature_names.empty() &&
        ds.feature_names.size() != static_cast<std::size_t>(ds.features.cols())) {
        throw Error("dataset: feature_names size does not match column count");
    }
    if (!ds.features.allFinite() || !ds.targets.allFinite()) {
        throw Error("dataset: non-finite entry");
    }
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& features) const {
    if (features.cols() != means.size()) {
        throw Error("standardizer: dimension mismatch");
    }
    return (features.rowwise() - means.transpose()).array().rowwise() /
           scales.transpose().array();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& features) const {
    if (features.cols() != means.size()) {
        throw Error("standardizer: dimension mismatch");
    }
    return (features.array().rowwise() * scales.transpose().array()).rowwise() +
           means.transpose().array();
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trimmed(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
    const std::string s = trimmed(raw);
    if (s.empty()) {
        throw Error("load_csv: non-numeric value at row " + std::to_string(row) +
                    ", column " + std::to_string(col));
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) {
        throw Error("load_csv: non-numeric value at row " + std::to_string(row) +
                    ", column " + std::to_string(col));
    }
    if (!std::isfinite(v)) {
        throw Error("load_csv: non-finite value at row " + std::to_string(row) +
                    ", column " + std::to_string(col));
    }
    return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column) {
    std::ifstream in(path);
    if (!in) throw Error("load_csv: cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw Error("load_csv: empty file: " + path);

    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = trimmed(h);
    if (header.empty()) throw Error("load_csv: header row has no columns");

    // Resolve target: header name first, then 0-based numeric index.
    std::ptrdiff_t target_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == target_column) {
            target_idx = static_cast<std::ptrdiff_t>(i);
            break;
        }
    }
    if (target_idx < 0) {
        int parsed = -1;
        const auto [ptr, ec] = std::from_chars(
            target_column.data(), target_column.data() + target_column.size(), parsed);
        if (ec == std::errc() && ptr == target_column.data() + target_column.size() &&
            parsed >= 0 && parsed < static_cast<int>(header.size())) {
            target_idx = parsed;
        }
    }
    if (target_idx < 0) {
        throw Error("load_csv: missing target column '" + target_column + "'");
    }
    if (header.size() < 2) {
        throw Error("load_csv: no feature columns besides the target");
    }

    std::vector<std::vector<double>> rows;
    std::size_t row_number = 0;  // 1-based data row counter for diagnostics
    while (std::getline(in, line)) {
        if (trimmed(line).empty()) continue;
        ++row_number;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw Error("load_csv: row " + std::to_string(row_number) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
        }
        std::vector<double> parsed(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            parsed[c] = parse_cell(cells[c], row_number, c + 1);
        }
        rows.push_back(std::move(parsed));
    }
    if (rows.empty()) throw Error("load_csv: empty dataset");

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(header.size() - 1);
    Dataset ds;
    ds.features.resize(n, d);
    ds.targets.resize(n);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (static_cast<std::ptrdiff_t>(c) != target_idx) {
            ds.feature_names.push_back(header[c]);
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index f = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (static_cast<std::ptrdiff_t>(c) == target_idx) {
                ds.targets(i) = rows[static_cast<std::size_t>(i)][c];
            } else {
                ds.features(i, f++) = rows[static_cast<std::size_t>(i)][c];
            }
        }
    }
    validate_dataset(ds);
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path, const std::string& target_name) {
    validate_dataset(ds);
    std::ofstream out(path);
    if (!out) throw Error("save_csv: cannot open file for writing: " + path);

    for (Eigen::Index c = 0; c < ds.dim(); ++c) {
        if (ds.feature_names.empty()) {
            out << "x" << c;
        } else {
            out << ds.feature_names[static_cast<std::size_t>(c)];
        }
        out << ',';
    }
    out << target_name << '\n';

    char buf[32];
    auto write_double = [&](double v) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        out.write(buf, res.ptr - buf);
    };
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        for (Eigen::Index c = 0; c < ds.dim(); ++c) {
            write_double(ds.features(i, c));
            out << ',';
        }
        write_double(ds.targets(i));
        out << '\n';
    }
}

namespace {

Dataset take_rows(const Dataset& ds, const std::vector<int>& idx) {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), ds.dim());
    out.targets.resize(static_cast<Eigen::Index>(idx.size()));
    out.feature_names = ds.feature_names;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(idx[i]);
        out.targets(static_cast<Eigen::Index>(i)) = ds.targets(idx[i]);
    }
    return out;
}

}  // namespace

DataSplit split(const Dataset& ds, const SplitRatios& ratios, std::uint64_t seed) {
    validate_dataset(ds);
    if (!(ratios.train > 0.0 && ratios.calibration > 0.0 && ratios.test > 0.0)) {
        throw Error("split: ratios must be positive");
    }
    if (std::abs(ratios.train + ratios.calibration + ratios.test - 1.0) > 1e-9) {
        throw Error("split: ratios must sum to 1");
    }
    const auto n = static_cast<std::size_t>(ds.rows());
    if (n < 3) throw Error("split: insufficient rows to split");

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);

    auto n_cal = static_cast<std::size_t>(std::lround(ratios.calibration * static_cast<double>(n)));
    auto n_test = static_cast<std::size_t>(std::lround(ratios.test * static_cast<double>(n)));
    n_cal = std::max<std::size_t>(1, std::min(n_cal, n - 2));
    n_test = std::max<std::size_t>(1, std::min(n_test, n - n_cal - 1));
    const std::size_t n_train = n - n_cal - n_test;

    DataSplit out;
    out.seed = seed;
    out.train = take_rows(ds, {idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train)});
    out.calibration = take_rows(ds, {idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                                     idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_cal)});
    out.test = take_rows(ds, {idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_cal), idx.end()});
    return out;
}

namespace {

// Scenario 1 mean: structural transition at x = 0.
double scenario1_mean(double x) {
    return x < 0.0 ? std::sin(3.0 * x) : std::sin(3.0 * x) + 1.5;
}

// Scenario 2 mean (the noise regimes carry the structure; the mean is a
// smooth ripple).
double scenario2_mean(double x) { return std::sin(2.0 * x) + 0.5 * x; }

double scenario2_sigma(double x) {
    if (x <= -0.3) return 0.1;
    if (x < 0.0) return 0.2 + 0.15 * std::abs(std::sin(10.0 * x));
    if (x <= 0.4) return 0.7 + 0.3 * std::abs(std::sin(12.0 * x));
    return 0.2 + 0.15 * std::abs(std::sin(10.0 * x));
}

double scenario3_mean(double x) { return 0.8 * x + 1.2 * std::sin(1.5 * x); }

}  // namespace

double scenario3_shock_probability(double x) {
    double p = 0.05 + 0.35 / (1.0 + std::exp(-(x - 1.3)));
    if (std::abs(x) > 3.2) p += 0.15;
    return p;
}

Dataset generate_scenario(int id, int n, std::uint64_t seed) {
    if (id < 1 || id > 3) throw Error("generate_scenario: unknown scenario id " + std::to_string(id));
    if (n < 50) throw Error("generate_scenario: n must be at least 50");

    Rng rng(seed);
    Dataset ds;
    ds.features.resize(n, 1);
    ds.targets.resize(n);
    ds.feature_names = {"x"};

    for (int i = 0; i < n; ++i) {
        double x = 0.0, y = 0.0;
        const double u = rng.uniform();
        switch (id) {
            case 1: {
                // Dense lobes [-2,-0.2] and [0.2,2], 1% in the gap.
                if (u < 0.495) {
                    x = -2.0 + 1.8 * rng.uniform();
                } else if (u < 0.99) {
                    x = 0.2 + 1.8 * rng.uniform();
                } else {
                    x = -0.2 + 0.4 * rng.uniform();
                }
                y = scenario1_mean(x) + 0.1 * rng.normal();
                break;
            }
            case 2: {
                // Dense [-2,0) and (0.4,2], 2% in the scarce band [0,0.4].
                if (u < 0.49) {
                    x = -2.0 + 2.0 * rng.uniform();
                } else if (u < 0.98) {
                    x = 0.4 + 1.6 * rng.uniform();
                } else {
                    x = 0.4 * rng.uniform();
                }
                y = scenario2_mean(x) + scenario2_sigma(x) * rng.normal();
                break;
            }
            case 3: {
                // Two dense clusters, a sparse middle band, and tail points.
                if (u < 0.44) {
                    x = -1.8 + 0.35 * rng.normal();
                } else if (u < 0.84) {
                    x = 1.6 + 0.45 * rng.normal();
                } else if (u < 0.90) {
                    x = -0.4 + 0.8 * rng.uniform();
                } else if (u < 0.95) {
                    x = -4.2 + rng.uniform();
                } else {
                    x = 3.2 + rng.uniform();
                }
                const bool shock = rng.uniform() < scenario3_shock_probability(x);
                const double noise =
                    shock ? 1.2 + 0.8 * rng.normal() : 0.2 * rng.normal();
                y = scenario3_mean(x) + noise;
                break;
            }
            default:
                break;
        }
        ds.features(i, 0) = x;
        ds.targets(i) = y;
    }
    return ds;
}

Standardizer fit_standardizer(const Dataset& ds) {
    validate_dataset(ds);
    if (ds.rows() < 2) throw Error("fit_standardizer: needs at least two rows");

    const auto n = ds.rows();
    const auto d = ds.dim();
    Standardizer st;
    st.means.resize(d);
    st.scales.resize(d);
    for (Eigen::Index c = 0; c < d; ++c) {
        const double m = ds.features.col(c).mean();
        const double ss = (ds.features.col(c).array() - m).square().sum();
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        st.means(c) = m;
        st.scales(c) = sd > 0.0 ? sd : 1.0;
    }
    return st;
}

}  // namespace credo
