#include "clu/dataset.hpp"

#include <cmath>
#include <limits>
#include <fstream>
#include <numbers>
#include <sstream>

#include "clu/errors.hpp"

namespace clu {

Batch Dataset::as_batch() const {
    return Batch{features, labels, ids};
}

Batch Dataset::subset(const std::vector<int>& rows) const {
    Batch b;
    b.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    b.labels.resize(static_cast<Eigen::Index>(rows.size()));
    b.ids.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        b.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
        b.labels[static_cast<Eigen::Index>(i)] = labels[rows[i]];
        b.ids.push_back(ids[static_cast<std::size_t>(rows[i])]);
    }
    return b;
}

std::vector<int> Dataset::rows_of_class(int cls) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (labels[i] == cls) out.push_back(i);
    return out;
}

Dataset make_blobs(const BlobsConfig& cfg, Rng& rng) {
    if (cfg.classes < 2 || cfg.dim < 1 || cfg.per_class < 1)
        throw ValidationError("make_blobs: invalid configuration");
    const int n = cfg.classes * cfg.per_class;
    Dataset ds;
    ds.num_classes = cfg.classes;
    ds.features.resize(n, cfg.dim);
    ds.labels.resize(n);
    ds.ids.resize(static_cast<std::size_t>(n));

    // Class centers on the radius sphere. Difficulty is controlled by
    // spread/radius, so the centers themselves are kept well separated:
    // evenly spaced angles in 2-D, a random orthonormal frame when the
    // dimension allows, and best-of-several random draws otherwise.
    Eigen::MatrixXd centers(cfg.classes, cfg.dim);
    if (cfg.dim == 2) {
        const double offset = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (int c = 0; c < cfg.classes; ++c) {
            const double angle = offset + 2.0 * std::numbers::pi * c / cfg.classes;
            centers(c, 0) = cfg.radius * std::cos(angle);
            centers(c, 1) = cfg.radius * std::sin(angle);
        }
    } else if (cfg.classes <= cfg.dim) {
        Eigen::MatrixXd gauss(cfg.dim, cfg.classes);
        for (int i = 0; i < cfg.dim; ++i)
            for (int c = 0; c < cfg.classes; ++c) gauss(i, c) = rng.normal();
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
        const Eigen::MatrixXd q = Eigen::MatrixXd(qr.householderQ()).leftCols(cfg.classes);
        centers = cfg.radius * q.transpose();
    } else {
        double best_min_dist = -1.0;
        Eigen::MatrixXd best(cfg.classes, cfg.dim);
        for (int attempt = 0; attempt < 32; ++attempt) {
            Eigen::MatrixXd cand(cfg.classes, cfg.dim);
            for (int c = 0; c < cfg.classes; ++c) {
                Eigen::RowVectorXd dir(cfg.dim);
                double norm = 0.0;
                do {
                    for (int d = 0; d < cfg.dim; ++d) dir[d] = rng.normal();
                    norm = dir.norm();
                } while (norm < 1e-9);
                cand.row(c) = dir * (cfg.radius / norm);
            }
            double min_dist = std::numeric_limits<double>::infinity();
            for (int a = 0; a < cfg.classes; ++a)
                for (int b = a + 1; b < cfg.classes; ++b)
                    min_dist = std::min(min_dist, (cand.row(a) - cand.row(b)).norm());
            if (min_dist > best_min_dist) {
                best_min_dist = min_dist;
                best = cand;
            }
        }
        centers = best;
    }

    int row = 0;
    for (int c = 0; c < cfg.classes; ++c) {
        for (int k = 0; k < cfg.per_class; ++k, ++row) {
            for (int d = 0; d < cfg.dim; ++d)
                ds.features(row, d) = centers(c, d) + cfg.spread * rng.normal();
            ds.labels[row] = c;
            ds.ids[static_cast<std::size_t>(row)] = row;
        }
    }
    return ds;
}

Dataset make_rings(const RingsConfig& cfg, Rng& rng) {
    if (cfg.classes < 2 || cfg.per_class < 1)
        throw ValidationError("make_rings: invalid configuration");
    const int n = cfg.classes * cfg.per_class;
    Dataset ds;
    ds.num_classes = cfg.classes;
    ds.features.resize(n, 2);
    ds.labels.resize(n);
    ds.ids.resize(static_cast<std::size_t>(n));
    int row = 0;
    for (int c = 0; c < cfg.classes; ++c) {
        const double r = cfg.gap * (c + 1);
        for (int k = 0; k < cfg.per_class; ++k, ++row) {
            const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double rr = r + cfg.noise * rng.normal();
            ds.features(row, 0) = rr * std::cos(angle);
            ds.features(row, 1) = rr * std::sin(angle);
            ds.labels[row] = c;
            ds.ids[static_cast<std::size_t>(row)] = row;
        }
    }
    return ds;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("load_csv: empty file " + path);

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::vector<std::int64_t> ids;
    int max_label = -1;
    std::size_t dim = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 3)
            throw ValidationError("load_csv: line " + std::to_string(line_no) + " has too few columns");
        if (dim == 0)
            dim = cells.size() - 2;
        else if (cells.size() - 2 != dim)
            throw ValidationError("load_csv: inconsistent column count at line " + std::to_string(line_no));
        ids.push_back(std::stoll(cells[0]));
        const int label = std::stoi(cells[1]);
        if (label < 0) throw ValidationError("load_csv: negative label at line " + std::to_string(line_no));
        labels.push_back(label);
        max_label = std::max(max_label, label);
        std::vector<double> feats(dim);
        for (std::size_t d = 0; d < dim; ++d) feats[d] = std::stod(cells[d + 2]);
        rows.push_back(std::move(feats));
    }
    if (rows.empty()) throw ValidationError("load_csv: no samples in " + path);

    Dataset ds;
    ds.num_classes = max_label + 1;
    ds.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    ds.labels.resize(static_cast<Eigen::Index>(rows.size()));
    ds.ids = std::move(ids);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t d = 0; d < dim; ++d) ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
        ds.labels[static_cast<Eigen::Index>(i)] = labels[i];
    }
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("save_csv: cannot open " + path);
    out << "id,label";
    for (int d = 0; d < ds.dim(); ++d) out << ",f" << d;
    out << "\n";
    out.precision(17);
    for (int i = 0; i < ds.size(); ++i) {
        out << ds.ids[static_cast<std::size_t>(i)] << "," << ds.labels[i];
        for (int d = 0; d < ds.dim(); ++d) out << "," << ds.features(i, d);
        out << "\n";
    }
}

SplitDataset split_train_test(const Dataset& ds, double test_fraction, Rng& rng) {
    if (test_fraction <= 0.0 || test_fraction >= 1.0)
        throw ValidationError("split_train_test: test_fraction must be in (0,1)");
    std::vector<int> train_rows, test_rows;
    for (int c = 0; c < ds.num_classes; ++c) {
        std::vector<int> rows = ds.rows_of_class(c);
        if (rows.empty()) continue;
        rng.shuffle(rows);
        const std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
        if (n_test == 0 || n_test >= rows.size())
            throw ValidationError("split_train_test: class " + std::to_string(c) +
                                  " too small for the requested split");
        for (std::size_t i = 0; i < rows.size(); ++i)
            (i < n_test ? test_rows : train_rows).push_back(rows[i]);
    }

    auto take = [&](const std::vector<int>& rows) {
        Dataset out;
        out.num_classes = ds.num_classes;
        out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.features.cols());
        out.labels.resize(static_cast<Eigen::Index>(rows.size()));
        out.ids.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(rows[i]);
            out.labels[static_cast<Eigen::Index>(i)] = ds.labels[rows[i]];
            out.ids.push_back(ds.ids[static_cast<std::size_t>(rows[i])]);
        }
        return out;
    };
    return SplitDataset{take(train_rows), take(test_rows)};
}

}  // namespace clu
