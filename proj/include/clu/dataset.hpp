#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clu/model.hpp"
#include "clu/rng.hpp"

namespace clu {

/// In-memory labeled dataset. Sample ids are stable 64-bit integers assigned
/// at ingestion and survive every downstream split or shuffle.
struct Dataset {
    Eigen::MatrixXd features;       // n x dim
    Eigen::VectorXi labels;         // n
    std::vector<std::int64_t> ids;  // n
    int num_classes = 0;

    int size() const { return static_cast<int>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }

    Batch as_batch() const;
    Batch subset(const std::vector<int>& rows) const;
    std::vector<int> rows_of_class(int cls) const;
};

struct BlobsConfig {
    int classes = 8;
    int dim = 2;
    int per_class = 200;
    double spread = 0.35;   // within-class standard deviation
    double radius = 2.0;    // class centers drawn on a sphere of this radius
};

/// Seeded isotropic Gaussian blobs, one cluster per class.
Dataset make_blobs(const BlobsConfig& cfg, Rng& rng);

struct RingsConfig {
    int classes = 3;
    int per_class = 200;
    double noise = 0.08;
    double gap = 1.0;  // radial distance between consecutive rings
};

/// Concentric 2-D rings, one radius per class.
Dataset make_rings(const RingsConfig& cfg, Rng& rng);

/// CSV ingestion: header `id,label,f0,f1,...`, UTF-8, one sample per row.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);

/// Train/test split, stratified per class.
struct SplitDataset {
    Dataset train;
    Dataset test;
};

SplitDataset split_train_test(const Dataset& ds, double test_fraction, Rng& rng);

}  // namespace clu
