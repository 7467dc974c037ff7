#include "clu/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clu/errors.hpp"

namespace clu {

namespace {

constexpr double kProbFloor = 1e-12;

bool defined(double v) { return !std::isnan(v); }

}  // namespace

double learning_accuracy(const AccuracyMatrix& m) {
    if (m.checkpoints() < 1 || m.tasks() < 1)
        throw ValidationError("learning_accuracy: empty accuracy matrix");
    const Eigen::Index last = m.a.rows() - 1;
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index j = 0; j < m.a.cols(); ++j) {
        const double final_acc = m.a(last, j);
        if (!defined(final_acc)) {
            for (Eigen::Index i = 0; i < last; ++i)
                if (defined(m.a(i, j)))
                    throw ValidationError("learning_accuracy: final row incomplete for task column " +
                                          std::to_string(j));
            continue;  // column never defined (fully unlearned task)
        }
        sum += final_acc;
        ++count;
    }
    if (count == 0) throw ValidationError("learning_accuracy: no defined task columns");
    return sum / count;
}

double forgetting_measure(const AccuracyMatrix& m) {
    if (m.tasks() < 2)
        throw ValidationError("forgetting_measure: undefined for fewer than two task columns");
    const Eigen::Index last = m.a.rows() - 1;
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index j = 0; j + 1 < m.a.cols(); ++j) {
        const double final_acc = m.a(last, j);
        if (!defined(final_acc)) continue;
        double best = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i <= last; ++i)
            if (defined(m.a(i, j))) best = std::max(best, m.a(i, j));
        sum += best - final_acc;
        ++count;
    }
    if (count == 0) throw ValidationError("forgetting_measure: no defined task columns");
    return -(sum / count);
}

double unlearning_accuracy(const std::vector<std::vector<double>>& per_target_accuracies) {
    if (per_target_accuracies.empty())
        throw ValidationError("unlearning_accuracy: no unlearn targets");
    double sum = 0.0;
    for (const auto& checkpoints : per_target_accuracies) {
        if (checkpoints.empty())
            throw ValidationError("unlearning_accuracy: target with no post-unlearn checkpoints");
        sum += *std::max_element(checkpoints.begin(), checkpoints.end());
    }
    return sum / static_cast<double>(per_target_accuracies.size());
}

double clean_accuracy(const Model& model, const ParamVector& params, const Batch& true_labeled) {
    if (true_labeled.size() == 0) throw ValidationError("clean_accuracy: empty confusion set");
    return model.accuracy(params, true_labeled);
}

double mean_kl(const Model& model, const ParamVector& params_p, const ParamVector& params_q,
               const Batch& data) {
    const Eigen::MatrixXd p = model.forward_probs(params_p, data);
    const Eigen::MatrixXd q = model.forward_probs(params_q, data);
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        double kl = 0.0;
        for (Eigen::Index c = 0; c < p.cols(); ++c) {
            const double pc = std::max(p(i, c), kProbFloor);
            const double qc = std::max(q(i, c), kProbFloor);
            kl += p(i, c) * (std::log(pc) - std::log(qc));
        }
        total += kl;
    }
    return total / static_cast<double>(p.rows());
}

double kl_to_oracle(const Model& model, const ParamVector& model_params,
                    const ParamVector& oracle_params, const Batch& data) {
    return mean_kl(model, oracle_params, model_params, data);
}

double modified_prediction_entropy(const Eigen::VectorXd& probs, int label) {
    if (label < 0 || label >= probs.size())
        throw ShapeError("modified_prediction_entropy: label out of range");
    const double p_y = probs[label];
    double value = -(1.0 - p_y) * std::log(std::max(p_y, kProbFloor));
    for (Eigen::Index c = 0; c < probs.size(); ++c) {
        if (c == label) continue;
        value -= probs[c] * std::log(std::max(1.0 - probs[c], kProbFloor));
    }
    return value;
}

namespace {

Eigen::MatrixXd attack_features(const Model& model, const ParamVector& params, const Batch& batch,
                                bool use_max_prob) {
    const Eigen::MatrixXd probs = model.forward_probs(params, batch);
    Eigen::MatrixXd feats(batch.size(), use_max_prob ? 2 : 1);
    for (int i = 0; i < batch.size(); ++i) {
        feats(i, 0) = modified_prediction_entropy(probs.row(i), batch.labels[i]);
        if (use_max_prob) feats(i, 1) = probs.row(i).maxCoeff();
    }
    return feats;
}

Batch subsample(const Batch& full, int n, Rng& rng) {
    if (n >= full.size()) return full;
    const auto rows = rng.sample_without_replacement(static_cast<std::size_t>(full.size()),
                                                     static_cast<std::size_t>(n));
    Batch b;
    b.features.resize(n, full.features.cols());
    b.labels.resize(n);
    for (int i = 0; i < n; ++i) {
        b.features.row(i) = full.features.row(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]));
        b.labels[i] = full.labels[static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)])];
    }
    return b;
}

}  // namespace

MiaResult mia_attack(const Model& model, const ParamVector& params, const Batch& remain,
                     const Batch& test, const Batch& forget, const MiaConfig& cfg, Rng& rng) {
    if (remain.size() == 0 || test.size() == 0 || forget.size() == 0)
        throw ValidationError("mia_attack: remain, test and forget sets must be nonempty");

    const int n_side = std::min({remain.size(), test.size(), cfg.max_set_size});
    if (n_side < 1) throw ValidationError("mia_attack: degenerate attack training set");
    const Batch remain_s = subsample(remain, n_side, rng);
    const Batch test_s = subsample(test, n_side, rng);

    const Eigen::MatrixXd x_pos = attack_features(model, params, remain_s, cfg.use_max_prob);
    const Eigen::MatrixXd x_neg = attack_features(model, params, test_s, cfg.use_max_prob);
    const int n_pos = static_cast<int>(x_pos.rows());
    const int n_neg = static_cast<int>(x_neg.rows());
    if (n_pos == 0 || n_neg == 0)
        throw ValidationError("mia_attack: attack labels collapsed to a single class");

    const int n = n_pos + n_neg;
    const int d = static_cast<int>(x_pos.cols());
    Eigen::MatrixXd x(n, d);
    x.topRows(n_pos) = x_pos;
    x.bottomRows(n_neg) = x_neg;
    Eigen::VectorXd y(n);
    y.head(n_pos).setOnes();
    y.tail(n_neg).setZero();

    // Standardize features on the attack training set.
    Eigen::RowVectorXd mean = x.colwise().mean();
    Eigen::RowVectorXd stddev(d);
    for (int j = 0; j < d; ++j) {
        const double var = (x.col(j).array() - mean[j]).square().mean();
        stddev[j] = std::sqrt(std::max(var, 1e-12));
    }
    Eigen::MatrixXd xs = (x.rowwise() - mean).array().rowwise() / stddev.array();

    // Balanced class weights.
    Eigen::VectorXd sample_w(n);
    sample_w.head(n_pos).setConstant(static_cast<double>(n) / (2.0 * n_pos));
    sample_w.tail(n_neg).setConstant(static_cast<double>(n) / (2.0 * n_neg));

    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    double b = 0.0;
    for (int it = 0; it < cfg.iters; ++it) {
        Eigen::VectorXd z = xs * w;
        z.array() += b;
        Eigen::VectorXd sig = 1.0 / (1.0 + (-z.array()).exp());
        const Eigen::VectorXd err = (sig - y).cwiseProduct(sample_w);
        const Eigen::VectorXd grad_w = xs.transpose() * err / n + cfg.l2 * w;
        const double grad_b = err.mean();
        w -= cfg.lr * grad_w;
        b -= cfg.lr * grad_b;
    }

    auto predict_member = [&](const Eigen::MatrixXd& feats) -> Eigen::ArrayXd {
        Eigen::MatrixXd fs = (feats.rowwise() - mean).array().rowwise() / stddev.array();
        Eigen::VectorXd z = fs * w;
        z.array() += b;
        return (z.array() >= 0.0).cast<double>();
    };

    MiaResult result;
    const Eigen::ArrayXd forget_pred =
        predict_member(attack_features(model, params, forget, cfg.use_max_prob));
    result.score = forget_pred.mean();
    result.train_fpr = predict_member(x_neg).mean();
    result.train_tpr = predict_member(x_pos).mean();
    return result;
}

double mia_score(const Model& model, const ParamVector& params, const Batch& remain,
                 const Batch& test, const Batch& forget, const MiaConfig& cfg, Rng& rng) {
    return mia_attack(model, params, remain, test, forget, cfg, rng).score;
}

}  // namespace clu
