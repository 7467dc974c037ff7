#include "clu/model.hpp"

#include <cmath>
#include <cstddef>
#include <utility>

#include "clu/dual.hpp"
#include "clu/errors.hpp"

namespace clu {

namespace {

constexpr double kProbFloor = 1e-12;

// Bring the std overloads into scope so the scalar-generic kernels resolve
// exp/log/tanh for double as well as for Dual.
using std::exp;
using std::log;
using std::tanh;

template <typename S>
S activate(const S& z, Activation a) {
    if (a == Activation::Relu) return value_of(z) > 0.0 ? z : S(0.0);
    return tanh(z);
}

template <typename S>
S activate_deriv(const S& z, Activation a) {
    if (a == Activation::Relu) return S(value_of(z) > 0.0 ? 1.0 : 0.0);
    const S t = tanh(z);
    return S(1.0) - t * t;
}

/// Softmax probabilities from logits, max-subtracted. probs must hold C slots.
template <typename S>
void softmax(const std::vector<S>& logits, std::vector<S>& probs) {
    const std::size_t c_count = logits.size();
    S m = logits[0];
    for (std::size_t c = 1; c < c_count; ++c)
        if (logits[c] > m) m = logits[c];
    S sum(0.0);
    for (std::size_t c = 0; c < c_count; ++c) {
        probs[c] = exp(logits[c] - m);
        sum += probs[c];
    }
    const S inv = S(1.0) / sum;
    for (std::size_t c = 0; c < c_count; ++c) probs[c] = probs[c] * inv;
}

template <typename S>
S cross_entropy(const std::vector<S>& probs, int label) {
    const S& p = probs[static_cast<std::size_t>(label)];
    if (value_of(p) < kProbFloor) return S(-std::log(kProbFloor));
    return -log(p);
}

/// One MLP sample: forward, loss, probabilities, and (optionally) the
/// gradient of weight * loss accumulated into grad.
template <typename S>
void mlp_pass(const std::vector<int>& dims, Activation act_kind, const S* params,
              const double* x, int label, double weight, S* grad, S* loss_out,
              S* probs_out) {
    const std::size_t n_layers = dims.size() - 1;

    // Offsets mirror Model::build_layout.
    std::vector<std::size_t> w_off(n_layers), b_off(n_layers);
    {
        std::size_t off = 0;
        for (std::size_t l = 0; l < n_layers; ++l) {
            w_off[l] = off;
            off += static_cast<std::size_t>(dims[l + 1]) * dims[l];
            b_off[l] = off;
            off += static_cast<std::size_t>(dims[l + 1]);
        }
    }

    std::vector<std::vector<S>> pre(n_layers), act(n_layers);
    std::vector<S> input(static_cast<std::size_t>(dims[0]));
    for (int i = 0; i < dims[0]; ++i) input[static_cast<std::size_t>(i)] = S(x[i]);

    const std::vector<S>* cur = &input;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int in_dim = dims[l];
        const int out_dim = dims[l + 1];
        pre[l].assign(static_cast<std::size_t>(out_dim), S(0.0));
        for (int o = 0; o < out_dim; ++o) {
            S z = params[b_off[l] + static_cast<std::size_t>(o)];
            const S* w_row = params + w_off[l] + static_cast<std::size_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) z += w_row[i] * (*cur)[static_cast<std::size_t>(i)];
            pre[l][static_cast<std::size_t>(o)] = z;
        }
        if (l + 1 < n_layers) {
            act[l].resize(static_cast<std::size_t>(out_dim));
            for (int o = 0; o < out_dim; ++o)
                act[l][static_cast<std::size_t>(o)] = activate(pre[l][static_cast<std::size_t>(o)], act_kind);
            cur = &act[l];
        }
    }

    const int c_count = dims.back();
    std::vector<S> probs(static_cast<std::size_t>(c_count));
    softmax(pre[n_layers - 1], probs);
    if (probs_out)
        for (int c = 0; c < c_count; ++c) probs_out[c] = probs[static_cast<std::size_t>(c)];
    if (loss_out) *loss_out = cross_entropy(probs, label);
    if (!grad) return;
    // The floored loss is constant once p_y drops below the floor, so the
    // gradient there is zero (this is what bounds runaway ascent).
    if (value_of(probs[static_cast<std::size_t>(label)]) < kProbFloor) return;

    // Backward from d(loss)/d(logit) = p - onehot.
    std::vector<S> dz(static_cast<std::size_t>(c_count));
    for (int c = 0; c < c_count; ++c)
        dz[static_cast<std::size_t>(c)] =
            (probs[static_cast<std::size_t>(c)] - S(c == label ? 1.0 : 0.0)) * S(weight);

    for (std::size_t l = n_layers; l-- > 0;) {
        const int in_dim = dims[l];
        const int out_dim = dims[l + 1];
        const std::vector<S>& in_act = (l == 0) ? input : act[l - 1];
        for (int o = 0; o < out_dim; ++o) {
            const S& d = dz[static_cast<std::size_t>(o)];
            S* gw_row = grad + w_off[l] + static_cast<std::size_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) gw_row[i] += d * in_act[static_cast<std::size_t>(i)];
            grad[b_off[l] + static_cast<std::size_t>(o)] += d;
        }
        if (l == 0) break;
        std::vector<S> dh(static_cast<std::size_t>(in_dim), S(0.0));
        for (int o = 0; o < out_dim; ++o) {
            const S* w_row = params + w_off[l] + static_cast<std::size_t>(o) * in_dim;
            const S& d = dz[static_cast<std::size_t>(o)];
            for (int i = 0; i < in_dim; ++i) dh[static_cast<std::size_t>(i)] += w_row[i] * d;
        }
        dz.resize(static_cast<std::size_t>(in_dim));
        for (int i = 0; i < in_dim; ++i)
            dz[static_cast<std::size_t>(i)] =
                dh[static_cast<std::size_t>(i)] * activate_deriv(pre[l - 1][static_cast<std::size_t>(i)], act_kind);
    }
}

/// Spatial tensor laid out channel-major: t[ch][r][c] = v[(ch*side + r)*side + c].
template <typename S>
struct Grid {
    std::vector<S> v;
    int channels = 0;
    int side = 0;

    void init(int ch, int s) {
        channels = ch;
        side = s;
        v.assign(static_cast<std::size_t>(ch) * s * s, S(0.0));
    }
    S& at(int ch, int r, int c) {
        return v[(static_cast<std::size_t>(ch) * side + r) * side + c];
    }
    const S& at(int ch, int r, int c) const {
        return v[(static_cast<std::size_t>(ch) * side + r) * side + c];
    }
};

/// One TinyConv sample. Stages of conv3x3 (pad 1) + activation + 2x2 mean
/// pool, then global mean pooling and a linear head.
template <typename S>
void conv_pass(const ModelSpec& spec, int side0, const S* params, const double* x,
               int label, double weight, S* grad, S* loss_out, S* probs_out) {
    const std::size_t n_stages = spec.channel_widths.size();
    Activation act_kind = spec.activation;

    std::vector<std::size_t> w_off(n_stages), b_off(n_stages);
    std::size_t off = 0;
    int in_ch = 1;
    for (std::size_t j = 0; j < n_stages; ++j) {
        const int out_ch = spec.channel_widths[j];
        w_off[j] = off;
        off += static_cast<std::size_t>(out_ch) * in_ch * 9;
        b_off[j] = off;
        off += static_cast<std::size_t>(out_ch);
        in_ch = out_ch;
    }
    const std::size_t head_w = off;
    const std::size_t head_b = head_w + static_cast<std::size_t>(spec.num_classes) * in_ch;

    std::vector<Grid<S>> inputs(n_stages + 1), convz(n_stages), acty(n_stages);
    inputs[0].init(1, side0);
    for (int r = 0; r < side0; ++r)
        for (int c = 0; c < side0; ++c) inputs[0].at(0, r, c) = S(x[r * side0 + c]);

    int side = side0;
    in_ch = 1;
    for (std::size_t j = 0; j < n_stages; ++j) {
        const int out_ch = spec.channel_widths[j];
        convz[j].init(out_ch, side);
        acty[j].init(out_ch, side);
        for (int o = 0; o < out_ch; ++o) {
            for (int r = 0; r < side; ++r) {
                for (int c = 0; c < side; ++c) {
                    S z = params[b_off[j] + static_cast<std::size_t>(o)];
                    for (int i = 0; i < in_ch; ++i) {
                        for (int kr = 0; kr < 3; ++kr) {
                            const int rr = r + kr - 1;
                            if (rr < 0 || rr >= side) continue;
                            for (int kc = 0; kc < 3; ++kc) {
                                const int cc = c + kc - 1;
                                if (cc < 0 || cc >= side) continue;
                                z += params[w_off[j] + ((static_cast<std::size_t>(o) * in_ch + i) * 9) + kr * 3 + kc] *
                                     inputs[j].at(i, rr, cc);
                            }
                        }
                    }
                    convz[j].at(o, r, c) = z;
                    acty[j].at(o, r, c) = activate(z, act_kind);
                }
            }
        }
        const int pooled_side = side / 2;
        inputs[j + 1].init(out_ch, pooled_side);
        for (int o = 0; o < out_ch; ++o)
            for (int r = 0; r < pooled_side; ++r)
                for (int c = 0; c < pooled_side; ++c)
                    inputs[j + 1].at(o, r, c) =
                        (acty[j].at(o, 2 * r, 2 * c) + acty[j].at(o, 2 * r, 2 * c + 1) +
                         acty[j].at(o, 2 * r + 1, 2 * c) + acty[j].at(o, 2 * r + 1, 2 * c + 1)) *
                        S(0.25);
        side = pooled_side;
        in_ch = out_ch;
    }

    // Global mean pool, then the linear head.
    const Grid<S>& last = inputs[n_stages];
    const double inv_cells = 1.0 / (static_cast<double>(last.side) * last.side);
    std::vector<S> feat(static_cast<std::size_t>(in_ch), S(0.0));
    for (int ch = 0; ch < in_ch; ++ch) {
        S acc(0.0);
        for (int r = 0; r < last.side; ++r)
            for (int c = 0; c < last.side; ++c) acc += last.at(ch, r, c);
        feat[static_cast<std::size_t>(ch)] = acc * S(inv_cells);
    }

    const int c_count = spec.num_classes;
    std::vector<S> logits(static_cast<std::size_t>(c_count));
    for (int o = 0; o < c_count; ++o) {
        S z = params[head_b + static_cast<std::size_t>(o)];
        for (int i = 0; i < in_ch; ++i)
            z += params[head_w + static_cast<std::size_t>(o) * in_ch + i] * feat[static_cast<std::size_t>(i)];
        logits[static_cast<std::size_t>(o)] = z;
    }
    std::vector<S> probs(static_cast<std::size_t>(c_count));
    softmax(logits, probs);
    if (probs_out)
        for (int c = 0; c < c_count; ++c) probs_out[c] = probs[static_cast<std::size_t>(c)];
    if (loss_out) *loss_out = cross_entropy(probs, label);
    if (!grad) return;
    if (value_of(probs[static_cast<std::size_t>(label)]) < kProbFloor) return;

    std::vector<S> dlogit(static_cast<std::size_t>(c_count));
    for (int c = 0; c < c_count; ++c)
        dlogit[static_cast<std::size_t>(c)] =
            (probs[static_cast<std::size_t>(c)] - S(c == label ? 1.0 : 0.0)) * S(weight);

    std::vector<S> dfeat(static_cast<std::size_t>(in_ch), S(0.0));
    for (int o = 0; o < c_count; ++o) {
        const S& d = dlogit[static_cast<std::size_t>(o)];
        for (int i = 0; i < in_ch; ++i) {
            grad[head_w + static_cast<std::size_t>(o) * in_ch + i] += d * feat[static_cast<std::size_t>(i)];
            dfeat[static_cast<std::size_t>(i)] +=
                params[head_w + static_cast<std::size_t>(o) * in_ch + i] * d;
        }
        grad[head_b + static_cast<std::size_t>(o)] += d;
    }

    Grid<S> dpool;
    dpool.init(in_ch, last.side);
    for (int ch = 0; ch < in_ch; ++ch)
        for (int r = 0; r < last.side; ++r)
            for (int c = 0; c < last.side; ++c)
                dpool.at(ch, r, c) = dfeat[static_cast<std::size_t>(ch)] * S(inv_cells);

    for (std::size_t j = n_stages; j-- > 0;) {
        const int out_ch = convz[j].channels;
        const int conv_side = convz[j].side;
        const int stage_in_ch = inputs[j].channels;

        Grid<S> dact;
        dact.init(out_ch, conv_side);
        for (int o = 0; o < out_ch; ++o)
            for (int r = 0; r < dpool.side; ++r)
                for (int c = 0; c < dpool.side; ++c) {
                    const S quarter = dpool.at(o, r, c) * S(0.25);
                    dact.at(o, 2 * r, 2 * c) += quarter;
                    dact.at(o, 2 * r, 2 * c + 1) += quarter;
                    dact.at(o, 2 * r + 1, 2 * c) += quarter;
                    dact.at(o, 2 * r + 1, 2 * c + 1) += quarter;
                }

        Grid<S> din;
        din.init(stage_in_ch, inputs[j].side);
        for (int o = 0; o < out_ch; ++o) {
            for (int r = 0; r < conv_side; ++r) {
                for (int c = 0; c < conv_side; ++c) {
                    const S dz = dact.at(o, r, c) * activate_deriv(convz[j].at(o, r, c), act_kind);
                    grad[b_off[j] + static_cast<std::size_t>(o)] += dz;
                    for (int i = 0; i < stage_in_ch; ++i) {
                        for (int kr = 0; kr < 3; ++kr) {
                            const int rr = r + kr - 1;
                            if (rr < 0 || rr >= conv_side) continue;
                            for (int kc = 0; kc < 3; ++kc) {
                                const int cc = c + kc - 1;
                                if (cc < 0 || cc >= conv_side) continue;
                                const std::size_t widx =
                                    w_off[j] + ((static_cast<std::size_t>(o) * stage_in_ch + i) * 9) + kr * 3 + kc;
                                grad[widx] += dz * inputs[j].at(i, rr, cc);
                                din.at(i, rr, cc) += params[widx] * dz;
                            }
                        }
                    }
                }
            }
        }
        dpool = std::move(din);
    }
}

template <typename S>
void sample_pass(const ModelSpec& spec, const std::vector<int>& mlp_dims, int conv_side,
                 const S* params, const double* x, int label, double weight, S* grad,
                 S* loss_out, S* probs_out) {
    if (spec.architecture == Architecture::Mlp)
        mlp_pass(mlp_dims, spec.activation, params, x, label, weight, grad, loss_out, probs_out);
    else
        conv_pass(spec, conv_side, params, x, label, weight, grad, loss_out, probs_out);
}

int integer_sqrt(int v) {
    int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(v))));
    while (s * s > v) --s;
    while ((s + 1) * (s + 1) <= v) ++s;
    return s;
}

}  // namespace

Batch concat_batches(const std::vector<Batch>& parts) {
    Eigen::Index n = 0;
    for (const Batch& b : parts) n += b.features.rows();
    Batch out;
    if (parts.empty() || n == 0) return out;
    Eigen::Index cols = 0;
    for (const Batch& b : parts)
        if (b.features.rows() > 0) cols = b.features.cols();
    out.features.resize(n, cols);
    out.labels.resize(n);
    out.ids.reserve(static_cast<std::size_t>(n));
    Eigen::Index row = 0;
    for (const Batch& b : parts) {
        if (b.features.rows() == 0) continue;
        if (b.features.cols() != cols) throw ShapeError("concat_batches: feature dims differ");
        out.features.middleRows(row, b.features.rows()) = b.features;
        out.labels.segment(row, b.labels.size()) = b.labels;
        out.ids.insert(out.ids.end(), b.ids.begin(), b.ids.end());
        row += b.features.rows();
    }
    return out;
}

void ModelSpec::validate() const {
    if (architecture == Architecture::Quadratic) return;
    if (input_dim <= 0) throw ValidationError("ModelSpec: input_dim must be positive");
    if (num_classes < 2) throw ValidationError("ModelSpec: num_classes must be >= 2");
    if (architecture == Architecture::Mlp) {
        for (int w : layer_widths)
            if (w <= 0) throw ValidationError("ModelSpec: layer widths must be positive");
    } else {
        if (channel_widths.empty())
            throw ValidationError("ModelSpec: tiny-conv needs at least one channel width");
        for (int w : channel_widths)
            if (w <= 0) throw ValidationError("ModelSpec: channel widths must be positive");
        const int side = integer_sqrt(input_dim);
        if (side * side != input_dim)
            throw ValidationError("ModelSpec: tiny-conv input_dim must be a perfect square");
        int s = side;
        for (std::size_t j = 0; j < channel_widths.size(); ++j) {
            s /= 2;
            if (s < 1) throw ValidationError("ModelSpec: tiny-conv input too small for stage count");
        }
    }
}

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    if (spec_.architecture == Architecture::Quadratic)
        throw ValidationError("use Model::quadratic to build a surrogate model");
    if (spec_.architecture == Architecture::TinyConv) conv_side_ = integer_sqrt(spec_.input_dim);
    build_layout();
}

Model Model::quadratic(QuadraticLoss loss) {
    const auto dim = loss.center.size();
    if (loss.curvature.rows() != dim || loss.curvature.cols() != dim || loss.linear.size() != dim)
        throw ShapeError("quadratic surrogate: inconsistent term dimensions");
    Model m;
    m.spec_.architecture = Architecture::Quadratic;
    m.spec_.input_dim = 1;
    m.spec_.num_classes = 2;
    m.quad_ = std::move(loss);
    m.param_count_ = static_cast<int>(dim);
    m.layout_ = {{"quadratic", 0, static_cast<int>(dim), 1}};
    return m;
}

void Model::build_layout() {
    layout_.clear();
    int off = 0;
    if (spec_.architecture == Architecture::Mlp) {
        std::vector<int> dims;
        dims.push_back(spec_.input_dim);
        dims.insert(dims.end(), spec_.layer_widths.begin(), spec_.layer_widths.end());
        dims.push_back(spec_.num_classes);
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            const std::string tag = "layer" + std::to_string(l);
            layout_.push_back({tag + ".weight", off, dims[l + 1], dims[l]});
            off += dims[l + 1] * dims[l];
            layout_.push_back({tag + ".bias", off, dims[l + 1], 1});
            off += dims[l + 1];
        }
    } else {
        int in_ch = 1;
        for (std::size_t j = 0; j < spec_.channel_widths.size(); ++j) {
            const int out_ch = spec_.channel_widths[j];
            const std::string tag = "conv" + std::to_string(j);
            layout_.push_back({tag + ".weight", off, out_ch, in_ch * 9});
            off += out_ch * in_ch * 9;
            layout_.push_back({tag + ".bias", off, out_ch, 1});
            off += out_ch;
            in_ch = out_ch;
        }
        layout_.push_back({"head.weight", off, spec_.num_classes, in_ch});
        off += spec_.num_classes * in_ch;
        layout_.push_back({"head.bias", off, spec_.num_classes, 1});
        off += spec_.num_classes;
    }
    param_count_ = off;
}

ParamVector Model::init_params(Rng& rng) const {
    ParamVector p = ParamVector::Zero(param_count_);
    if (spec_.architecture == Architecture::Quadratic) return p;
    for (const LayoutEntry& e : layout_) {
        if (e.cols == 1) continue;  // biases stay zero
        const double fan_in = e.cols;
        const double fan_out = e.rows;
        const double s = std::sqrt(6.0 / (fan_in + fan_out));
        for (int i = 0; i < e.rows * e.cols; ++i) p[e.offset + i] = rng.uniform(-s, s);
    }
    return p;
}

void Model::check_batch(const Batch& batch) const {
    if (batch.size() < 1) throw ShapeError("batch: needs at least one sample");
    if (batch.features.cols() != spec_.input_dim && spec_.architecture != Architecture::Quadratic)
        throw ShapeError("batch: feature dimension does not match model input_dim");
    if (batch.labels.size() != batch.features.rows())
        throw ShapeError("batch: label count does not match sample count");
    if (!batch.features.allFinite()) throw ValidationError("batch: non-finite feature entries");
    for (int i = 0; i < batch.labels.size(); ++i)
        if (batch.labels[i] < 0 || batch.labels[i] >= spec_.num_classes)
            if (spec_.architecture != Architecture::Quadratic)
                throw ValidationError("batch: label out of range");
}

void Model::check_params(const ParamVector& params) const {
    if (params.size() != param_count_) throw ShapeError("params: wrong length for this model");
    if (!params.allFinite()) throw ValidationError("params: non-finite entries");
}

Eigen::MatrixXd Model::forward_probs(const ParamVector& params, const Batch& batch) const {
    if (spec_.architecture == Architecture::Quadratic)
        throw CapabilityError("quadratic surrogate has no probabilistic output");
    check_params(params);
    check_batch(batch);
    const int n = batch.size();
    Eigen::MatrixXd probs(n, spec_.num_classes);
    std::vector<int> dims;
    if (spec_.architecture == Architecture::Mlp) {
        dims.push_back(spec_.input_dim);
        dims.insert(dims.end(), spec_.layer_widths.begin(), spec_.layer_widths.end());
        dims.push_back(spec_.num_classes);
    }
    std::vector<double> row(static_cast<std::size_t>(spec_.num_classes));
    Eigen::RowVectorXd x(spec_.input_dim);
    for (int i = 0; i < n; ++i) {
        x = batch.features.row(i);
        sample_pass<double>(spec_, dims, conv_side_, params.data(), x.data(), batch.labels[i], 1.0,
                            nullptr, nullptr, row.data());
        for (int c = 0; c < spec_.num_classes; ++c) probs(i, c) = row[static_cast<std::size_t>(c)];
    }
    return probs;
}

Eigen::VectorXd Model::per_sample_loss(const ParamVector& params, const Batch& batch) const {
    check_params(params);
    check_batch(batch);
    const int n = batch.size();
    Eigen::VectorXd losses(n);
    if (spec_.architecture == Architecture::Quadratic) {
        const Eigen::VectorXd diff = params - quad_.center;
        const double v = 0.5 * diff.dot(quad_.curvature * diff) + quad_.linear.dot(params);
        losses.setConstant(v);
        return losses;
    }
    std::vector<int> dims;
    if (spec_.architecture == Architecture::Mlp) {
        dims.push_back(spec_.input_dim);
        dims.insert(dims.end(), spec_.layer_widths.begin(), spec_.layer_widths.end());
        dims.push_back(spec_.num_classes);
    }
    Eigen::RowVectorXd x(spec_.input_dim);
    for (int i = 0; i < n; ++i) {
        x = batch.features.row(i);
        double loss = 0.0;
        sample_pass<double>(spec_, dims, conv_side_, params.data(), x.data(), batch.labels[i], 1.0,
                            nullptr, &loss, nullptr);
        losses[i] = loss;
    }
    return losses;
}

ParamVector Model::weighted_grad(const ParamVector& params, const Batch& batch,
                                 const SampleWeights& weights) const {
    check_params(params);
    check_batch(batch);
    if (weights.size() != batch.size())
        throw ShapeError("weighted_grad: weight count does not match batch size");
    if (spec_.architecture == Architecture::Quadratic) {
        const double total = weights.sum();
        return total * (quad_.curvature * (params - quad_.center) + quad_.linear);
    }
    std::vector<int> dims;
    if (spec_.architecture == Architecture::Mlp) {
        dims.push_back(spec_.input_dim);
        dims.insert(dims.end(), spec_.layer_widths.begin(), spec_.layer_widths.end());
        dims.push_back(spec_.num_classes);
    }
    ParamVector grad = ParamVector::Zero(param_count_);
    Eigen::RowVectorXd x(spec_.input_dim);
    for (int i = 0; i < batch.size(); ++i) {
        if (weights[i] == 0.0) continue;
        x = batch.features.row(i);
        sample_pass<double>(spec_, dims, conv_side_, params.data(), x.data(), batch.labels[i],
                            weights[i], grad.data(), nullptr, nullptr);
    }
    return grad;
}

Eigen::MatrixXd Model::explicit_hessian(const ParamVector& params, const Batch& batch,
                                        const SampleWeights& weights, int param_cap) const {
    check_params(params);
    check_batch(batch);
    if (weights.size() != batch.size())
        throw ShapeError("explicit_hessian: weight count does not match batch size");
    if (param_count_ > param_cap)
        throw CapabilityError("explicit_hessian: parameter count " + std::to_string(param_count_) +
                              " exceeds cap " + std::to_string(param_cap));
    if (spec_.architecture == Architecture::Quadratic) {
        return weights.sum() * quad_.curvature;
    }
    std::vector<int> dims;
    if (spec_.architecture == Architecture::Mlp) {
        dims.push_back(spec_.input_dim);
        dims.insert(dims.end(), spec_.layer_widths.begin(), spec_.layer_widths.end());
        dims.push_back(spec_.num_classes);
    }
    const int p_count = param_count_;
    Eigen::MatrixXd hess(p_count, p_count);
    std::vector<Dual> dual_params(static_cast<std::size_t>(p_count));
    std::vector<Dual> dual_grad(static_cast<std::size_t>(p_count));
    Eigen::RowVectorXd x(spec_.input_dim);
    for (int j = 0; j < p_count; ++j) {
        for (int i = 0; i < p_count; ++i) dual_params[static_cast<std::size_t>(i)] = {params[i], i == j ? 1.0 : 0.0};
        std::fill(dual_grad.begin(), dual_grad.end(), Dual(0.0));
        for (int i = 0; i < batch.size(); ++i) {
            if (weights[i] == 0.0) continue;
            x = batch.features.row(i);
            sample_pass<Dual>(spec_, dims, conv_side_, dual_params.data(), x.data(), batch.labels[i],
                              weights[i], dual_grad.data(), nullptr, nullptr);
        }
        for (int i = 0; i < p_count; ++i) hess(i, j) = dual_grad[static_cast<std::size_t>(i)].d;
    }
    return hess;
}

double Model::mean_loss(const ParamVector& params, const Batch& batch) const {
    return per_sample_loss(params, batch).mean();
}

Eigen::VectorXi Model::predict(const ParamVector& params, const Batch& batch) const {
    const Eigen::MatrixXd probs = forward_probs(params, batch);
    Eigen::VectorXi out(probs.rows());
    for (int i = 0; i < probs.rows(); ++i) {
        Eigen::Index best = 0;
        probs.row(i).maxCoeff(&best);
        out[i] = static_cast<int>(best);
    }
    return out;
}

double Model::accuracy(const ParamVector& params, const Batch& batch) const {
    const Eigen::VectorXi pred = predict(params, batch);
    int correct = 0;
    for (int i = 0; i < pred.size(); ++i)
        if (pred[i] == batch.labels[i]) ++correct;
    return static_cast<double>(correct) / pred.size();
}

}  // namespace clu
