#include <doctest.h>

#include <cmath>

#include "clu/buffer.hpp"
#include "clu/dataset.hpp"
#include "clu/errors.hpp"
#include "clu/optimizer.hpp"

using namespace clu;

namespace {

ModelSpec small_mlp(int input, int classes, std::vector<int> hidden) {
    ModelSpec spec;
    spec.architecture = Architecture::Mlp;
    spec.input_dim = input;
    spec.num_classes = classes;
    spec.layer_widths = std::move(hidden);
    spec.activation = Activation::Tanh;
    return spec;
}

Batch blob_batch(int classes, int per_class, std::uint64_t seed) {
    BlobsConfig cfg;
    cfg.classes = classes;
    cfg.dim = 2;
    cfg.per_class = per_class;
    Rng rng(seed);
    return make_blobs(cfg, rng).as_batch();
}

ParamVector train_to_convergence(const Model& model, const Batch& batch, int steps, double lr,
                                 std::uint64_t seed) {
    Rng rng(seed);
    ParamVector params = model.init_params(rng);
    const SampleWeights w = SampleWeights::Constant(batch.size(), 1.0 / batch.size());
    for (int s = 0; s < steps; ++s) params -= lr * model.weighted_grad(params, batch, w);
    return params;
}

}  // namespace

TEST_SUITE("optimizer") {
    TEST_CASE("learn coefficients vanish at the start of the ramp") {
        CoefficientSchedule sched;
        Eigen::VectorXd losses(3);
        losses << 0.5, 1.0, 2.0;
        const Eigen::VectorXd c = adaptive_coeffs_learn(losses, 0, 10, sched);
        CHECK(c.cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("unlearn coefficients vanish at the end of the ramp") {
        CoefficientSchedule sched;
        Eigen::VectorXd losses(3);
        losses << 0.5, 1.0, 2.0;
        const Eigen::VectorXd c = adaptive_coeffs_unlearn(losses, 10, 10, sched);
        CHECK(c.cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("equal losses collapse to the ramp value") {
        CoefficientSchedule sched;
        sched.lambda_learn = 2.5;
        sched.lambda_unlearn = 0.7;
        const Eigen::VectorXd losses = Eigen::VectorXd::Constant(5, 1.3);
        const Eigen::VectorXd cl = adaptive_coeffs_learn(losses, 3, 10, sched);
        const Eigen::VectorXd cu = adaptive_coeffs_unlearn(losses, 3, 10, sched);
        for (int i = 0; i < 5; ++i) {
            CHECK(cl[i] == doctest::Approx(0.3).epsilon(1e-12));
            CHECK(cu[i] == doctest::Approx(0.7).epsilon(1e-12));
        }
    }

    TEST_CASE("hand-computed learn coefficients with the cap") {
        CoefficientSchedule sched;
        sched.lambda_learn = 1.0;
        Eigen::VectorXd losses(2);
        losses << 1.0, 2.0;
        const Eigen::VectorXd c = adaptive_coeffs_learn(losses, 4, 4, sched);
        // Raw weights: 2*(1/1)/(3/2) = 4/3 -> capped at 1; 2*(1/2)/(3/2) = 2/3.
        CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(c[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }

    TEST_CASE("hand-computed unlearn coefficients are uncapped") {
        CoefficientSchedule sched;
        sched.lambda_unlearn = 1.0;
        Eigen::VectorXd losses(2);
        losses << 1.0, 3.0;
        const Eigen::VectorXd c = adaptive_coeffs_unlearn(losses, 0, 4, sched);
        CHECK(c[0] == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(c[1] == doctest::Approx(0.5).epsilon(1e-12));
    }

    TEST_CASE("coefficients reject empty inputs and bad iteration indices") {
        CoefficientSchedule sched;
        CHECK_THROWS_AS(adaptive_coeffs_learn(Eigen::VectorXd(), 1, 4, sched), ValidationError);
        Eigen::VectorXd losses(1);
        losses << 1.0;
        CHECK_THROWS_AS(adaptive_coeffs_learn(losses, 5, 4, sched), ValidationError);
        CHECK_THROWS_AS(adaptive_coeffs_unlearn(losses, -1, 4, sched), ValidationError);
    }

    TEST_CASE("larger loss never gets a larger coefficient") {
        CoefficientSchedule sched;
        sched.lambda_learn = 1.7;
        sched.lambda_unlearn = 0.9;
        Rng rng(21);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd losses(8);
            for (int i = 0; i < 8; ++i) losses[i] = rng.uniform(1e-3, 4.0);
            const Eigen::VectorXd cl = adaptive_coeffs_learn(losses, 1, 10, sched);
            const Eigen::VectorXd cu = adaptive_coeffs_unlearn(losses, 3, 10, sched);
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j)
                    if (losses[i] > losses[j]) {
                        CHECK(cl[i] <= cl[j] + 1e-12);
                        CHECK(cu[i] <= cu[j] + 1e-12);
                    }
        }
    }

    TEST_CASE("identical magnitudes with unit threshold keep every coordinate") {
        SaliencyConfig cfg;
        cfg.gamma = 1.0;
        const Eigen::VectorXd g = Eigen::VectorXd::Constant(6, 0.37);
        const SaliencyMask m = saliency_mask(g, g, cfg);
        CHECK(m.sum() == 6.0);
    }

    TEST_CASE("elementwise ratio against the threshold") {
        SaliencyConfig cfg;
        cfg.gamma = 1.0;
        Eigen::VectorXd remain(2), task(2);
        remain << 1.0, 1.0;
        task << 2.0, 0.5;
        const SaliencyMask m = saliency_mask(task, remain, cfg);
        CHECK(m[0] == 1.0);
        CHECK(m[1] == 0.0);
    }

    TEST_CASE("degenerate threshold keeps everything") {
        SaliencyConfig cfg;
        cfg.gamma = 1e-300;
        Rng rng(22);
        Eigen::VectorXd task(5), remain(5);
        for (int i = 0; i < 5; ++i) {
            task[i] = rng.uniform(0.0, 2.0);
            remain[i] = rng.uniform(0.0, 2.0);
        }
        CHECK(saliency_mask(task, remain, cfg).sum() == 5.0);
    }

    TEST_CASE("mask is invariant to a common positive scale") {
        SaliencyConfig cfg;
        cfg.gamma = 1.3;
        Rng rng(23);
        Eigen::VectorXd task(16), remain(16);
        for (int i = 0; i < 16; ++i) {
            task[i] = rng.uniform(0.0, 3.0);
            remain[i] = rng.uniform(1e-6, 3.0);
        }
        const SaliencyMask a = saliency_mask(task, remain, cfg);
        const SaliencyMask b = saliency_mask(Eigen::VectorXd(37.5 * task), Eigen::VectorXd(37.5 * remain), cfg);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("mask rejects mismatched lengths") {
        SaliencyConfig cfg;
        CHECK_THROWS_AS(saliency_mask(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(4), cfg),
                        ShapeError);
    }

    TEST_CASE("fast_step with zero coefficients and full mask is plain SGD") {
        const Model model(small_mlp(2, 3, {6}));
        Rng rng(24);
        ParamVector params = model.init_params(rng);
        const Batch batch = blob_batch(3, 10, 25);
        const Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(batch.size());
        const SaliencyMask mask = SaliencyMask::Ones(model.param_count());
        const ParamVector stepped = fast_step(model, params, batch, coeffs, mask, 0.1, TaskKind::Learn);
        const ParamVector manual =
            params - 0.1 * model.weighted_grad(params, batch,
                                               SampleWeights::Constant(batch.size(), 1.0 / batch.size()));
        CHECK((stepped - manual).cwiseAbs().maxCoeff() < 1e-15);
    }

    TEST_CASE("zero mask freezes the parameters") {
        const Model model(small_mlp(2, 3, {6}));
        Rng rng(26);
        ParamVector params = model.init_params(rng);
        const Batch batch = blob_batch(3, 10, 27);
        const ParamVector stepped =
            fast_step(model, params, batch, Eigen::VectorXd::Zero(batch.size()),
                      SaliencyMask::Zero(model.param_count()), 0.5, TaskKind::Learn);
        CHECK((stepped - params).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("coefficients act as detached constants in the step") {
        const Model model(small_mlp(2, 3, {5}));
        Rng rng(28);
        ParamVector params = model.init_params(rng);
        const Batch batch = blob_batch(3, 6, 29);
        CoefficientSchedule sched;
        sched.lambda_learn = 1.4;
        const Eigen::VectorXd losses = model.per_sample_loss(params, batch);
        const Eigen::VectorXd coeffs = adaptive_coeffs_learn(losses, 3, 10, sched);
        const SaliencyMask mask = SaliencyMask::Ones(model.param_count());
        const ParamVector stepped = fast_step(model, params, batch, coeffs, mask, 0.2, TaskKind::Learn);

        // Hand-weighted gradient: per-sample gradients scaled by the fixed
        // coefficient values, no dependence of the weights on theta.
        ParamVector hand = ParamVector::Zero(model.param_count());
        for (int i = 0; i < batch.size(); ++i) {
            Batch one;
            one.features = batch.features.row(i);
            one.labels = batch.labels.segment(i, 1);
            hand += (1.0 - coeffs[i]) / batch.size() *
                    model.weighted_grad(params, one, SampleWeights::Ones(1));
        }
        CHECK((stepped - (params - 0.2 * hand)).cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("unlearn step raises the loss on a converged model") {
        const Model model(small_mlp(2, 3, {8}));
        const Batch batch = blob_batch(3, 30, 31);
        const ParamVector params = train_to_convergence(model, batch, 400, 0.5, 32);
        const double before = model.mean_loss(params, batch);
        const Eigen::VectorXd coeffs = Eigen::VectorXd::Ones(batch.size());
        const SaliencyMask mask = SaliencyMask::Ones(model.param_count());
        const ParamVector stepped = fast_step(model, params, batch, coeffs, mask, 0.05, TaskKind::Unlearn);
        CHECK(model.mean_loss(stepped, batch) > before);
    }

    TEST_CASE("inner_finetune with zero steps or an empty buffer is the identity") {
        const Model model(small_mlp(2, 3, {4}));
        Rng rng(33);
        const ParamVector params = model.init_params(rng);
        ReservoirBuffer empty(4, Rng(34));
        CHECK((inner_finetune(model, params, empty, 0.1, 5, 8) - params).cwiseAbs().maxCoeff() == 0.0);
        ReservoirBuffer buf(4, Rng(35));
        Batch one = blob_batch(3, 1, 36);
        buf.observe_batch(one);
        CHECK((inner_finetune(model, params, buf, 0.1, 0, 8) - params).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("inner_finetune matches the quadratic closed form for one step") {
        Eigen::MatrixXd h(2, 2);
        h << 3.0, 0.5, 0.5, 1.0;
        Eigen::VectorXd minimum(2);
        minimum << 1.0, -1.0;
        const Model quad = Model::quadratic({h, minimum, Eigen::VectorXd::Zero(2)});
        ReservoirBuffer buf(1, Rng(37));
        Batch dummy;
        dummy.features = Eigen::MatrixXd::Zero(1, 1);
        dummy.labels = Eigen::VectorXi::Zero(1);
        dummy.ids = {0};
        buf.observe_batch(dummy);
        ParamVector theta_q(2);
        theta_q << 2.0, 0.5;
        const double beta_r = 0.05;
        const ParamVector theta_r = inner_finetune(quad, theta_q, buf, beta_r, 1, 1);
        const ParamVector expect = theta_q - beta_r * (h * (theta_q - minimum));
        CHECK((theta_r - expect).cwiseAbs().maxCoeff() < 1e-15);
    }

    TEST_CASE("inner_finetune reduces the buffer loss on average") {
        const Model model(small_mlp(2, 3, {8}));
        double mean_delta = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            ReservoirBuffer buf(96, Rng(100 + seed));
            buf.observe_batch(blob_batch(3, 32, 200 + seed));
            Rng rng(300 + seed);
            const ParamVector params = model.init_params(rng);
            const Batch contents = buf.contents();
            const double before = model.mean_loss(params, contents);
            const ParamVector after = inner_finetune(model, params, buf, 0.05, 10, 32);
            mean_delta += model.mean_loss(after, contents) - before;
        }
        CHECK(mean_delta / 10.0 < 0.0);
    }

    TEST_CASE("slow_step interpolates") {
        ParamVector a(2), b(2);
        a << 0.0, 0.0;
        b << 2.0, -2.0;
        CHECK((slow_step(a, b, 1.0) - b).cwiseAbs().maxCoeff() == 0.0);
        CHECK((slow_step(a, b, 0.0) - a).cwiseAbs().maxCoeff() == 0.0);
        const ParamVector mid = slow_step(a, b, 0.5);
        CHECK(mid[0] == doctest::Approx(1.0));
        CHECK(mid[1] == doctest::Approx(-1.0));
        CHECK_THROWS_AS(slow_step(a, ParamVector::Zero(3), 0.5), ShapeError);
    }

    TEST_CASE("degenerate run_task collapses to one SGD step") {
        const Model model(small_mlp(2, 3, {6}));
        Rng init(38);
        const ParamVector params = model.init_params(init);
        TaskMaterial task;
        task.request.kind = TaskKind::Learn;
        task.request.classes = {0, 1, 2};
        task.train = blob_batch(3, 8, 39);

        FastSlowConfig fs;
        fs.alpha = 1.0;
        fs.beta_learn = 0.1;
        fs.k_inner = 0;
        fs.k_outer = 1;
        SaliencyConfig sal;
        sal.gamma = 1e-300;  // full mask
        CoefficientSchedule sched;

        ReservoirBuffer buf(64, Rng(40));
        Rng rng(41);
        const TaskRunResult res = run_task(model, params, task, buf, fs, sched, sal, rng);
        const ParamVector manual =
            params - 0.1 * model.weighted_grad(
                              params, task.train,
                              SampleWeights::Constant(task.train.size(), 1.0 / task.train.size()));
        CHECK((res.params - manual).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(res.warnings.size() == 1);  // empty buffer warning
    }

    TEST_CASE("trace has one entry per outer iteration with monotone k") {
        const Model model(small_mlp(2, 3, {6}));
        Rng init(42);
        const ParamVector params = model.init_params(init);
        TaskMaterial task;
        task.request.kind = TaskKind::Learn;
        task.request.classes = {0, 1, 2};
        task.train = blob_batch(3, 8, 43);
        FastSlowConfig fs;
        fs.k_outer = 7;
        fs.k_inner = 1;
        ReservoirBuffer buf(64, Rng(44));
        Batch replay = blob_batch(3, 4, 45);
        for (auto& id : replay.ids) id += 10000;  // keep ids disjoint from the task batch
        buf.observe_batch(replay);
        Rng rng(46);
        const TaskRunResult res = run_task(model, params, task, buf, fs, {}, {}, rng);
        REQUIRE(res.trace.size() == 7);
        for (int k = 0; k < 7; ++k) CHECK(res.trace[static_cast<std::size_t>(k)].k == k + 1);
    }

    TEST_CASE("run_task learn updates the buffer, unlearn does not") {
        const Model model(small_mlp(2, 3, {6}));
        Rng init(47);
        const ParamVector params = model.init_params(init);
        TaskMaterial learn;
        learn.request.kind = TaskKind::Learn;
        learn.request.classes = {0, 1, 2};
        learn.train = blob_batch(3, 8, 48);
        FastSlowConfig fs;
        fs.k_outer = 2;
        ReservoirBuffer buf(64, Rng(49));
        Rng rng(50);
        const TaskRunResult res = run_task(model, params, learn, buf, fs, {}, {}, rng);
        CHECK(buf.size() == static_cast<std::size_t>(learn.train.size()));

        TaskMaterial unlearn;
        unlearn.request.kind = TaskKind::Unlearn;
        unlearn.request.classes = {0};
        unlearn.train = blob_batch(3, 4, 51);
        Rng rng2(52);
        run_task(model, res.params, unlearn, buf, fs, {}, {}, rng2);
        CHECK(buf.size() == static_cast<std::size_t>(learn.train.size()));
    }

    TEST_CASE("desk-scale class unlearning drives the class to chance") {
        const Model model(small_mlp(2, 3, {16}));
        const Batch all = blob_batch(3, 40, 53);
        ReservoirBuffer buf(200, Rng(54));

        TaskMaterial learn;
        learn.request.kind = TaskKind::Learn;
        learn.request.classes = {0, 1, 2};
        learn.train = all;

        FastSlowConfig fs;
        fs.alpha = 0.7;
        fs.beta_learn = 0.4;
        fs.beta_unlearn = 2.0;
        fs.beta_remain = 0.3;
        fs.k_outer = 120;
        fs.k_inner = 2;
        fs.remain_batch = 32;

        Rng init(55);
        ParamVector params = model.init_params(init);
        Rng rng(56);
        params = run_task(model, params, learn, buf, fs, {}, {}, rng).params;
        REQUIRE(model.accuracy(params, all) > 0.9);

        // Capture the unlearn payload, erase it from the buffer, run the task.
        Batch forget;
        {
            std::vector<int> rows;
            for (int i = 0; i < all.size(); ++i)
                if (all.labels[i] == 0) rows.push_back(i);
            forget.features.resize(static_cast<Eigen::Index>(rows.size()), 2);
            forget.labels.resize(static_cast<Eigen::Index>(rows.size()));
            for (std::size_t i = 0; i < rows.size(); ++i) {
                forget.features.row(static_cast<Eigen::Index>(i)) = all.features.row(rows[i]);
                forget.labels[static_cast<Eigen::Index>(i)] = 0;
            }
        }
        buf.erase_classes({0});
        TaskMaterial unlearn;
        unlearn.request.kind = TaskKind::Unlearn;
        unlearn.request.classes = {0};
        unlearn.train = forget;
        fs.k_outer = 100;
        Rng rng2(57);
        params = run_task(model, params, unlearn, buf, fs, {}, {}, rng2).params;
        CHECK(model.accuracy(params, forget) <= 1.0 / 3.0 + 0.05);
    }
}
