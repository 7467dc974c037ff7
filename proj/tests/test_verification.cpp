#include <doctest.h>

#include <cmath>

#include "clu/errors.hpp"
#include "clu/verify.hpp"

using namespace clu;

TEST_SUITE("verification") {
    TEST_CASE("partition weights must sit on the simplex") {
        CHECK_THROWS_AS((PartitionWeights{0.5, 0.5, 0.5}.validate()), ValidationError);
        CHECK_THROWS_AS((PartitionWeights{-0.1, 0.6, 0.5}.validate()), ValidationError);
        PartitionWeights ok{0.2, 0.3, 0.5};
        ok.validate();
    }

    TEST_CASE("stationary point construction solves the weighted problem") {
        Rng rng(1);
        const QuadraticInstance inst = shared_center_instance(5, rng);
        EpsilonPath eps;
        eps.eps_learn = Eigen::VectorXd::Constant(1, 0.4);
        eps.eps_unlearn = Eigen::VectorXd::Constant(1, 0.6);
        const Eigen::VectorXd theta = inst.theta_for(eps);
        const Eigen::VectorXd grad = inst.gradient_uniform(Part::Remain, theta) +
                                     inst.gradient(Part::Learn, theta, eps.eps_learn) +
                                     inst.gradient(Part::Unlearn, theta, eps.eps_unlearn);
        CHECK(grad.norm() < 1e-9);
    }

    TEST_CASE("with no task shares the direction is the remaining gradient") {
        Rng rng(2);
        const QuadraticInstance inst = shared_center_instance(4, rng);
        EpsilonPath eps;
        eps.eps_learn = Eigen::VectorXd::Constant(1, 0.5);
        eps.eps_unlearn = Eigen::VectorXd::Constant(1, 0.5);
        const Eigen::VectorXd theta_k = inst.theta_for(eps);
        const PartitionWeights w{1.0, 0.0, 0.0};
        const Eigen::VectorXd dir = vanilla_direction(inst, theta_k, eps, w, 0.3);
        const Eigen::VectorXd expect = -0.3 * inst.gradient_uniform(Part::Remain, theta_k);
        CHECK((dir - expect).cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("at the target with boundary epsilons the direction vanishes") {
        Rng rng(3);
        const QuadraticInstance inst = shared_center_instance(5, rng);
        EpsilonPath eps;
        eps.eps_learn = Eigen::VectorXd::Ones(1);
        eps.eps_unlearn = Eigen::VectorXd::Zero(1);
        const Eigen::VectorXd theta_star = inst.theta_star();
        const PartitionWeights w{0.5, 0.3, 0.2};
        const Eigen::VectorXd dir = vanilla_direction(inst, theta_star, eps, w, 1.0);
        CHECK(dir.norm() < 1e-10);
    }

    TEST_CASE("vanilla direction matches the brute-force descent oracle") {
        Rng rng(4);
        const QuadraticInstance inst = shared_center_instance(5, rng);
        EpsilonPath eps;
        eps.eps_learn = Eigen::VectorXd::Constant(1, 0.35);
        eps.eps_unlearn = Eigen::VectorXd::Constant(1, 0.65);
        const PartitionWeights w{0.5, 0.3, 0.2};
        const Eigen::VectorXd theta_k = inst.theta_for(eps);
        const Eigen::VectorXd theta_star = inst.theta_star();
        const double alpha = 1e-4;
        const Eigen::VectorXd dir = vanilla_direction(inst, theta_k, eps, w, alpha);

        const Eigen::MatrixXd h_r = inst.hessian_uniform(Part::Remain);
        const Eigen::MatrixXd h_l = inst.hessian_uniform(Part::Learn);
        const Eigen::MatrixXd h_u = inst.hessian_uniform(Part::Unlearn);
        auto objective = [&](const Eigen::VectorXd& theta) {
            const Eigen::VectorXd d = theta - theta_star;
            return 0.5 * (w.p_remain * d.dot(h_r * d) + w.p_learn * d.dot(h_l * d) +
                          w.p_unlearn * d.dot(h_u * d));
        };
        Eigen::VectorXd fd(inst.dim());
        const double h = 1e-3;
        for (int j = 0; j < inst.dim(); ++j) {
            Eigen::VectorXd up = theta_k, dn = theta_k;
            up[j] += h;
            dn[j] -= h;
            fd[j] = (objective(up) - objective(dn)) / (2.0 * h);
        }
        const Eigen::VectorXd brute = -alpha * fd;
        CHECK((dir - brute).norm() / brute.norm() < 1e-3);
    }

    TEST_CASE("identity remaining curvature rescales the task component") {
        Rng rng(5);
        QuadraticInstance inst = shared_center_instance(4, rng);
        // Force identity curvature on the remaining (and shared learn) part.
        inst.remain[0].curvature = Eigen::MatrixXd::Identity(4, 4);
        inst.learn[0].curvature = Eigen::MatrixXd::Identity(4, 4);
        EpsilonPath eps;
        eps.eps_learn = Eigen::VectorXd::Constant(1, 0.3);
        eps.eps_unlearn = Eigen::VectorXd::Constant(1, 0.5);
        const Eigen::VectorXd theta_k = inst.theta_for(eps);
        const PartitionWeights w{0.6, 0.3, 0.1};
        const double alpha = 0.9;
        const Eigen::VectorXd manifold = remain_manifold_direction(inst, theta_k, eps, w, alpha);
        const Eigen::VectorXd vanilla = vanilla_direction(inst, theta_k, eps, w, alpha);
        const Eigen::VectorXd task_component =
            vanilla + alpha * w.p_remain * inst.gradient_uniform(Part::Remain, theta_k);
        CHECK((manifold - task_component / (w.p_remain + 1.0)).cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("corollary reductions are bitwise term deletions") {
        Rng rng(6);
        for (int trial = 0; trial < 3; ++trial) {
            QuadraticInstance learn_only = shared_center_instance(5, rng);
            learn_only.unlearn.clear();
            EpsilonPath eps;
            eps.eps_learn = Eigen::VectorXd::Constant(1, rng.uniform(0.1, 0.9));
            eps.eps_unlearn = Eigen::VectorXd::Zero(0);
            const PartitionWeights w{0.55, 0.45, 0.0};
            const Eigen::VectorXd theta_k = learn_only.theta_for(eps);
            const Eigen::VectorXd general = remain_manifold_direction(learn_only, theta_k, eps, w, 0.7);
            const Eigen::VectorXd direct = cl_reduction_direction(learn_only, theta_k, eps.eps_learn, w, 0.7);
            CHECK((general - direct).cwiseAbs().maxCoeff() == 0.0);

            QuadraticInstance unlearn_only = unlearn_instance(5, rng);
            EpsilonPath ueps;
            ueps.eps_learn = Eigen::VectorXd::Zero(0);
            ueps.eps_unlearn = Eigen::VectorXd::Constant(1, rng.uniform(0.1, 0.9));
            const PartitionWeights wu{0.7, 0.0, 0.3};
            const Eigen::VectorXd theta_u = unlearn_only.theta_for(ueps);
            const Eigen::VectorXd general_u = remain_manifold_direction(unlearn_only, theta_u, ueps, wu, 0.7);
            const Eigen::VectorXd direct_u =
                mu_reduction_direction(unlearn_only, theta_u, ueps.eps_unlearn, wu, 0.7);
            CHECK((general_u - direct_u).cwiseAbs().maxCoeff() == 0.0);
        }
    }

    TEST_CASE("fast-slow probe with no inner steps is the raw task step") {
        Rng rng(7);
        const Eigen::MatrixXd h = random_spd(6, 0.3, 3.0, rng);
        Eigen::VectorXd g(6);
        for (int i = 0; i < 6; ++i) g[i] = rng.normal();
        const FastSlowProbe probe = fast_slow_update_probe(h, g, 0.45, 0.05, 0);
        CHECK((probe.simulated - 0.45 * g).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((probe.closed_form - 0.45 * g).cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("isotropic curvature damps uniformly and stays colinear with the inverse-Hessian step") {
        const int dim = 4;
        const double mu = 2.0;
        const Eigen::MatrixXd h = mu * Eigen::MatrixXd::Identity(dim, dim);
        Eigen::VectorXd g(dim);
        g << 1.0, -2.0, 0.5, 3.0;
        const double beta = 0.8, beta_r = 0.1;
        const int k = 6;
        const FastSlowProbe probe = fast_slow_update_probe(h, g, beta, beta_r, k);
        const double factor = beta * std::pow(1.0 - beta_r * mu, k);
        CHECK((probe.simulated - factor * g).cwiseAbs().maxCoeff() < 1e-12);
        // Colinear with H^{-1} g = g / mu.
        const double cosine = probe.simulated.dot(probe.inverse_hessian_ref) /
                              (probe.simulated.norm() * probe.inverse_hessian_ref.norm());
        CHECK(cosine == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("hand-computed eigenvalue damping on a diagonal instance") {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
        h(0, 0) = 10.0;
        h(1, 1) = 1.0;
        Eigen::VectorXd g(2);
        g << 1.0, 1.0;
        const FastSlowProbe probe = fast_slow_update_probe(h, g, 1.0, 0.05, 10);
        // Ascending eigenvalues: 1 then 10.
        CHECK(probe.damping_factors[0] == doctest::Approx(std::pow(0.95, 10)).epsilon(1e-12));
        CHECK(probe.damping_factors[1] == doctest::Approx(std::pow(0.5, 10)).epsilon(1e-12));
        const double suppression_ratio = probe.damping_factors[0] / probe.damping_factors[1];
        CHECK(suppression_ratio > 600.0);
        CHECK(suppression_ratio < 620.0);
        CHECK(probe.warnings.empty());
    }

    TEST_CASE("divergent inner rate raises a warning") {
        Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2) * 25.0;
        Eigen::VectorXd g = Eigen::VectorXd::Ones(2);
        const FastSlowProbe probe = fast_slow_update_probe(h, g, 1.0, 0.05, 3);
        REQUIRE(probe.warnings.size() == 1);
    }

    TEST_CASE("replay delta identities") {
        Rng rng(8);
        Eigen::VectorXd gt(4), gr(4);
        for (int i = 0; i < 4; ++i) {
            gt[i] = rng.normal();
            gr[i] = rng.normal();
        }
        const ReplayDeltas zero = replay_delta_comparison(Eigen::MatrixXd::Zero(4, 4), gt, gr);
        CHECK((zero.ours - zero.replay).cwiseAbs().maxCoeff() == 0.0);

        const ReplayDeltas identity = replay_delta_comparison(Eigen::MatrixXd::Identity(4, 4), gt, gr);
        CHECK((identity.ours - gr).cwiseAbs().maxCoeff() < 1e-15);

        const Eigen::MatrixXd h = random_spd(4, 0.2, 4.0, rng);
        const ReplayDeltas rand = replay_delta_comparison(h, gt, gr);
        CHECK(rand.residual.cwiseAbs().maxCoeff() < 1e-10);
    }

    TEST_CASE("singular remaining curvature is reported with a condition number") {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
        h(0, 0) = 1.0;  // rank deficient
        CHECK_THROWS_AS(spd_solve(h, Eigen::VectorXd::Ones(3)), SingularMatrixError);
    }

    TEST_CASE("the full oracle suite passes") {
        const VerificationReport report = run_verification(7);
        for (const CheckResult& c : report.checks) {
            INFO(c.name, " residual=", c.residual, " note=", c.note);
            CHECK(c.pass);
        }
        CHECK(report.all_pass());
    }
}
