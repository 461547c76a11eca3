#include "doctest.h"

#include "../support/oracles.hpp"
#include "cellflow/dynamics/integrate.hpp"
#include "cellflow/error.hpp"
#include "cellflow/training/losses.hpp"
#include "cellflow/training/train.hpp"
#include "cellflow/transport/emd.hpp"

#include <cmath>
#include <numbers>

using namespace cellflow;
using namespace cellflow::training;
using dynamics::DynamicsConfig;
using dynamics::DynamicsModel;

namespace {

Matrix blob(Index n, double cx, double cy, double spread, Rng& r) {
    Matrix m(n, 2);
    for (Index i = 0; i < n; ++i) {
        m(i, 0) = cx + spread * r.normal();
        m(i, 1) = cy + spread * r.normal();
    }
    return m;
}

std::vector<Matrix> arc(Index n, Index timepoints, Rng& r) {
    std::vector<Matrix> z;
    for (Index t = 0; t < timepoints; ++t) {
        const double a = std::numbers::pi * static_cast<double>(t) / static_cast<double>(timepoints - 1);
        z.push_back(blob(n, 2.0 * std::cos(a), 2.0 * std::sin(a), 0.15, r));
    }
    return z;
}

std::vector<double> iota_times(std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i);
    return t;
}

DynamicsModel small_model(std::uint64_t seed, dynamics::SolverMode mode = dynamics::SolverMode::Ode) {
    DynamicsConfig c;
    c.hidden = {16, 16};
    c.seed = seed;
    c.mode = mode;
    return make_dynamics_model(c);
}

double mean_w2(const DynamicsModel& m, const std::vector<Matrix>& z, const std::vector<double>& times) {
    double total = 0;
    for (std::size_t t = 0; t + 1 < z.size(); ++t) {
        const auto b = dynamics::integrate(m, z[t], times[t], times[t + 1], segment_steps(times[t], times[t + 1], 10));
        total += std::sqrt(transport::emd(transport::DiscreteMeasure::uniform(b.states.back()),
                                          transport::DiscreteMeasure::uniform(z[t + 1]))
                               .cost);
    }
    return total / static_cast<double>(z.size() - 1);
}

}  // namespace

TEST_SUITE("energy") {
    TEST_CASE("zero and constant fields") {
        Vector c(2);
        c << 0.6, -0.8;
        DynamicsModel m = small_model(1);
        m.drift.parameters().setZero();
        const Matrix z0 = Matrix::Zero(5, 2);
        CHECK(energy_loss(dynamics::integrate(m, z0, 0, 1, 10)) == 0.0);
        m.drift.bias(m.drift.layer_count() - 1) = c;
        CHECK(energy_loss(dynamics::integrate(m, z0, 0, 1, 10)) == doctest::Approx(c.squaredNorm()));
    }

    TEST_CASE("refinement changes a smooth field's energy by under 2%") {
        Rng r(2);
        DynamicsModel m = small_model(2);
        const Matrix z0 = oracle::random_matrix(20, 2, r);
        const double coarse = energy_loss(dynamics::integrate(m, z0, 0, 1, 20));
        const double fine = energy_loss(dynamics::integrate(m, z0, 0, 1, 40));
        CHECK(std::fabs(coarse - fine) < 0.02 * fine);
    }
}

TEST_SUITE("density") {
    TEST_CASE("points on the data cost nothing") {
        Rng r(3);
        const Matrix data = oracle::random_matrix(10, 2, r);
        CHECK(density_loss(data.topRows(4), data, 1, 0.0).value == 0.0);
    }

    TEST_CASE("hinge") {
        Matrix data(2, 1), pred(1, 1);
        data << 0, 10;
        pred << 0.75;
        CHECK(density_loss(pred, data, 1, 0.5).value == doctest::Approx(0.25));
    }

    TEST_CASE("k = 3 on a line matches enumeration") {
        Matrix data(5, 1);
        data << 0, 1, 2, 3, 4;
        Matrix pred(2, 1);
        pred << 1.2, 3.9;
        const double margin = 0.3;
        double expect = 0;
        for (Index i = 0; i < 2; ++i) {
            std::vector<double> d;
            for (Index j = 0; j < 5; ++j) d.push_back(std::fabs(pred(i, 0) - data(j, 0)));
            std::sort(d.begin(), d.end());
            for (int k = 0; k < 3; ++k) expect += std::max(0.0, d[k] - margin);
        }
        CHECK(density_loss(pred, data, 3, margin).value == doctest::Approx(expect / 2).epsilon(1e-12));
    }

    TEST_CASE("gradient matches central differences") {
        Rng r(4);
        const Matrix data = oracle::random_matrix(30, 2, r);
        const Matrix pred = oracle::random_matrix(6, 2, r);
        const auto l = density_loss(pred, data, 4, 0.1);
        Vector flat = Eigen::Map<const Vector>(pred.data(), pred.size());
        auto f = [&](const Vector& p) { return density_loss(Eigen::Map<const Matrix>(p.data(), 6, 2), data, 4, 0.1).value; };
        CHECK(oracle::rel_error(Eigen::Map<const Vector>(l.grad.data(), l.grad.size()), oracle::fd_gradient(f, flat, 1e-6)) < 1e-5);
    }

    TEST_CASE("errors") {
        CHECK_THROWS_AS(density_loss(Matrix::Zero(1, 2), Matrix::Zero(0, 2), 1, 0.1), Error);
        CHECK_THROWS_AS(density_loss(Matrix::Zero(1, 2), Matrix::Zero(2, 2), 3, 0.1), Error);
    }
}

TEST_SUITE("marginal") {
    TEST_CASE("matching measures") {
        Rng r(5);
        const Matrix z = oracle::random_matrix(8, 2, r);
        CHECK(marginal_loss(z, Vector::Ones(8), z).value == doctest::Approx(0.0));
    }

    TEST_CASE("mass on the matching point lowers the loss") {
        Matrix pred(2, 1), target(1, 1);
        pred << 0, 3;
        target << 0;
        Vector m(2);
        m << 1, 1;
        const auto base = marginal_loss(pred, m, target);
        Vector heavier = m;
        heavier(0) += 0.2;
        CHECK(marginal_loss(pred, heavier, target).value < base.value);
        CHECK(base.grad_masses(0) < 0.0);
        auto f = [&](const Vector& w) { return marginal_loss(pred, w, target).value; };
        CHECK(oracle::rel_error(base.grad_masses, oracle::fd_gradient(f, m, 1e-6)) < 1e-6);
    }

    TEST_CASE("scaling all masses changes nothing") {
        Rng r(6);
        const Matrix pred = oracle::random_matrix(7, 2, r), target = oracle::random_matrix(9, 2, r);
        Vector m = Vector::NullaryExpr(7, [&](Index) { return 0.5 + r.uniform(); });
        CHECK(marginal_loss(pred, 10.0 * m, target).value == doctest::Approx(marginal_loss(pred, m, target).value).epsilon(1e-12));
    }

    TEST_CASE("mass gradient matches central differences") {
        Rng r(7);
        for (int trial = 0; trial < 10; ++trial) {
            const Matrix pred = oracle::random_matrix(5, 2, r), target = oracle::random_matrix(6, 2, r);
            Vector m = Vector::NullaryExpr(5, [&](Index) { return 0.5 + r.uniform(); });
            const auto l = marginal_loss(pred, m, target);
            auto f = [&](const Vector& w) { return marginal_loss(pred, w, target).value; };
            CHECK(oracle::rel_error(l.grad_masses, oracle::fd_gradient(f, m, 1e-7)) < 1e-4);
        }
    }

    TEST_CASE("losses ignore the order of cells") {
        Rng r(8);
        const Matrix pred = oracle::random_matrix(10, 2, r), target = oracle::random_matrix(10, 2, r);
        const Vector m = Vector::NullaryExpr(10, [&](Index) { return 0.5 + r.uniform(); });
        const auto perm = r.permutation(10);
        Matrix pp(10, 2);
        Vector mp(10);
        for (Index i = 0; i < 10; ++i) {
            pp.row(i) = pred.row(perm[i]);
            mp(i) = m(perm[i]);
        }
        CHECK(marginal_loss(pp, mp, target).value == doctest::Approx(marginal_loss(pred, m, target).value).epsilon(1e-12));
        CHECK(density_loss(pp, target, 3, 0.1).value == doctest::Approx(density_loss(pred, target, 3, 0.1).value).epsilon(1e-12));
    }
}

TEST_SUITE("growth warm start") {
    TEST_CASE("identical snapshots give unit targets") {
        Rng r(10);
        const Matrix a = blob(60, 0, 0, 1.0, r);
        const std::vector<Matrix> z{a, a};
        const auto targets = growth_targets(z, UotParams{});
        // entropic blur moves single targets by ~10%, the total stays put
        CHECK(targets.masses[0].mean() == doctest::Approx(1.0).epsilon(0.01));
        CHECK((targets.masses[0].array() - 1.0).abs().maxCoeff() < 0.2);
        DynamicsModel m = small_model(3);
        const auto [before, after] = fit_growth(m, z, {0.0, 1.0}, targets, 200, 5e-3);
        CHECK(after <= before);
        CHECK(dynamics::eval_growth_batch(m, a, 0.0).mean() == doctest::Approx(1.0).epsilon(0.05));
    }

    TEST_CASE("a growing region gets larger targets, a dying one smaller") {
        Rng r(11);
        // region A at x = -2, B at x = +2; A doubles its share
        const Matrix t0 = vstack({blob(50, -2, 0, 0.3, r), blob(50, 2, 0, 0.3, r)});
        const Matrix t1 = vstack({blob(67, -2, 0.5, 0.3, r), blob(33, 2, 0.5, 0.3, r)});
        const auto targets = growth_targets({t0, t1}, UotParams{});
        const double a = targets.masses[0].head(50).mean(), b = targets.masses[0].tail(50).mean();
        CHECK(a > b);
        CHECK(b < 1.0);
        CHECK(a > 1.0);
    }

    TEST_CASE("fit never ends worse than it started") {
        Rng r(12);
        const std::vector<Matrix> z{blob(40, 0, 0, 1, r), blob(40, 1, 0, 1, r), blob(40, 2, 0, 1, r)};
        const auto targets = growth_targets(z, UotParams{});
        DynamicsModel m = small_model(4);
        const auto [before, after] = fit_growth(m, z, iota_times(3), targets, 100, 5e-3);
        CHECK(after <= before);
    }
}

TEST_SUITE("objective") {
    TEST_CASE("gradient matches central differences in both modes") {
        Rng r(20);
        const auto z = arc(6, 3, r);
        const auto times = iota_times(3);
        for (auto mode : {TrainMode::Local, TrainMode::Global})
            for (bool growth : {false, true})
                for (auto solver : {dynamics::SolverMode::Ode, dynamics::SolverMode::Sde}) {
                    DynamicsModel m = small_model(5, solver);
                    TrainConfig cfg;
                    cfg.mode = mode;
                    cfg.growth_enabled = growth;
                    cfg.steps_per_unit = 4;
                    cfg.k_density = 2;
                    cfg.lambda_e = 0.1;
                    const auto g = objective(m, z, z, times, cfg, 0.05, 99);
                    auto probe = [&](Mlp& net, const Vector& analytic) {
                        std::vector<double> an, fd;
                        for (int s = 0; s < 15; ++s) {
                            const Index i = static_cast<Index>(r.below(static_cast<std::uint64_t>(net.parameter_count())));
                            const double keep = net.parameters()(i);
                            net.parameters()(i) = keep + 1e-6;
                            const double fp = objective(m, z, z, times, cfg, 0.05, 99).loss.total;
                            net.parameters()(i) = keep - 1e-6;
                            const double fm = objective(m, z, z, times, cfg, 0.05, 99).loss.total;
                            net.parameters()(i) = keep;
                            an.push_back(analytic(i));
                            fd.push_back((fp - fm) / 2e-6);
                        }
                        return oracle::rel_error(Eigen::Map<Vector>(an.data(), 15), Eigen::Map<Vector>(fd.data(), 15));
                    };
                    CHECK(probe(m.drift, g.drift) < 1e-3);
                    if (solver == dynamics::SolverMode::Sde) CHECK(probe(m.diffusion, g.diffusion) < 1e-3);
                    if (growth) CHECK(probe(m.growth, g.growth) < 1e-3);
                }
    }

    TEST_CASE("global predictions only depend on earlier batches") {
        Rng r(21);
        auto z = arc(8, 3, r);
        TrainConfig cfg;
        cfg.mode = TrainMode::Global;
        const DynamicsModel m = small_model(6);
        const auto a = objective(m, z, z, iota_times(3), cfg, 0.05, 1);
        z[2].array() += 1.0;
        const auto b = objective(m, z, z, iota_times(3), cfg, 0.05, 1);
        CHECK(a.loss.segment_marginal[0] == b.loss.segment_marginal[0]);
        CHECK(a.loss.segment_marginal[1] != b.loss.segment_marginal[1]);
    }
}

TEST_SUITE("train") {
    TEST_CASE("two timepoints: local and global agree exactly") {
        Rng r(30);
        const auto z = arc(30, 2, r);
        TrainConfig cfg;
        cfg.iterations = 5;
        cfg.batch_size = 16;
        cfg.growth_enabled = true;
        cfg.pretrain_epochs = 20;
        const auto a = train(small_model(7), z, iota_times(2), cfg);
        cfg.mode = TrainMode::Global;
        const auto b = train(small_model(7), z, iota_times(2), cfg);
        for (std::size_t i = 0; i < 5; ++i) CHECK(a.history[i].total == b.history[i].total);
        CHECK(a.model.drift.parameters() == b.model.drift.parameters());
    }

    TEST_CASE("fixed seed reproduces the loss history") {
        Rng r(31);
        const auto z = arc(30, 3, r);
        TrainConfig cfg;
        cfg.iterations = 10;
        cfg.batch_size = 20;
        const auto a = train(small_model(8, dynamics::SolverMode::Sde), z, iota_times(3), cfg);
        const auto b = train(small_model(8, dynamics::SolverMode::Sde), z, iota_times(3), cfg);
        for (std::size_t i = 0; i < 10; ++i) CHECK(a.history[i].total == b.history[i].total);
    }

    TEST_CASE("arc: trained predictions halve the transport error") {
        Rng r(32);
        const auto z = arc(100, 3, r);
        const auto times = iota_times(3);
        TrainConfig cfg;
        cfg.iterations = 300;
        cfg.batch_size = 64;
        cfg.lr = 5e-3;
        cfg.seed = 4;
        const DynamicsModel init = small_model(9);
        const double before = mean_w2(init, z, times);
        const auto res = train(init, z, times, cfg);
        const double after = mean_w2(res.model, z, times);
        CHECK(after < 0.5 * before);
        auto smooth = [&](std::size_t from) {
            double s = 0;
            for (std::size_t i = from; i < from + 20; ++i) s += res.history[i].total;
            return s / 20;
        };
        CHECK(smooth(res.history.size() - 20) <= 0.8 * smooth(0));
    }

    TEST_CASE("invalid inputs") {
        Rng r(33);
        const auto z = arc(10, 2, r);
        TrainConfig cfg;
        CHECK_THROWS_AS(train(small_model(1), {z[0]}, {0.0}, cfg), Error);
        CHECK_THROWS_AS(train(small_model(1), z, {1.0, 0.0}, cfg), Error);
        cfg.lambda_m = cfg.lambda_e = cfg.lambda_d = 0;
        CHECK_THROWS_AS(train(small_model(1), z, iota_times(2), cfg), Error);
        TrainConfig ok;
        DynamicsConfig three;
        three.latent_dim = 3;
        CHECK_THROWS_AS(train(make_dynamics_model(three), z, iota_times(2), ok), Error);
    }
}
