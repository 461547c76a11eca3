// Acceptance harness: one line per criterion, exit status 1 if any fails.
// `acceptance --only 3 --only 9` runs a subset.

#include "../support/oracles.hpp"
#include "cellflow/cli/commands.hpp"
#include "cellflow/dynamics/integrate.hpp"
#include "cellflow/eval/branches.hpp"
#include "cellflow/eval/loo.hpp"
#include "cellflow/eval/metrics.hpp"
#include "cellflow/geometry/diffusion.hpp"
#include "cellflow/geometry/gaga.hpp"
#include "cellflow/io/csv.hpp"
#include "cellflow/numerics/mlp.hpp"
#include "cellflow/numerics/pca.hpp"
#include "cellflow/numerics/scaler.hpp"
#include "cellflow/numerics/stats.hpp"
#include "cellflow/synthdata/datasets.hpp"
#include "cellflow/training/rollout.hpp"
#include "cellflow/training/train.hpp"
#include "cellflow/transport/emd.hpp"
#include "cellflow/transport/sinkhorn.hpp"
#include "cellflow/transport/w2_loss.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace cellflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<double> unit_times(std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i);
    return t;
}

// ---- 1 -------------------------------------------------------------------

Outcome ot_oracle() {
    Rng r(101);
    double worst_emd = 0, worst_sink = 0;
    int bad = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 1 + static_cast<Index>(r.below(6));
        const Index m = 1 + static_cast<Index>(r.below(6));
        const Vector a = oracle::random_simplex(n, r), b = oracle::random_simplex(m, r);
        const Matrix c = transport::ground_cost(oracle::random_matrix(n, 2, r), oracle::random_matrix(m, 2, r), 2);
        const double exact = transport::emd_with_cost(a, b, c).cost;
        const double lp = oracle::TransportVertexEnumerator(a, b, c).solve();
        const double sink = transport::sinkhorn_with_cost(a, b, c, 1e-3 * c.mean(), 200000, 1e-10).cost;
        const double e1 = std::fabs(exact - lp);
        const double e2 = std::fabs(sink - exact) / std::max(exact, 1e-12);
        worst_emd = std::max(worst_emd, e1);
        worst_sink = std::max(worst_sink, e2);
        if (!(e1 <= 1e-8) || !(e2 <= 0.01)) ++bad;
    }
    return {bad == 0, fmt("50 instances, max |emd - LP| %.2e, max sinkhorn rel gap %.2e", worst_emd, worst_sink)};
}

// ---- 2 -------------------------------------------------------------------

double mlp_config(Rng& r, int trial) {
    const Activation acts[] = {Activation::Tanh, Activation::Softplus, Activation::Identity};
    const Index in = 1 + static_cast<Index>(r.below(4));
    const Index hid = 2 + static_cast<Index>(r.below(6));
    const Index out = 1 + static_cast<Index>(r.below(3));
    Mlp m = Mlp::glorot({in, hid, hid, out}, acts[trial % 2], acts[(trial / 2) % 3], r);
    const Vector x = Vector::NullaryExpr(in, [&](Index) { return r.uniform(-1.5, 1.5); });
    const Vector up = Vector::NullaryExpr(out, [&](Index) { return r.uniform(-1, 1); });
    const auto g = mlp_grad(m, x, up);
    auto fp = [&](const Vector& p) {
        Mlp c = m;
        c.set_parameters(p);
        return up.dot(c.forward(x));
    };
    auto fx = [&](const Vector& v) { return up.dot(m.forward(v)); };
    return std::max(oracle::rel_error(g.params, oracle::fd_gradient(fp, m.parameters())),
                    oracle::rel_error(g.input, oracle::fd_gradient(fx, x)));
}

double w2_config(Rng& r) {
    const Index n = 3 + static_cast<Index>(r.below(5)), m = 3 + static_cast<Index>(r.below(5));
    const transport::DiscreteMeasure pred{oracle::random_matrix(n, 2, r), oracle::random_simplex(n, r)};
    const transport::DiscreteMeasure target{oracle::random_matrix(m, 2, r), oracle::random_simplex(m, r)};
    const auto l = transport::w2_loss(pred, target);

    const Vector flat = Eigen::Map<const Vector>(pred.support.data(), pred.support.size());
    auto fpts = [&](const Vector& p) {
        auto q = pred;
        q.support = Eigen::Map<const Matrix>(p.data(), n, 2);
        return transport::emd(q, target).cost;
    };
    const Vector an_pts = Eigen::Map<const Vector>(l.grad_points.data(), l.grad_points.size());
    const double e_pts = oracle::rel_error(an_pts, oracle::fd_gradient(fpts, flat, 1e-6));

    // weights only move along the simplex, so differentiate along zero-sum directions
    std::vector<double> an, fd;
    for (int k = 0; k < 4; ++k) {
        Vector dir = Vector::NullaryExpr(n, [&](Index) { return r.uniform(-1, 1); });
        dir.array() -= dir.mean();
        const double h = 1e-7;
        auto at = [&](double s) {
            auto q = pred;
            q.weights += s * dir;
            return transport::emd(q, target).cost;
        };
        an.push_back(l.grad_weights.dot(dir));
        fd.push_back((at(h) - at(-h)) / (2 * h));
    }
    const double e_w = oracle::rel_error(Eigen::Map<Vector>(an.data(), 4), Eigen::Map<Vector>(fd.data(), 4));
    return std::max(e_pts, e_w);
}

double rollout_config(Rng& r, dynamics::SolverMode mode, dynamics::OdeScheme scheme, double beta) {
    using namespace dynamics;
    DynamicsConfig cfg;
    cfg.hidden = {6, 5};
    cfg.beta = beta;
    cfg.gamma = 0.85;
    cfg.mode = mode;
    cfg.scheme = scheme;
    cfg.diffusion_init = 0.3;
    cfg.seed = r.next_u64();
    DynamicsModel m = make_dynamics_model(cfg);
    for (Index i = 0; i < m.drift.parameter_count(); ++i) m.drift.parameters()(i) += 0.3 * r.uniform(-1, 1);
    for (Index i = 0; i < m.diffusion.parameter_count(); ++i) m.diffusion.parameters()(i) += 0.3 * r.uniform(-1, 1);

    const Index n = 3, steps = 6;
    const std::uint64_t noise = r.next_u64();
    const Matrix z0 = oracle::random_matrix(n, 2, r);
    std::vector<Matrix> su, du;
    for (Index k = 0; k <= steps; ++k) su.push_back(oracle::random_matrix(n, 2, r));
    for (Index k = 0; k < steps; ++k) du.push_back(oracle::random_matrix(n, 2, r));
    auto objective = [&](const DynamicsModel& mm, const Matrix& z) {
        const auto b = integrate(mm, z, 0.0, 1.0, steps, noise);
        double s = 0;
        for (Index k = 0; k <= steps; ++k) s += su[k].cwiseProduct(b.states[k]).sum();
        for (Index k = 0; k < steps; ++k) s += du[k].cwiseProduct(b.drift_evals[k]).sum();
        return s;
    };
    const auto g = backprop_integrate(m, integrate(m, z0, 0.0, 1.0, steps, noise), su, &du);

    std::vector<double> an, fd;
    const double h = 1e-5;
    auto probe = [&](Mlp& net, const Vector& grad) {
        for (int s = 0; s < 12; ++s) {
            const Index i = static_cast<Index>(r.below(static_cast<std::uint64_t>(net.parameter_count())));
            double& slot = net.parameters()(i);
            const double keep = slot;
            slot = keep + h;
            const double fp = objective(m, z0);
            slot = keep - h;
            const double fm = objective(m, z0);
            slot = keep;
            an.push_back(grad(i));
            fd.push_back((fp - fm) / (2 * h));
        }
    };
    probe(m.drift, g.drift);
    if (mode == SolverMode::Sde) probe(m.diffusion, g.diffusion);
    Matrix z = z0;
    for (Index i = 0; i < z.size(); ++i) {
        const double keep = z.data()[i];
        z.data()[i] = keep + h;
        const double fp = objective(m, z);
        z.data()[i] = keep - h;
        const double fm = objective(m, z);
        z.data()[i] = keep;
        an.push_back(g.z0.data()[i]);
        fd.push_back((fp - fm) / (2 * h));
    }
    const auto k = static_cast<Index>(an.size());
    return oracle::rel_error(Eigen::Map<Vector>(an.data(), k), Eigen::Map<Vector>(fd.data(), k));
}

Outcome gradient_suite() {
    using dynamics::OdeScheme;
    using dynamics::SolverMode;
    Rng r(202);
    std::map<std::string, double> worst;
    int configs = 0, bad = 0;
    auto record = [&](const std::string& family, double err) {
        worst[family] = std::max(worst[family], err);
        ++configs;
        if (!(err < 1e-3)) ++bad;
    };
    for (int t = 0; t < 40; ++t) record("mlp", mlp_config(r, t));
    for (int t = 0; t < 30; ++t) record("w2", w2_config(r));
    for (int t = 0; t < 20; ++t) {
        const OdeScheme scheme = t % 2 ? OdeScheme::Rk4 : OdeScheme::Euler;
        record("ode", rollout_config(r, SolverMode::Ode, scheme, t % 4 < 2 ? 0.0 : 0.6));
    }
    for (int t = 0; t < 15; ++t) record("sde", rollout_config(r, SolverMode::Sde, OdeScheme::Euler, t % 3 ? 0.0 : 0.5));
    return {bad == 0 && configs >= 100,
            fmt("%d configurations, max rel error mlp %.1e, w2 %.1e, ode %.1e, sde %.1e", configs, worst["mlp"],
                worst["w2"], worst["ode"], worst["sde"])};
}

// ---- 3 -------------------------------------------------------------------

double mean_w2(const dynamics::DynamicsModel& m, const std::vector<Matrix>& z, const std::vector<double>& times) {
    const auto ro = training::rollout(m, z[0], times, 10, false, 0);
    double s = 0;
    for (std::size_t t = 1; t < z.size(); ++t)
        s += std::sqrt(transport::emd(transport::DiscreteMeasure::uniform(ro.at(t)),
                                      transport::DiscreteMeasure::uniform(z[t]), 2)
                           .cost);
    return s / static_cast<double>(z.size() - 1);
}

Outcome relaxation() {
    const auto z = synthdata::snapshots(synthdata::toy_set(synthdata::ToyKind::Arc, 100, 5, 1));
    const auto times = unit_times(z.size());
    dynamics::DynamicsConfig dc;
    dc.seed = 2;
    const auto m0 = dynamics::make_dynamics_model(dc);
    training::TrainConfig tc;
    tc.lambda_e = 0;
    tc.lambda_d = 0;
    tc.iterations = 500;
    tc.lr = 1e-3;
    tc.mode = training::TrainMode::Global;
    tc.seed = 3;
    const auto res = training::train(m0, z, times, tc);
    const double before = mean_w2(m0, z, times), after = mean_w2(res.model, z, times);
    return {after < 0.2 * before, fmt("mean W2 %.4f -> %.4f (ratio %.3f, need < 0.2)", before, after, after / before)};
}

// ---- 4 and 5 share the trifurcation embedding ----------------------------

struct TrifurcationEmbedding {
    synthdata::SyntheticDataset ds;
    geometry::PotentialDistances pd;
    Matrix z;
};

const TrifurcationEmbedding& trifurcation_embedding() {
    static const TrifurcationEmbedding e = [] {
        TrifurcationEmbedding out;
        out.ds = synthdata::trifurcation(1);
        const Matrix x = out.ds.expression.array().log1p().matrix();
        const Matrix xp = pca_fit(x, 20).transform(x);
        out.pd = geometry::potential_distances(geometry::diffusion_operator(xp, 5, 10));
        geometry::GagaConfig gc;
        gc.seed = 3;
        out.z = geometry::encode(geometry::train_gaga(xp, out.pd, gc), xp);
        return out;
    }();
    return e;
}

Outcome isometry() {
    const auto& e = trifurcation_embedding();
    std::vector<double> lat, pot;
    for (Index i = 0; i < e.z.rows(); ++i)
        for (Index j = i + 1; j < e.z.rows(); ++j) {
            lat.push_back((e.z.row(i) - e.z.row(j)).norm());
            pot.push_back(e.pd.D(i, j));
        }
    const double r = pearson(lat, pot);
    const double med = median(pot);
    double lo = INFINITY, hi = 0;
    for (std::size_t k = 0; k < pot.size(); ++k)
        if (pot[k] > med) {
            lo = std::min(lo, lat[k] / pot[k]);
            hi = std::max(hi, lat[k] / pot[k]);
        }
    const double ratio = hi / lo;
    return {r >= 0.9 && ratio <= 3.0, fmt("pearson %.3f (need >= 0.9), C/c %.3f on above-median pairs (need <= 3)", r, ratio)};
}

Outcome trifurcation_benchmark() {
    const auto& e = trifurcation_embedding();
    const Matrix z = LatentScaler::fit(e.z).transform(e.z);
    auto lat = e.ds;
    lat.expression = z;
    const auto snaps = synthdata::snapshots(lat);
    const auto times = unit_times(snaps.size());

    dynamics::DynamicsConfig dc;
    dc.seed = 5;
    training::TrainConfig tc;
    tc.iterations = 1000;
    tc.lr = 3e-3;
    tc.mode = training::TrainMode::Global;
    tc.seed = 7;
    const auto res = training::train(dynamics::make_dynamics_model(dc), snaps, times, tc);
    const auto ro = training::rollout(res.model, snaps[0], times, tc.steps_per_unit, false, 11);

    const double med = median_pairwise_distance(z, 1000, 0);
    const auto model = eval::branch_means(ro.states, 3, 0);
    const auto baseline = eval::branch_means(
        eval::straight_line_baseline(snaps.front(), snaps.back(), static_cast<Index>(ro.states.size()) - 1), 3, 0);
    const double te = eval::trajectory_error(z, model).mean / med;
    const double tb = eval::trajectory_error(z, baseline).mean / med;
    const auto sh = model.shares();
    const double min_share = *std::min_element(sh.begin(), sh.end());
    return {te <= 0.5 && te < tb && min_share >= 0.1,
            fmt("trajectory error %.3f vs straight-line %.3f (median-distance units), branch shares %.2f/%.2f/%.2f", te,
                tb, sh[0], sh[1], sh[2])};
}

// ---- 6 -------------------------------------------------------------------

std::string growth_ablation(bool& ok) {
    double w[2] = {0, 0};
    const std::uint64_t seeds[] = {1, 2, 3};
    for (std::uint64_t seed : seeds) {
        const auto ds = synthdata::toy_set(synthdata::ToyKind::Growing, 100, 5, seed);
        std::vector<Matrix> train_set, test_set;
        for (const auto& rows : synthdata::snapshot_rows(ds)) {
            std::vector<Index> a, b;
            for (std::size_t i = 0; i < rows.size(); ++i) (i % 2 ? b : a).push_back(rows[i]);
            train_set.push_back(ds.expression(a, Eigen::all));
            test_set.push_back(ds.expression(b, Eigen::all));
        }
        const auto times = unit_times(train_set.size());
        const std::size_t last = train_set.size() - 1;
        for (int g = 0; g < 2; ++g) {
            dynamics::DynamicsConfig dc;
            dc.seed = seed;
            training::TrainConfig tc;
            tc.iterations = 600;
            tc.lr = 3e-3;
            tc.mode = training::TrainMode::Global;
            tc.growth_enabled = g == 1;
            tc.seed = seed;
            const auto res = training::train(dynamics::make_dynamics_model(dc), train_set, times, tc);
            const auto ro = training::rollout(res.model, test_set[0], times, tc.steps_per_unit, g == 1, 0);
            w[g] += eval::w1(ro.at(last), ro.mass_at(last), test_set[last], Vector::Ones(test_set[last].rows()));
        }
    }
    w[0] /= 3;
    w[1] /= 3;
    const double cut = 1 - w[1] / w[0];
    ok = cut >= 0.2;
    return fmt("growing: held-out W1 %.3f -> %.3f with growth (-%.0f%%, seeds 1-3)", w[0], w[1], 100 * cut);
}

std::string dying_branch(bool& ok) {
    const auto ds = synthdata::toy_set(synthdata::ToyKind::Dying, 100, 5, 1);
    const auto z = synthdata::snapshots(ds);
    dynamics::DynamicsConfig dc;
    dc.seed = 1;
    training::TrainConfig tc;
    tc.iterations = 600;
    tc.lr = 3e-3;
    tc.mode = training::TrainMode::Global;
    tc.growth_enabled = true;
    tc.seed = 1;
    const auto res = training::train(dynamics::make_dynamics_model(dc), z, unit_times(z.size()), tc);
    double sum[2] = {0, 0}, cnt[2] = {0, 0};
    const auto rows = synthdata::snapshot_rows(ds);
    for (std::size_t t = 0; t + 1 < z.size(); ++t) {
        const Vector h = dynamics::eval_growth_batch(res.model, z[t], static_cast<double>(t));
        for (std::size_t i = 0; i < rows[t].size(); ++i) {
            const auto b = static_cast<std::size_t>(ds.branch[rows[t][i]]);
            sum[b] += h[static_cast<Index>(i)];
            ++cnt[b];
        }
    }
    const double surviving = sum[0] / cnt[0], dying = sum[1] / cnt[1];
    ok = dying < 1.0 && 1.0 < surviving;
    return fmt("dying: mean growth %.3f dying vs %.3f surviving", dying, surviving);
}

double branch_coverage(dynamics::SolverMode mode) {
    const auto z = synthdata::snapshots(synthdata::toy_set(synthdata::ToyKind::Branching, 100, 5, 1));
    const auto times = unit_times(z.size());
    dynamics::DynamicsConfig dc;
    dc.seed = 1;
    dc.mode = mode;
    training::TrainConfig tc;
    tc.iterations = 600;
    tc.lr = 3e-3;
    tc.mode = training::TrainMode::Global;
    tc.seed = 1;
    const auto res = training::train(dynamics::make_dynamics_model(dc), z, times, tc);
    const auto ro = training::rollout(res.model, z[0], times, tc.steps_per_unit, false, 1);
    const auto km = eval::kmeans(ro.at(z.size() - 1), 2, 0);
    const double first = static_cast<double>(std::count(km.labels.begin(), km.labels.end(), 0)) /
                         static_cast<double>(km.labels.size());
    return std::min(first, 1 - first);
}

Outcome ablations() {
    bool grow = false, dying = false;
    std::string d = growth_ablation(grow) + "; " + dying_branch(dying);
    const double sde = branch_coverage(dynamics::SolverMode::Sde);
    const double ode = branch_coverage(dynamics::SolverMode::Ode);
    const bool cover = sde >= 0.3;
    d += fmt("; branching minority share sde %.2f, ode(beta=0) %.2f, seed 1", sde, ode);
    if (ode >= 0.3) d += " (ode also covers both branches)";
    return {grow && dying && cover, d};
}

// ---- 7 -------------------------------------------------------------------

Outcome warm_start() {
    const auto ds = synthdata::toy_set(synthdata::ToyKind::Growing, 100, 5, 1);
    const auto z = synthdata::snapshots(ds);
    const auto counts = synthdata::branch_counts(ds);
    const auto rows = synthdata::snapshot_rows(ds);
    const auto targets = training::growth_targets(z, training::UotParams{});
    std::vector<double> est, truth;
    for (std::size_t t = 0; t + 1 < z.size(); ++t)
        for (std::size_t i = 0; i < rows[t].size(); ++i) {
            const auto b = static_cast<std::size_t>(ds.branch[rows[t][i]]);
            est.push_back(targets.masses[t][static_cast<Index>(i)]);
            truth.push_back(static_cast<double>(counts[t + 1][b]) / static_cast<double>(counts[t][b]));
        }
    const double r = pearson(est, truth);
    return {r >= 0.7, fmt("pearson(UOT targets, duplication factor) %.3f (need >= 0.7)", r)};
}

// ---- 8 -------------------------------------------------------------------

Outcome loo() {
    const auto z = synthdata::snapshots(synthdata::toy_set(synthdata::ToyKind::Arc, 100, 4, 1));
    eval::LooConfig lc;
    lc.model.seed = 1;
    lc.train.iterations = 1000;
    lc.train.lr = 3e-3;
    lc.train.seed = 1;
    const auto model = eval::leave_one_out(z, unit_times(z.size()), lc);
    const auto ident = eval::identity_baseline(z, 1);
    bool ok = true;
    std::string d;
    for (Index t = 1; t + 1 < static_cast<Index>(z.size()); ++t)
        for (const char* metric : {"w1", "mmd_g"}) {
            const double a = eval::lookup(model, t, metric), b = eval::lookup(ident, t, metric);
            ok = ok && a < b;
            d += fmt("%st=%ld %s %.4g vs identity %.4g", d.empty() ? "" : ", ", static_cast<long>(t), metric, a, b);
        }
    return {ok, d};
}

// ---- 9 -------------------------------------------------------------------

double mmd_double_sum(const Matrix& x, const Matrix& y, double s) {
    auto k = [&](const Matrix& a, Index i, const Matrix& b, Index j) {
        const double e = oracle::euclid(a, i, b, j);
        return std::exp(-e * e / (2 * s * s));
    };
    double xx = 0, yy = 0, xy = 0;
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < x.rows(); ++j) xx += k(x, i, x, j);
    for (Index i = 0; i < y.rows(); ++i)
        for (Index j = 0; j < y.rows(); ++j) yy += k(y, i, y, j);
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < y.rows(); ++j) xy += k(x, i, y, j);
    const double nx = static_cast<double>(x.rows()), ny = static_cast<double>(y.rows());
    return xx / (nx * nx) + yy / (ny * ny) - 2 * xy / (nx * ny);
}

double median_pooled(const Matrix& x, const Matrix& y) {
    Matrix p(x.rows() + y.rows(), x.cols());
    p << x, y;
    std::vector<double> d;
    for (Index i = 0; i < p.rows(); ++i)
        for (Index j = i + 1; j < p.rows(); ++j) d.push_back(oracle::euclid(p, i, p, j));
    const double m = median(d);
    return m == 0 ? 1.0 : m;
}

Outcome metric_oracles() {
    Rng r(909);
    double worst = 0, worst_self = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const Index d = 1 + trial % 3;
        const Matrix x = oracle::random_matrix(20, d, r), y = oracle::random_matrix(20, d, r, 0.5, 2.0);
        Matrix c(20, 20);
        for (Index i = 0; i < 20; ++i)
            for (Index j = 0; j < 20; ++j) c(i, j) = oracle::euclid(x, i, y, j);
        double mx = 0;
        for (Index j = 0; j < d; ++j) {
            double diff = 0;
            for (Index i = 0; i < 20; ++i) diff += (x(i, j) - y(i, j)) / 20.0;
            mx += diff * diff;
        }
        worst = std::max({worst, std::fabs(eval::w1(x, y) - oracle::assignment_cost(c) / 20.0),
                          std::fabs(eval::mmd_gaussian(x, y) - mmd_double_sum(x, y, median_pooled(x, y))),
                          std::fabs(eval::mmd_mean(x, y) - std::sqrt(mx))});
        worst_self = std::max({worst_self, std::fabs(eval::w1(x, x)), std::fabs(eval::mmd_gaussian(x, x)),
                               std::fabs(eval::mmd_mean(x, x))});
    }
    return {worst <= 1e-10 && worst_self <= 1e-10,
            fmt("max deviation from double-sum oracles %.1e, max value on identical samples %.1e", worst, worst_self)};
}

// ---- 10 ------------------------------------------------------------------

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CELLFLOW_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = io::read_text(e.path());
    return out;
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "cellflow_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path config = root / "pipeline.json";
    io::write_text(config, R"({
  "seed": 42,
  "data": {"preset": "trifurcation", "cells": 150, "poisson": true, "dropout": 0.1, "spatial_layout": true},
  "geometry": {"method": "gaga", "epochs": 60},
  "spatial": {"enabled": true, "output_dim": 4},
  "dynamics": {"mode": "sde", "beta": 0.3},
  "training": {"iterations": 40, "growth": true},
  "eval": {"loo": true}
})");
    const std::string base = "--config " + config.string() + " --out " + (root / "out").string();
    for (const auto& name : cli::command_names())
        if (const int rc = run_cli(name + " " + base); rc != 0) return {false, fmt("%s exited %d", name.c_str(), rc)};
    const auto first = snapshot(root / "out");
    std::string changed;
    for (const auto& name : cli::command_names()) {
        if (const int rc = run_cli(name + " " + base); rc != 0) return {false, fmt("%s rerun exited %d", name.c_str(), rc)};
        const auto again = snapshot(root / "out");
        for (const auto& [file, bytes] : again)
            if (!first.count(file) || first.at(file) != bytes) changed += " " + name + ":" + file;
    }
    return {changed.empty(), changed.empty()
                                 ? fmt("%zu stages rerun through the binary, %zu files byte-identical",
                                       cli::command_names().size(), first.size())
                                 : "differences:" + changed};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cellflow acceptance criteria"};
    std::vector<int> only;
    app.add_option("--only", only, "criterion ids to run (default: all)");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria = {
        {1, "OT oracle equivalence", 10, ot_oracle},
        {2, "gradient suite", 60, gradient_suite},
        {3, "marginal-only training matches endpoints", 120, relaxation},
        {4, "geometry isometry", 180, isometry},
        {5, "trifurcation benchmark", 300, trifurcation_benchmark},
        {6, "ablations", 600, ablations},
        {7, "UOT warm start", 60, warm_start},
        {8, "leave-one-out protocol", 300, loo},
        {9, "metric correctness", 1e9, metric_oracles},
        {10, "CLI determinism", 1e9, determinism},
    };
    const std::set<int> wanted(only.begin(), only.end());
    int failed = 0;
    for (const auto& c : criteria) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_s;
        const bool pass = o.pass && in_time;
        if (!pass) ++failed;
        std::string timing = fmt("%.1fs", secs);
        if (c.budget_s < 1e9) timing += fmt(" of %.0fs", c.budget_s);
        if (!in_time) timing += ", over budget";
        std::printf("[%s] %2d %s: %s (%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
