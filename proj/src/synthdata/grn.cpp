#include "cellflow/synthdata/grn.hpp"

#include "cellflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace cellflow::synthdata {

namespace {

double hill(double x, double k, double n) {
    if (x <= 0.0) return 0.0;
    if (n == 2.0) {
        const double x2 = x * x;
        return x2 / (k * k + x2);
    }
    const double xn = std::pow(x, n);
    return xn / (std::pow(k, n) + xn);
}

}  // namespace

void validate(const GrnSpec& spec) {
    const Index g = spec.genes;
    require(g >= 1, "grn: need at least one gene");
    require(spec.basal.size() == g && spec.decay.size() == g, "grn: basal/decay length must equal gene count");
    require((spec.basal.array() >= 0.0).all(), "grn: basal rates must be nonnegative");
    require((spec.decay.array() > 0.0).all(), "grn: decay rates must be positive");
    require(spec.noise_scale >= 0.0 && spec.dt > 0.0, "grn: need noise_scale >= 0 and dt > 0");
    require(spec.burn_in >= 0, "grn: burn_in must be nonnegative");

    std::vector<bool> is_master(static_cast<std::size_t>(g), false);
    for (Index m : spec.master_regulators) {
        require(m >= 0 && m < g, "grn: master regulator index out of range");
        require(!is_master[m], "grn: duplicate master regulator");
        is_master[m] = true;
    }
    for (const auto& e : spec.edges) {
        require(e.regulator >= 0 && e.regulator < g && e.target >= 0 && e.target < g, "grn: edge index out of range");
        require(!is_master[e.target], "grn: master regulator " + std::to_string(e.target) + " has an incoming edge");
        require(e.hill_k > 0.0 && e.hill_n >= 1.0, "grn: need hill K > 0 and n >= 1");
        require(std::isfinite(e.weight), "grn: non-finite edge weight");
    }

    const Index s = spec.states();
    require(s >= 1, "grn: need at least one cell state");
    require(spec.programs.cols() == static_cast<Index>(spec.master_regulators.size()),
            "grn: programs need one column per master regulator");
    require((spec.programs.array() >= 0.0).all(), "grn: programs must be nonnegative");
    require(spec.root >= 0 && spec.root < s, "grn: root state out of range");
    for (const auto& t : spec.transitions)
        require(t.from >= 0 && t.from < s && t.to >= 0 && t.to < s && t.from != t.to, "grn: invalid state transition");
    for (const auto& lin : spec.lineages) {
        require(!lin.empty() && lin.front() == spec.root, "grn: lineages must start at the root state");
        for (std::size_t i = 1; i < lin.size(); ++i) {
            const bool ok = std::any_of(spec.transitions.begin(), spec.transitions.end(), [&](const StateTransition& t) {
                return t.from == lin[i - 1] && t.to == lin[i];
            });
            require(ok, "grn: lineage step " + std::to_string(lin[i - 1]) + " -> " + std::to_string(lin[i]) +
                            " is not a transition");
        }
    }
}

Vector grn_rate(const GrnSpec& spec, const Vector& basal, const Vector& x) {
    Vector r = basal;
    for (const auto& e : spec.edges) r[e.target] += e.weight * hill(x[e.regulator], e.hill_k, e.hill_n);
    r.array() -= spec.decay.array() * x.array();
    return r;
}

Vector grn_step(const GrnSpec& spec, const Vector& x, double dt, Rng& rng) {
    return grn_step(spec, spec.basal, x, dt, rng);
}

Vector grn_step(const GrnSpec& spec, const Vector& basal, const Vector& x, double dt, Rng& rng) {
    require(dt > 0.0, "grn_step: dt must be positive");
    require(x.size() == spec.genes, "grn_step: state length must equal gene count");
    Vector next = x + dt * grn_rate(spec, basal, x);
    if (spec.noise_scale > 0.0) {
        const double sd = spec.noise_scale * std::sqrt(dt);
        for (Index i = 0; i < next.size(); ++i) next[i] += sd * std::sqrt(std::max(x[i], 0.0)) * rng.normal();
    }
    next = next.cwiseMax(0.0);
    if (!all_finite(next)) fail(ErrorCode::Numeric, "grn_step: non-finite state");
    return next;
}

GrnStepper::GrnStepper(const GrnSpec& spec) : spec_(spec), next_(spec.genes) {
    offsets_.assign(static_cast<std::size_t>(spec.genes) + 1, 0);
    for (const auto& e : spec.edges) ++offsets_[e.target + 1];
    for (Index i = 0; i < spec.genes; ++i) offsets_[i + 1] += offsets_[i];
    incoming_.resize(spec.edges.size());
    std::vector<Index> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : spec.edges) incoming_[fill[e.target]++] = &e;
}

void GrnStepper::step(const Vector& basal, Vector& x, double dt, Rng& rng) {
    const Index g = spec_.genes;
    for (Index i = 0; i < g; ++i) {
        double r = basal[i];
        for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) {
            const GrnEdge* e = incoming_[k];
            r += e->weight * hill(x[e->regulator], e->hill_k, e->hill_n);
        }
        r -= spec_.decay[i] * x[i];
        next_[i] = x[i] + dt * r;
    }
    if (spec_.noise_scale > 0.0) {
        const double sd = spec_.noise_scale * std::sqrt(dt);
        for (Index i = 0; i < g; ++i) next_[i] += sd * std::sqrt(std::max(x[i], 0.0)) * rng.normal();
    }
    for (Index i = 0; i < g; ++i) {
        x[i] = std::max(next_[i], 0.0);
        if (!std::isfinite(x[i])) fail(ErrorCode::Numeric, "grn_step: non-finite state");
    }
}

Vector basal_for_program(const GrnSpec& spec, const Vector& program) {
    Vector b = spec.basal;
    for (std::size_t m = 0; m < spec.master_regulators.size(); ++m) b[spec.master_regulators[m]] = program[m];
    return b;
}

Vector steady_state(const GrnSpec& spec, const Vector& basal, Index max_sweeps) {
    if (max_sweeps <= 0) max_sweeps = spec.genes + 1;
    std::vector<std::vector<const GrnEdge*>> incoming(static_cast<std::size_t>(spec.genes));
    for (const auto& e : spec.edges) incoming[e.target].push_back(&e);

    Vector x = Vector::Zero(spec.genes);
    for (Index sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        for (Index i = 0; i < spec.genes; ++i) {
            double prod = basal[i];
            for (const GrnEdge* e : incoming[i]) prod += e->weight * hill(x[e->regulator], e->hill_k, e->hill_n);
            const double v = std::max(prod / spec.decay[i], 0.0);
            change = std::max(change, std::abs(v - x[i]));
            x[i] = v;
        }
        if (change == 0.0) break;
    }
    return x;
}

std::vector<std::vector<Index>> resolve_lineages(const GrnSpec& spec) {
    if (!spec.lineages.empty()) return spec.lineages;
    const Index s = spec.states();
    std::vector<std::vector<Index>> out_edges(static_cast<std::size_t>(s));
    for (const auto& t : spec.transitions) out_edges[t.from].push_back(t.to);

    std::vector<std::vector<Index>> lineages;
    std::vector<Index> path{spec.root};
    std::vector<bool> on_path(static_cast<std::size_t>(s), false);
    on_path[spec.root] = true;
    std::function<void(Index)> walk = [&](Index u) {
        if (out_edges[u].empty()) {
            lineages.push_back(path);
            return;
        }
        for (Index v : out_edges[u]) {
            if (on_path[v]) fail(ErrorCode::InvalidArgument, "grn: cyclic state graph needs explicit lineages");
            on_path[v] = true;
            path.push_back(v);
            walk(v);
            path.pop_back();
            on_path[v] = false;
        }
    };
    walk(spec.root);
    return lineages;
}

GrnSpec random_grn(const RandomGrnOptions& opt, const Matrix& programs, std::uint64_t seed) {
    const Index g = opt.genes, m = opt.master_regulators;
    require(m >= 1 && m <= g, "random_grn: need 1 <= master regulators <= genes");
    require(programs.cols() == m, "random_grn: programs need one column per master regulator");
    require(opt.max_regulators >= 1, "random_grn: max_regulators must be positive");

    Rng rng(seed);
    GrnSpec spec;
    spec.genes = g;
    spec.programs = programs;
    spec.noise_scale = opt.noise_scale;
    spec.basal = Vector::Zero(g);
    spec.decay = Vector::Zero(g);
    for (Index i = 0; i < g; ++i) spec.decay[i] = rng.uniform(0.8, 1.2);
    for (Index i = 0; i < m; ++i) spec.master_regulators.push_back(i);

    // levels(s, j): noise-free steady level of gene j in state s, filled in gene order
    const Index s = programs.rows();
    Matrix levels = Matrix::Zero(s, g);
    for (Index j = 0; j < m; ++j) levels.col(j) = programs.col(j) / spec.decay[j];

    for (Index i = m; i < g; ++i) {
        spec.basal[i] = rng.uniform(0.0, 0.5);
        const Index want = std::min<Index>(1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(opt.max_regulators))), i);
        std::vector<Index> regs;
        while (static_cast<Index>(regs.size()) < want) {
            const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i)));
            if (std::find(regs.begin(), regs.end(), j) == regs.end()) regs.push_back(j);
        }
        for (Index j : regs) {
            GrnEdge e;
            e.regulator = j;
            e.target = i;
            e.weight = rng.bernoulli(opt.repression_fraction) ? -rng.uniform(0.5, 2.0) : rng.uniform(1.0, 4.0);
            e.hill_k = std::max(0.5 * levels.col(j).mean(), 0.05);
            e.hill_n = 2.0;
            spec.edges.push_back(e);
        }
        for (Index st = 0; st < s; ++st) {
            double prod = spec.basal[i];
            for (Index k = static_cast<Index>(spec.edges.size()) - want; k < static_cast<Index>(spec.edges.size()); ++k) {
                const auto& e = spec.edges[k];
                prod += e.weight * hill(levels(st, e.regulator), e.hill_k, e.hill_n);
            }
            levels(st, i) = std::max(prod / spec.decay[i], 0.0);
        }
    }
    return spec;
}

}  // namespace cellflow::synthdata
