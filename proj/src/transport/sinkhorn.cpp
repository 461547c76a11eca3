#include "cellflow/transport/sinkhorn.hpp"

#include "cellflow/error.hpp"

#include <cmath>
#include <limits>

namespace cellflow::transport {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_inputs(const Vector& a, const Vector& b, const Matrix& cost, double eps) {
    if (a.size() == 0 || b.size() == 0) fail(ErrorCode::InvalidArgument, "sinkhorn: empty measure");
    if (cost.rows() != a.size() || cost.cols() != b.size()) fail(ErrorCode::ShapeMismatch, "sinkhorn: cost shape mismatch");
    require(eps > 0.0, "sinkhorn: eps must be positive");
    if ((a.array() < 0.0).any() || (b.array() < 0.0).any()) fail(ErrorCode::InvalidArgument, "sinkhorn: negative weight");
    if (!cost.allFinite()) fail(ErrorCode::Numeric, "sinkhorn: non-finite cost");
}

Vector safe_log(const Vector& w) {
    return w.unaryExpr([](double x) { return x > 0.0 ? std::log(x) : kNegInf; });
}

// log sum_j exp((g_j - C_ij) / eps) for row i
double row_lse(const Matrix& cost, Index i, const Vector& g, double eps) {
    double mx = kNegInf;
    for (Index j = 0; j < cost.cols(); ++j) mx = std::max(mx, (g(j) - cost(i, j)) / eps);
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (Index j = 0; j < cost.cols(); ++j) s += std::exp((g(j) - cost(i, j)) / eps - mx);
    return mx + std::log(s);
}

double col_lse(const Matrix& cost, Index j, const Vector& f, double eps) {
    double mx = kNegInf;
    for (Index i = 0; i < cost.rows(); ++i) mx = std::max(mx, (f(i) - cost(i, j)) / eps);
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (Index i = 0; i < cost.rows(); ++i) s += std::exp((f(i) - cost(i, j)) / eps - mx);
    return mx + std::log(s);
}

Matrix log_plan(const Matrix& cost, const Vector& f, const Vector& g, double eps) {
    Matrix p(cost.rows(), cost.cols());
    for (Index i = 0; i < cost.rows(); ++i)
        for (Index j = 0; j < cost.cols(); ++j) {
            const double e = (f(i) + g(j) - cost(i, j)) / eps;
            p(i, j) = (f(i) == kNegInf || g(j) == kNegInf) ? 0.0 : std::exp(e);
        }
    return p;
}

void finish(TransportPlan& out, const Vector& a, const Vector& b, const Matrix& cost) {
    out.cost = (out.plan.array() * cost.array()).sum();
    out.residual_source = (out.plan.rowwise().sum() - a).cwiseAbs().sum();
    out.residual_target = (out.plan.colwise().sum().transpose() - b).cwiseAbs().sum();
}

TransportPlan sinkhorn_log(const Vector& a, const Vector& b, const Matrix& cost, double eps, int max_iter, double tol) {
    const Vector la = safe_log(a);
    const Vector lb = safe_log(b);
    Vector f = Vector::Zero(a.size());
    Vector g = Vector::Zero(b.size());
    TransportPlan out;
    out.converged = false;
    for (int it = 1; it <= max_iter; ++it) {
        for (Index i = 0; i < a.size(); ++i)
            f(i) = la(i) == kNegInf ? kNegInf : eps * la(i) - eps * row_lse(cost, i, g, eps);
        double residual = 0.0;
        for (Index j = 0; j < b.size(); ++j) {
            const double lse = col_lse(cost, j, f, eps);
            g(j) = lb(j) == kNegInf ? kNegInf : eps * lb(j) - eps * lse;
        }
        // row marginal after the column update
        for (Index i = 0; i < a.size(); ++i) {
            const double r = f(i) == kNegInf ? 0.0 : std::exp(f(i) / eps + row_lse(cost, i, g, eps));
            residual += std::fabs(r - a(i));
        }
        out.iterations = it;
        if (residual < tol) {
            out.converged = true;
            break;
        }
    }
    out.plan = log_plan(cost, f, g, eps);
    out.dual_f = f;
    out.dual_g = g;
    finish(out, a, b, cost);
    return out;
}

TransportPlan sinkhorn_kernel(const Vector& a, const Vector& b, const Matrix& cost, double eps, int max_iter, double tol) {
    const Matrix kernel = (-cost.array() / eps).exp().matrix();
    Vector u = Vector::Ones(a.size());
    Vector v = Vector::Ones(b.size());
    TransportPlan out;
    out.converged = false;
    for (int it = 1; it <= max_iter; ++it) {
        const Vector kv = kernel * v;
        u = (kv.array() > 0.0).select(a.array() / kv.array(), 0.0);
        const Vector ktu = kernel.transpose() * u;
        v = (ktu.array() > 0.0).select(b.array() / ktu.array(), 0.0);
        const Vector row = u.cwiseProduct(kernel * v);
        const double residual = (row - a).cwiseAbs().sum();
        out.iterations = it;
        if (!u.allFinite() || !v.allFinite()) fail(ErrorCode::Numeric, "sinkhorn: scaling overflow");
        if (residual < tol) {
            out.converged = true;
            break;
        }
    }
    out.plan = u.asDiagonal() * kernel * v.asDiagonal();
    out.dual_f = eps * safe_log(u);
    out.dual_g = eps * safe_log(v);
    finish(out, a, b, cost);
    return out;
}

}  // namespace

TransportPlan sinkhorn_with_cost(const Vector& a, const Vector& b, const Matrix& cost, double eps, int max_iter,
                                 double tol) {
    check_inputs(a, b, cost, eps);
    const double sa = a.sum();
    const double sb = b.sum();
    if (std::fabs(sa - sb) > 1e-9 * std::max(1.0, sa)) fail(ErrorCode::InvalidArgument, "sinkhorn: unbalanced masses");
    if (eps < 1e-2 * cost.maxCoeff()) return sinkhorn_log(a, b, cost, eps, max_iter, tol);
    return sinkhorn_kernel(a, b, cost, eps, max_iter, tol);
}

TransportPlan sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps, int max_iter, double tol) {
    if (mu.dim() != nu.dim()) fail(ErrorCode::ShapeMismatch, "sinkhorn: dimension mismatch");
    return sinkhorn_with_cost(mu.weights, nu.weights, ground_cost(mu.support, nu.support, 2), eps, max_iter, tol);
}

TransportPlan sinkhorn_unbalanced_with_cost(const Vector& a, const Vector& b, const Matrix& cost, double eps,
                                            double lambda_source, double lambda_target, int max_iter, double tol) {
    check_inputs(a, b, cost, eps);
    require(lambda_source > 0.0 && lambda_target > 0.0, "sinkhorn_unbalanced: relaxation weights must be positive");
    const double fi_a = lambda_source / (lambda_source + eps);
    const double fi_b = lambda_target / (lambda_target + eps);
    const Vector la = safe_log(a);
    const Vector lb = safe_log(b);
    Vector f = Vector::Zero(a.size());
    Vector g = Vector::Zero(b.size());
    TransportPlan out;
    out.converged = false;
    for (int it = 1; it <= max_iter; ++it) {
        double change = 0.0;
        for (Index i = 0; i < a.size(); ++i) {
            const double nf = la(i) == kNegInf ? kNegInf : fi_a * (eps * la(i) - eps * row_lse(cost, i, g, eps));
            if (nf != kNegInf) change = std::max(change, std::fabs(nf - f(i)) / eps);
            f(i) = nf;
        }
        for (Index j = 0; j < b.size(); ++j) {
            const double ng = lb(j) == kNegInf ? kNegInf : fi_b * (eps * lb(j) - eps * col_lse(cost, j, f, eps));
            if (ng != kNegInf) change = std::max(change, std::fabs(ng - g(j)) / eps);
            g(j) = ng;
        }
        out.iterations = it;
        if (!std::isfinite(change)) fail(ErrorCode::Numeric, "sinkhorn_unbalanced: non-finite potentials");
        if (change < tol) {
            out.converged = true;
            break;
        }
    }
    out.plan = log_plan(cost, f, g, eps);
    out.dual_f = f;
    out.dual_g = g;
    finish(out, a, b, cost);
    return out;
}

TransportPlan sinkhorn_unbalanced(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps,
                                  double lambda_source, double lambda_target, int max_iter, double tol) {
    if (mu.dim() != nu.dim()) fail(ErrorCode::ShapeMismatch, "sinkhorn_unbalanced: dimension mismatch");
    return sinkhorn_unbalanced_with_cost(mu.weights, nu.weights, ground_cost(mu.support, nu.support, 2), eps,
                                         lambda_source, lambda_target, max_iter, tol);
}

}  // namespace cellflow::transport
