#include "toricost/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "toricost/errors.hpp"
#include "toricost/parallel.hpp"

namespace toricost
{

namespace
{

void check_problem(const DiscreteMeasure& source, const DiscreteMeasure& target,
                   const Matrix& costs)
{
    source.validate();
    target.validate();
    if (static_cast<std::size_t>(costs.rows()) != source.size()
        || static_cast<std::size_t>(costs.cols()) != target.size())
        throw ValidationError("cost matrix shape does not match the measures");
    if (!costs.allFinite() || costs.minCoeff() < 0.0)
        throw ValidationError("cost matrix entries must be finite and nonnegative");
    const double ma = source.total_mass();
    const double mb = target.total_mass();
    if (std::abs(ma - mb) > 1e-12 * std::max(ma, mb))
        throw ValidationError("measures must have the same total mass");
}

void fill_defects(TransportPlan& plan, const DiscreteMeasure& source,
                  const DiscreteMeasure& target, const Matrix& costs)
{
    plan.row_defect = 0.0;
    plan.col_defect = 0.0;
    for (Eigen::Index i = 0; i < plan.matrix.rows(); ++i)
        plan.row_defect = std::max(plan.row_defect,
                                   std::abs(plan.matrix.row(i).sum() - source.weights[i]));
    for (Eigen::Index j = 0; j < plan.matrix.cols(); ++j)
        plan.col_defect = std::max(plan.col_defect,
                                   std::abs(plan.matrix.col(j).sum() - target.weights[j]));
    plan.cost = plan_cost(plan.matrix, costs);
}

double log_sum_exp(const Eigen::VectorXd& x)
{
    const double c = x.maxCoeff();
    if (!std::isfinite(c))
        return c;
    return c + std::log((x.array() - c).exp().sum());
}

TransportPlan sinkhorn_scaling(const DiscreteMeasure& source, const DiscreteMeasure& target,
                               const Matrix& costs, double epsilon, std::size_t max_iter,
                               double tol)
{
    const Eigen::Index m = costs.rows();
    const Eigen::Index k = costs.cols();
    const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(source.weights.data(), m);
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(target.weights.data(), k);
    const Matrix kernel = (-costs / epsilon).array().exp().matrix();

    Eigen::VectorXd u = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(k);
    TransportPlan plan;
    for (std::size_t iter = 1; iter <= max_iter; ++iter)
    {
        u = a.array() / (kernel * v).array();
        v = b.array() / (kernel.transpose() * u).array();
        plan.iterations = iter;
        const double row_defect = (u.array() * (kernel * v).array() - a.array()).abs().maxCoeff();
        if (!std::isfinite(row_defect))
            break;
        if (row_defect < tol)
            break;
    }
    plan.matrix = u.asDiagonal() * kernel * v.asDiagonal();
    fill_defects(plan, source, target, costs);
    return plan;
}

// Row-normalized log plan for column potentials g: row i holds
// log a_i + log softmax_j((g_j - C_ij) / epsilon), so rows match exactly.
Matrix log_plan_rows(const Eigen::VectorXd& log_a, const Eigen::VectorXd& g, const Matrix& costs,
                     double epsilon)
{
    const Eigen::Index m = costs.rows();
    const Eigen::Index k = costs.cols();
    Matrix lp(m, k);
    Eigen::VectorXd row(k);
    for (Eigen::Index i = 0; i < m; ++i)
    {
        for (Eigen::Index j = 0; j < k; ++j)
            row[j] = (g[j] - costs(i, j)) / epsilon;
        const double lse = log_sum_exp(row);
        for (Eigen::Index j = 0; j < k; ++j)
            lp(i, j) = log_a[i] + row[j] - lse;
    }
    return lp;
}

/// Semi-dual objective sum_j b_j g_j - epsilon sum_i a_i LSE_j((g_j - C_ij)/epsilon),
/// concave in g, maximized where column sums match b.
double semi_dual(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& g, const Matrix& costs, double epsilon)
{
    double s = b.dot(g);
    Eigen::VectorXd row(costs.cols());
    for (Eigen::Index i = 0; i < costs.rows(); ++i)
    {
        for (Eigen::Index j = 0; j < costs.cols(); ++j)
            row[j] = (g[j] - costs(i, j)) / epsilon;
        s -= epsilon * a[i] * log_sum_exp(row);
    }
    return s;
}

struct LogProblem
{
    Eigen::VectorXd a, b, log_a, log_b;
    const Matrix* costs;
};

/// Row-matching potentials f for column potentials g at epsilon.
Eigen::VectorXd row_potentials(const LogProblem& pr, const Eigen::VectorXd& g, double epsilon)
{
    const Matrix& costs = *pr.costs;
    Eigen::VectorXd f(costs.rows()), row(costs.cols());
    for (Eigen::Index i = 0; i < costs.rows(); ++i)
    {
        for (Eigen::Index j = 0; j < costs.cols(); ++j)
            row[j] = (g[j] - costs(i, j)) / epsilon;
        f[i] = epsilon * (pr.log_a[i] - log_sum_exp(row));
    }
    return f;
}

double column_defect(const LogProblem& pr, const Eigen::VectorXd& g, double epsilon)
{
    const Matrix p = log_plan_rows(pr.log_a, g, *pr.costs, epsilon).array().exp().matrix();
    return (p.colwise().sum().transpose() - pr.b).cwiseAbs().maxCoeff();
}

/// Scaling sweeps on (f, g) until the row defect drops below tol or stalls.
/// Returns the last row defect.
double scaling_sweeps(const LogProblem& pr, Eigen::VectorXd& f, Eigen::VectorXd& g, double epsilon,
                      std::size_t& iter, std::size_t max_iter, double tol)
{
    const Matrix& costs = *pr.costs;
    const Eigen::Index m = costs.rows();
    const Eigen::Index k = costs.cols();
    Eigen::VectorXd scratch_row(k), scratch_col(m);
    constexpr std::size_t stall_window = 50;
    double window_start = std::numeric_limits<double>::infinity();
    double defect = std::numeric_limits<double>::infinity();
    std::size_t sweeps = 0;
    while (iter < max_iter)
    {
        ++iter;
        ++sweeps;
        f = row_potentials(pr, g, epsilon);
        for (Eigen::Index j = 0; j < k; ++j)
        {
            for (Eigen::Index i = 0; i < m; ++i)
                scratch_col[i] = (f[i] - costs(i, j)) / epsilon;
            g[j] = epsilon * (pr.log_b[j] - log_sum_exp(scratch_col));
        }
        defect = 0.0;
        for (Eigen::Index i = 0; i < m; ++i)
        {
            for (Eigen::Index j = 0; j < k; ++j)
                scratch_row[j] = (f[i] + g[j] - costs(i, j)) / epsilon;
            defect = std::max(defect, std::abs(std::exp(log_sum_exp(scratch_row)) - pr.a[i]));
        }
        if (!std::isfinite(defect) || defect < tol)
            break;
        if (sweeps % stall_window == 0)
        {
            if (defect > 0.5 * window_start)
                break;
            window_start = defect;
        }
    }
    return defect;
}

/// Newton on the semi-dual in g. Rows are matched exactly for every g and
/// the column residual has the Jacobian (diag(colsum) - P^T diag(1/a) P) / epsilon.
/// Returns the final column defect.
double newton_polish(const LogProblem& pr, Eigen::VectorXd& g, double epsilon, std::size_t& iter,
                     std::size_t max_iter, double tol)
{
    const Matrix& costs = *pr.costs;
    const Eigen::Index k = costs.cols();
    const Eigen::VectorXd& a = pr.a;
    const Eigen::VectorXd& b = pr.b;
    Matrix p = log_plan_rows(pr.log_a, g, costs, epsilon).array().exp().matrix();
    Eigen::VectorXd resid = p.colwise().sum().transpose() - b;
    double value = semi_dual(a, b, g, costs, epsilon);
    while (k > 1 && iter < max_iter && !(resid.cwiseAbs().maxCoeff() < tol))
    {
        ++iter;
        const Eigen::VectorXd colsum = p.colwise().sum().transpose();
        Matrix jac = -(p.transpose() * a.cwiseInverse().asDiagonal() * p);
        jac.diagonal() += colsum;
        jac /= epsilon;
        // g_0 is a gauge: drop it. Columns with almost no mass make the
        // reduced Jacobian singular, so the system is shifted until a step
        // passes the line search.
        const Matrix reduced = jac.bottomRightCorner(k - 1, k - 1);
        const double scale = std::max(reduced.diagonal().maxCoeff(), 1e-300);
        bool moved = false;
        for (double shift = 0.0; !moved && shift <= 1e4 * scale;
             shift = shift == 0.0 ? 1e-12 * scale : 100.0 * shift)
        {
            Matrix shifted = reduced;
            shifted.diagonal().array() += shift;
            const Eigen::VectorXd step_reduced = shifted.ldlt().solve(-resid.tail(k - 1));
            if (!step_reduced.allFinite())
                continue;
            Eigen::VectorXd step = Eigen::VectorXd::Zero(k);
            step.tail(k - 1) = step_reduced;
            // Backtrack on the concave objective; its gradient is -resid.
            const double slope = -resid.dot(step);
            if (!(slope > 0.0))
                continue;
            double alpha = 1.0;
            for (int ls = 0; ls < 40; ++ls, alpha *= 0.5)
            {
                const Eigen::VectorXd trial = g + alpha * step;
                const double v = semi_dual(a, b, trial, costs, epsilon);
                // Near the optimum the objective gain drowns in rounding, so
                // a halved residual also counts as progress.
                bool accept = v >= value + 1e-4 * alpha * slope;
                if (!accept)
                    accept = column_defect(pr, trial, epsilon) < 0.5 * resid.cwiseAbs().maxCoeff();
                if (accept)
                {
                    g = trial;
                    value = v;
                    moved = true;
                    break;
                }
            }
        }
        p = log_plan_rows(pr.log_a, g, costs, epsilon).array().exp().matrix();
        resid = p.colwise().sum().transpose() - b;
        if (!moved)
            break;
    }
    return resid.cwiseAbs().maxCoeff();
}

// Log-domain solve with epsilon scaling: each stage starts from the
// potentials of the previous, larger epsilon, which keeps the Newton stage
// inside its region of fast convergence.
TransportPlan sinkhorn_log(const DiscreteMeasure& source, const DiscreteMeasure& target,
                           const Matrix& costs, double epsilon, std::size_t max_iter, double tol)
{
    const Eigen::Index m = costs.rows();
    const Eigen::Index k = costs.cols();
    LogProblem pr;
    pr.a = Eigen::Map<const Eigen::VectorXd>(source.weights.data(), m);
    pr.b = Eigen::Map<const Eigen::VectorXd>(target.weights.data(), k);
    pr.log_a = pr.a.array().log();
    pr.log_b = pr.b.array().log();
    pr.costs = &costs;

    std::vector<double> stages{epsilon};
    const double top = 0.05 * costs.maxCoeff();
    while (stages.back() * 4.0 < top)
        stages.push_back(stages.back() * 4.0);
    std::reverse(stages.begin(), stages.end());

    Eigen::VectorXd f = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(k);
    std::size_t iter = 0;
    for (const double eps : stages)
    {
        const bool last = eps == epsilon;
        // Intermediate stages only need a warm start.
        const double stage_tol = last ? tol : std::max(tol, 1e-6 * pr.a.sum());
        const double defect = scaling_sweeps(pr, f, g, eps, iter, max_iter, stage_tol);
        if (std::isfinite(defect) && !(defect < stage_tol))
        {
            newton_polish(pr, g, eps, iter, max_iter, stage_tol);
            f = row_potentials(pr, g, eps);
        }
    }

    TransportPlan plan;
    plan.iterations = iter;
    plan.matrix.resize(m, k);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            plan.matrix(i, j) = std::exp((f[i] + g[j] - costs(i, j)) / epsilon);
    fill_defects(plan, source, target, costs);
    return plan;
}

}  // namespace

double DiscreteMeasure::total_mass() const
{
    return pairwise_sum(weights.data(), weights.size());
}

void DiscreteMeasure::validate() const
{
    if (weights.empty())
        throw ValidationError("discrete measure has no atoms");
    if (points.size() != weights.size())
        throw ValidationError("discrete measure: points and weights differ in length");
    for (const double w : weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw ValidationError("discrete measure weights must be positive and finite");
    const std::size_t dim = points.front().size();
    for (const auto& p : points)
    {
        if (p.size() != dim)
            throw ValidationError("discrete measure points must share one dimension");
        for (const double x : p)
            if (!std::isfinite(x))
                throw ValidationError("discrete measure points must be finite");
    }
}

bool DiscreteMeasure::is_uniform(double rel_tol) const
{
    if (weights.empty())
        return false;
    const double w0 = weights.front();
    return std::all_of(weights.begin(), weights.end(),
                       [&](double w) { return std::abs(w - w0) <= rel_tol * w0; });
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<std::vector<double>> points,
                                         double total_mass)
{
    DiscreteMeasure mu;
    mu.weights.assign(points.size(), total_mass / static_cast<double>(points.size()));
    mu.points = std::move(points);
    return mu;
}

Matrix cost_matrix(const DiscreteMeasure& source, const DiscreteMeasure& target,
                   const AmbientCostFn& cost)
{
    source.validate();
    target.validate();
    if (source.points.front().size() != target.points.front().size())
        throw ValidationError("measures live in spaces of different dimension");
    if (source.points.front().size() > AmbientPoint::capacity)
        throw ValidationError("ambient dimension exceeds supported maximum");
    Matrix c(source.size(), target.size());
    for (std::size_t i = 0; i < source.size(); ++i)
    {
        const auto x = AmbientPoint::from(source.points[i]);
        for (std::size_t j = 0; j < target.size(); ++j)
            c(i, j) = cost(x, AmbientPoint::from(target.points[j]));
    }
    return c;
}

double cost_scale(const Matrix& costs)
{
    return costs.size() == 0 ? 0.0 : costs.mean();
}

// Row-major accumulation; zero entries add exactly nothing, so a graph plan
// reproduces the brute-force sum bit for bit.
double plan_cost(const Matrix& plan, const Matrix& costs)
{
    double s = 0.0;
    for (Eigen::Index i = 0; i < plan.rows(); ++i)
        for (Eigen::Index j = 0; j < plan.cols(); ++j)
            s += plan(i, j) * costs(i, j);
    return s;
}

TransportMap solve_monge_bruteforce(const DiscreteMeasure& source,
                                    const DiscreteMeasure& target, const Matrix& costs)
{
    check_problem(source, target, costs);
    if (source.size() != target.size() || !source.is_uniform() || !target.is_uniform())
        throw UnsupportedMeasureError(
            "transport maps are enumerated only between uniform measures of equal size; "
            "point masses may have to be split");
    if (source.size() > max_bruteforce_size)
        throw UnsupportedMeasureError("brute-force Monge solver supports at most "
                                      + std::to_string(max_bruteforce_size) + " atoms");

    const std::size_t m = source.size();
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    TransportMap best{perm, std::numeric_limits<double>::infinity()};
    do
    {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            s += source.weights[i] * costs(i, perm[i]);
        if (s < best.cost)
            best = {perm, s};
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

TransportPlan solve_kantorovich_sinkhorn(const DiscreteMeasure& source,
                                         const DiscreteMeasure& target, const Matrix& costs,
                                         double epsilon, std::size_t max_iter, double tol)
{
    check_problem(source, target, costs);
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw ValidationError("sinkhorn epsilon must be positive");
    if (max_iter == 0 || !(tol > 0.0))
        throw ValidationError("sinkhorn needs max_iter >= 1 and tol > 0");

    const bool log_domain = epsilon < 0.05 * costs.maxCoeff();
    TransportPlan plan = log_domain ? sinkhorn_log(source, target, costs, epsilon, max_iter, tol)
                                    : sinkhorn_scaling(source, target, costs, epsilon, max_iter, tol);
    if (!log_domain && !(std::max(plan.row_defect, plan.col_defect) <= tol))
        plan = sinkhorn_log(source, target, costs, epsilon, max_iter, tol);
    const double defect = std::max(plan.row_defect, plan.col_defect);
    if (!(defect <= tol))
        throw NonConvergenceError("sinkhorn did not reach marginal tolerance", defect);
    return plan;
}

TransportPlan solve_kantorovich_exact(const DiscreteMeasure& source,
                                      const DiscreteMeasure& target, const Matrix& costs)
{
    check_problem(source, target, costs);
    const std::size_t m = source.size();
    const std::size_t k = target.size();
    const double mass = source.total_mass();
    const double cap_eps = 1e-14 * mass;
    const double inf = std::numeric_limits<double>::infinity();

    struct Edge
    {
        std::size_t to;
        double cap;
        double cost;
        std::size_t rev;
    };
    const std::size_t nodes = m + k + 2;
    const std::size_t s = m + k;
    const std::size_t t = m + k + 1;
    std::vector<std::vector<Edge>> graph(nodes);
    auto add_edge = [&](std::size_t u, std::size_t v, double cap, double cost) {
        graph[u].push_back({v, cap, cost, graph[v].size()});
        graph[v].push_back({u, 0.0, -cost, graph[u].size() - 1});
    };
    for (std::size_t i = 0; i < m; ++i)
        add_edge(s, i, source.weights[i], 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j)
            add_edge(i, m + j, inf, costs(i, j));
    for (std::size_t j = 0; j < k; ++j)
        add_edge(m + j, t, target.weights[j], 0.0);

    double pushed = 0.0;
    const std::size_t max_augment = 4 * (m + k) * (m + k) + 16;
    for (std::size_t round = 0; round < max_augment && pushed < mass - 1e-12 * mass; ++round)
    {
        // Bellman-Ford on the residual network.
        std::vector<double> dist(nodes, inf);
        std::vector<std::size_t> prev_node(nodes, nodes), prev_edge(nodes, 0);
        dist[s] = 0.0;
        for (std::size_t pass = 0; pass + 1 < nodes; ++pass)
        {
            bool changed = false;
            for (std::size_t u = 0; u < nodes; ++u)
            {
                if (dist[u] == inf)
                    continue;
                for (std::size_t e = 0; e < graph[u].size(); ++e)
                {
                    const Edge& edge = graph[u][e];
                    if (edge.cap > cap_eps && dist[u] + edge.cost < dist[edge.to] - 1e-15)
                    {
                        dist[edge.to] = dist[u] + edge.cost;
                        prev_node[edge.to] = u;
                        prev_edge[edge.to] = e;
                        changed = true;
                    }
                }
            }
            if (!changed)
                break;
        }
        if (dist[t] == inf)
            break;

        double bottleneck = inf;
        for (std::size_t v = t; v != s; v = prev_node[v])
            bottleneck = std::min(bottleneck, graph[prev_node[v]][prev_edge[v]].cap);
        bottleneck = std::min(bottleneck, mass - pushed);
        for (std::size_t v = t; v != s; v = prev_node[v])
        {
            Edge& edge = graph[prev_node[v]][prev_edge[v]];
            edge.cap -= bottleneck;
            graph[v][edge.rev].cap += bottleneck;
        }
        pushed += bottleneck;
    }
    if (pushed < mass * (1.0 - 1e-9))
        throw NonConvergenceError("transportation network solver could not route all mass",
                                  mass - pushed);

    TransportPlan plan;
    plan.matrix = Matrix::Zero(m, k);
    for (std::size_t i = 0; i < m; ++i)
        for (const Edge& edge : graph[i])
            if (edge.to >= m && edge.to < m + k)
                plan.matrix(i, edge.to - m) = graph[edge.to][edge.rev].cap;
    fill_defects(plan, source, target, costs);
    return plan;
}

TransportPlan graph_plan(const DiscreteMeasure& source, const DiscreteMeasure& target,
                         const TransportMap& map, const Matrix& costs)
{
    check_problem(source, target, costs);
    if (map.assignment.size() != source.size())
        throw ValidationError("transport map does not cover the source support");
    TransportPlan plan;
    plan.matrix = Matrix::Zero(source.size(), target.size());
    for (std::size_t i = 0; i < source.size(); ++i)
    {
        if (map.assignment[i] >= target.size())
            throw ValidationError("transport map points outside the target support");
        plan.matrix(i, map.assignment[i]) += source.weights[i];
    }
    fill_defects(plan, source, target, costs);
    return plan;
}

BoundReport verify_monge_kantorovich_bound(const DiscreteMeasure& source,
                                           const DiscreteMeasure& target, const Matrix& costs,
                                           double epsilon)
{
    BoundReport r;
    r.monge_map = solve_monge_bruteforce(source, target, costs);
    r.monge_cost = r.monge_map.cost;
    r.kantorovich_plan = solve_kantorovich_exact(source, target, costs);
    r.kantorovich_cost = r.kantorovich_plan.cost;
    r.graph_plan_cost = graph_plan(source, target, r.monge_map, costs).cost;
    r.sinkhorn_cost = solve_kantorovich_sinkhorn(source, target, costs, epsilon).cost;
    r.holds = r.monge_cost >= r.kantorovich_cost - 1e-9;
    return r;
}

FlowCoupling sampled_flow_coupling(const SystemDef& sys, const TimeVector& t,
                                   const CostFunction& c, std::size_t n_samples,
                                   std::uint64_t seed, const IntegratorConfig& cfg)
{
    cfg.validate();
    if (n_samples == 0 || n_samples > max_coupling_samples)
        throw ValidationError("sampled_flow_coupling supports 1 to "
                              + std::to_string(max_coupling_samples) + " samples");
    const SampleSet samples = draw_samples(sys.chart, n_samples, seed);
    std::vector<std::vector<double>> from(n_samples), to(n_samples);
    std::vector<double> diagonal(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i)
    {
        const AmbientPoint image = sys.chart.embed(flow(sys, t, samples.points[i], cfg));
        from[i].assign(samples.embedded[i].begin(), samples.embedded[i].end());
        to[i].assign(image.begin(), image.end());
        diagonal[i] = c.ambient(samples.embedded[i], image);
    }

    FlowCoupling out;
    out.source = DiscreteMeasure::uniform(std::move(from));
    out.target = DiscreteMeasure::uniform(std::move(to));
    out.costs = cost_matrix(out.source, out.target, c.ambient_fn());
    const double mean = pairwise_sum(diagonal.data(), n_samples) / static_cast<double>(n_samples);
    out.graph_plan_cost = mean;
    out.total_volume = samples.total_volume;
    out.periodicity_estimate = mean * samples.total_volume;
    return out;
}

}  // namespace toricost
