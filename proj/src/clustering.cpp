#include "neucgc/clustering.hpp"

#include "neucgc/error.hpp"
#include "neucgc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace neucgc {

namespace {

/// Squared distances from every point to every centroid via the expansion
/// ||x||^2 - 2 x.c + ||c||^2 (clamped at zero). Row-major operands so the
/// per-point row arithmetic streams contiguously.
Matrix squared_distances(const RowMatrix& points, const RowMatrix& centroids,
                         const Vector& point_sq) {
    Matrix d = (-2.0 * (points * centroids.transpose())).rowwise() +
               centroids.rowwise().squaredNorm().transpose();
    d.colwise() += point_sq;
    return d.cwiseMax(0.0);
}

struct SingleRun {
    IntVector assignments;
    RowMatrix centroids;
    double inertia = std::numeric_limits<double>::infinity();
};

/// Greedy k-means++: each new centroid is picked among 2 + floor(log C)
/// candidates sampled proportional to the current squared distances, keeping
/// the candidate that shrinks the potential most.
RowMatrix seed_centroids(const RowMatrix& points, Index c, Rng& rng) {
    const Index n = points.rows();
    RowMatrix centroids(c, points.cols());
    centroids.row(0) = points.row(static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n))));
    if (c == 1) return centroids;

    const Index n_candidates = 2 + static_cast<Index>(std::log(static_cast<double>(c)));
    Vector best_sq = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (Index k = 1; k < c; ++k) {
        const double total = best_sq.sum();
        Index best_idx = 0;
        double best_potential = std::numeric_limits<double>::infinity();
        Vector best_candidate_sq;
        for (Index t = 0; t < n_candidates; ++t) {
            Index idx;
            if (total <= 0.0) {
                idx = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
            } else {
                double target = rng.uniform() * total;
                idx = n - 1;
                for (Index i = 0; i < n; ++i) {
                    target -= best_sq(i);
                    if (target <= 0.0) {
                        idx = i;
                        break;
                    }
                }
            }
            Vector cand_sq =
                best_sq.cwiseMin((points.rowwise() - points.row(idx)).rowwise().squaredNorm());
            const double potential = cand_sq.sum();
            if (potential < best_potential) {
                best_potential = potential;
                best_idx = idx;
                best_candidate_sq = std::move(cand_sq);
            }
        }
        centroids.row(k) = points.row(best_idx);
        best_sq = best_candidate_sq;
    }
    return centroids;
}

SingleRun lloyd(const RowMatrix& points, Index c, std::uint64_t seed, const KmeansOptions& opt) {
    const Index n = points.rows();
    Rng rng(seed);
    SingleRun run;
    run.centroids = seed_centroids(points, c, rng);
    run.assignments.assign(static_cast<std::size_t>(n), 0);
    const Vector point_sq = points.rowwise().squaredNorm();

    double prev_inertia = std::numeric_limits<double>::infinity();
    for (Index iter = 0; iter < opt.max_iter; ++iter) {
        Matrix d = squared_distances(points, run.centroids, point_sq);
        double inertia = 0.0;
        for (Index i = 0; i < n; ++i) {
            Index arg;
            inertia += d.row(i).minCoeff(&arg);
            run.assignments[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(arg);
        }

        RowMatrix sums = RowMatrix::Zero(c, points.cols());
        std::vector<Index> counts(static_cast<std::size_t>(c), 0);
        for (Index i = 0; i < n; ++i) {
            const auto a = static_cast<std::size_t>(run.assignments[static_cast<std::size_t>(i)]);
            sums.row(static_cast<Index>(a)) += points.row(i);
            ++counts[a];
        }
        bool reseeded = false;
        for (Index k = 0; k < c; ++k) {
            if (counts[static_cast<std::size_t>(k)] == 0) {
                // re-seed an empty cluster from the farthest point
                Index far;
                Vector mind = d.rowwise().minCoeff();
                mind.maxCoeff(&far);
                run.centroids.row(k) = points.row(far);
                run.assignments[static_cast<std::size_t>(far)] = static_cast<std::int32_t>(k);
                reseeded = true;
            } else {
                run.centroids.row(k) = sums.row(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
            }
        }

        run.inertia = inertia;
        if (!reseeded && iter > 0 &&
            prev_inertia - inertia <= opt.rel_tol * std::max(inertia, 1e-300)) {
            break;
        }
        prev_inertia = inertia;
    }

    // make assignments, centroids and inertia mutually consistent
    Matrix d = squared_distances(points, run.centroids, point_sq);
    run.inertia = 0.0;
    for (Index i = 0; i < n; ++i) {
        Index arg;
        run.inertia += d.row(i).minCoeff(&arg);
        run.assignments[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(arg);
    }
    RowMatrix sums = RowMatrix::Zero(c, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(c), 0);
    for (Index i = 0; i < n; ++i) {
        const auto a = static_cast<std::size_t>(run.assignments[static_cast<std::size_t>(i)]);
        sums.row(static_cast<Index>(a)) += points.row(i);
        ++counts[a];
    }
    for (Index k = 0; k < c; ++k)
        if (counts[static_cast<std::size_t>(k)] > 0)
            run.centroids.row(k) = sums.row(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
    run.inertia = 0.0;
    for (Index i = 0; i < n; ++i)
        run.inertia +=
            (points.row(i) - run.centroids.row(run.assignments[static_cast<std::size_t>(i)])).squaredNorm();
    return run;
}

} // namespace

ClusterResult kmeans(const Matrix& points, Index n_clusters, std::uint64_t seed,
                     const KmeansOptions& options) {
    const Index n = points.rows();
    if (n_clusters < 1) throw_error(ErrorCode::kParam, "kmeans: need at least one cluster");
    if (n_clusters > n) throw_error(ErrorCode::kParam, "kmeans: more clusters than points");
    const RowMatrix points_rm = points;

    ClusterResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    const Index restarts = std::max<Index>(1, options.restarts);
    for (Index r = 0; r < restarts; ++r) {
        const std::uint64_t run_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
        SingleRun run = lloyd(points_rm, n_clusters, run_seed, options);
        if (run.inertia < best.inertia ||
            (run.inertia == best.inertia && run_seed < best.seed)) {
            best.assignments = std::move(run.assignments);
            best.centroids = std::move(run.centroids);
            best.inertia = run.inertia;
            best.seed = run_seed;
        }
    }
    return best;
}

namespace detail {

std::vector<Index> hungarian_max(const Matrix& profit) {
    // potentials-and-augmenting-paths Hungarian method on the negated matrix
    const Index n = profit.rows();
    const Matrix cost = -profit;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<Index> match(static_cast<std::size_t>(n) + 1, 0); // match[col 1..n] = row
    std::vector<Index> way(static_cast<std::size_t>(n) + 1, 0);

    for (Index i = 1; i <= n; ++i) {
        match[0] = i;
        Index j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const Index i0 = match[static_cast<std::size_t>(j0)];
            double delta = inf;
            Index j1 = 0;
            for (Index j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const Index j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }

    std::vector<Index> row_to_col(static_cast<std::size_t>(n), 0);
    for (Index j = 1; j <= n; ++j)
        row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)]) - 1] = j - 1;
    return row_to_col;
}

} // namespace detail

namespace {

double comb2(double m) { return m * (m - 1.0) / 2.0; } // "m choose 2" as a double

} // namespace

MetricsReport evaluate(const IntVector& predicted, const IntVector& truth) {
    if (predicted.size() != truth.size()) {
        throw_error(ErrorCode::kShape, "evaluate: prediction/label length mismatch");
    }
    const auto n = static_cast<double>(truth.size());
    if (truth.empty()) throw_error(ErrorCode::kDegenerate, "evaluate: empty input");

    int ct = 0, cp = 0;
    for (int y : truth) ct = std::max(ct, y + 1);
    for (int y : predicted) {
        if (y < 0) throw_error(ErrorCode::kParam, "evaluate: negative cluster id");
        cp = std::max(cp, y + 1);
    }
    const int dim = std::max(ct, cp);

    Matrix contingency = Matrix::Zero(dim, dim); // rows: truth, cols: predicted
    for (std::size_t i = 0; i < truth.size(); ++i)
        contingency(truth[i], predicted[i]) += 1.0;
    const Vector row_sums = contingency.rowwise().sum();
    const Vector col_sums = contingency.colwise().sum();

    MetricsReport m;

    // ACC and the matching reused for macro-F1: match truth class t to
    // predicted cluster sigma(t) maximizing the matched mass. Ties between
    // equal-mass matchings are broken by the summed per-pair F1 (scaled so
    // it can never override the integer-valued primary objective), which
    // keeps all four metrics invariant under cluster-id permutation.
    Matrix profit = contingency;
    const double tie_scale = 1.0 / (2.0 * static_cast<double>(dim));
    for (Index t = 0; t < dim; ++t)
        for (Index p = 0; p < dim; ++p)
            if (contingency(t, p) > 0.0)
                profit(t, p) += tie_scale * 2.0 * contingency(t, p) / (row_sums(t) + col_sums(p));
    const std::vector<Index> match = detail::hungarian_max(profit);
    double matched = 0.0;
    for (Index t = 0; t < dim; ++t) matched += contingency(t, match[static_cast<std::size_t>(t)]);
    m.acc = matched / n;

    // NMI with arithmetic-mean normalization
    double mi = 0.0, ht = 0.0, hp = 0.0;
    for (Index t = 0; t < dim; ++t) {
        if (row_sums(t) > 0.0) ht -= row_sums(t) / n * std::log(row_sums(t) / n);
        if (col_sums(t) > 0.0) hp -= col_sums(t) / n * std::log(col_sums(t) / n);
        for (Index p = 0; p < dim; ++p) {
            const double nij = contingency(t, p);
            if (nij > 0.0) mi += nij / n * std::log(n * nij / (row_sums(t) * col_sums(p)));
        }
    }
    if (ht == 0.0 && hp == 0.0) {
        m.nmi = 1.0; // both partitions trivial
    } else {
        const double denom = 0.5 * (ht + hp);
        m.nmi = denom > 0.0 ? std::max(0.0, mi) / denom : 0.0;
    }

    // ARI
    double sum_comb = 0.0, comb_t = 0.0, comb_p = 0.0;
    for (Index t = 0; t < dim; ++t) {
        comb_t += comb2(row_sums(t));
        comb_p += comb2(col_sums(t));
        for (Index p = 0; p < dim; ++p) sum_comb += comb2(contingency(t, p));
    }
    const double total_comb = comb2(n);
    const double expected = comb_t * comb_p / total_comb;
    const double max_index = 0.5 * (comb_t + comb_p);
    m.ari = max_index == expected ? 1.0 : (sum_comb - expected) / (max_index - expected);

    // macro-F1 over truth classes after mapping clusters by the ACC matching
    double f1_sum = 0.0;
    for (Index t = 0; t < ct; ++t) {
        const Index p = match[static_cast<std::size_t>(t)];
        const double tp = contingency(t, p);
        const double precision = col_sums(p) > 0.0 ? tp / col_sums(p) : 0.0;
        const double recall = row_sums(t) > 0.0 ? tp / row_sums(t) : 0.0;
        f1_sum += (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    }
    m.f1 = f1_sum / static_cast<double>(ct);

    return m;
}

} // namespace neucgc
