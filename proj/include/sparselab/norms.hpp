#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "operators.hpp"
#include "rng.hpp"
#include "space.hpp"

namespace sparselab {

enum class NormKind { StrongExact, StrongWitness, WeakWitness };

inline const char* to_string(NormKind k) {
    switch (k) {
        case NormKind::StrongExact: return "strong-exact";
        case NormKind::StrongWitness: return "strong-witness";
        case NormKind::WeakWitness: return "weak-witness";
    }
    return "?";
}

inline NormKind norm_kind_from_string(const std::string& s) {
    if (s == "strong-exact") return NormKind::StrongExact;
    if (s == "strong-witness") return NormKind::StrongWitness;
    if (s == "weak-witness") return NormKind::WeakWitness;
    throw std::invalid_argument("unknown norm kind: " + s);
}

/// A norm value plus everything needed to reproduce it: the witness function
/// (lower-bound kinds), the level λ (weak kind), and search metadata.
struct NormEstimate {
    NormKind kind = NormKind::StrongExact;
    double p = 2;
    double value = 0;
    std::optional<CellFunction<double>> witness;
    std::optional<double> lambda;
    std::uint64_t seed = 0;
    std::int64_t iterations = 0;
};

using OperatorFn = std::function<CellFunction<double>(const CellFunction<double>&)>;

// ===========================================================================
// Exact p=2 norms of positive rank-one-sum operators  T f = Σ ⟨f⟩_{S_i} 1_{T_i}
// ===========================================================================

/// Structural description of such an operator (sparse: T_i = S_i; the α = 1
/// generalized operator: T_i = G(S_i)).
struct RankOneSpec {
    DyadicSpace space;
    std::vector<MeasSet> sources;
    std::vector<MeasSet> targets;

    static RankOneSpec from_sparse(const SparseCollection& col) {
        return {col.space(), col.sets(), col.sets()};
    }

    static RankOneSpec from_alpha(const AlphaSpec& spec) {
        if (spec.alpha != 1.0)
            throw std::domain_error("RankOneSpec: only the linear case alpha = 1");
        return {spec.sources.space(), spec.sources.sets(), spec.targets};
    }
};

template <class S>
CellFunction<S> apply_rank_one(const RankOneSpec& spec, const CellFunction<S>& f) {
    CellFunction<S> out = CellFunction<S>::zero(f.space);
    for (std::size_t i = 0; i < spec.sources.size(); ++i) {
        const S avg = average(f, spec.sources[i]);
        for (const auto& r : spec.targets[i].ranges())
            for (std::int64_t c = r.begin; c < r.end; ++c)
                out.values[static_cast<std::size_t>(c)] += avg;
    }
    return out;
}

/// Adjoint in L²(μ):  T* g = Σ (∫_{T_i} g)/μ(S_i) · 1_{S_i}.
inline CellFunction<double> apply_rank_one_adjoint(const RankOneSpec& spec,
                                                   const CellFunction<double>& g) {
    CellFunction<double> out = CellFunction<double>::zero(g.space);
    for (std::size_t i = 0; i < spec.sources.size(); ++i) {
        double s = 0;
        spec.targets[i].for_each_cell([&](std::int64_t c) { s += g[c]; });
        const double coef = s / static_cast<double>(spec.sources[i].cell_count());
        spec.sources[i].for_each_cell([&](std::int64_t c) { out[c] += coef; });
    }
    return out;
}

/// Largest singular value by power iteration on T*T; independent of the
/// spectral route below and used as its cross-check.
inline std::pair<double, std::int64_t> power_norm(const RankOneSpec& spec,
                                                  double tol = 1e-13,
                                                  std::int64_t max_iter = 20000) {
    if (spec.sources.empty()) return {0.0, 0};
    CellFunction<double> v = CellFunction<double>::constant(spec.space, 1.0);
    double sigma = 0;
    std::int64_t it = 0;
    for (; it < max_iter; ++it) {
        CellFunction<double> w = apply_rank_one_adjoint(spec, apply_rank_one(spec, v));
        double n2 = 0;
        for (double x : w.values) n2 += x * x;
        const double norm = std::sqrt(n2);
        if (norm == 0) return {0.0, it};
        for (auto& x : w.values) x /= norm;
        const double next = std::sqrt(norm); // ‖T*T v‖ ≈ σ² for unit v
        const bool done = std::abs(next - sigma) <= tol * std::max(next, 1.0);
        sigma = next;
        v = std::move(w);
        if (done) break;
    }
    return {sigma, it};
}

/// Exact operator norm on L²(μ) as the largest singular value.  Small spaces
/// assemble the dense cell-basis matrix; larger ones use the equivalent
/// rank-structured m×m eigenproblem λ_max(Gt·Gs) with Gt the target overlap
/// matrix and Gs the normalized source overlap matrix.
inline NormEstimate strong_norm_exact(const RankOneSpec& spec, double p = 2.0,
                                      std::int64_t dense_cell_limit = 1 << 10) {
    if (p != 2.0)
        throw std::domain_error("strong_norm_exact: only p = 2 has an exact method");
    NormEstimate est;
    est.kind = NormKind::StrongExact;
    est.p = p;
    const std::size_t m = spec.sources.size();
    if (m == 0) return est;

    const std::int64_t cells = spec.space.cell_count();
    if (cells <= dense_cell_limit) {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(cells, cells);
        for (std::size_t i = 0; i < m; ++i) {
            const double coef = 1.0 / static_cast<double>(spec.sources[i].cell_count());
            spec.targets[i].for_each_cell([&](std::int64_t r) {
                spec.sources[i].for_each_cell([&](std::int64_t c) { M(r, c) += coef; });
            });
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.transpose() * M);
        est.value = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
        return est;
    }

    const auto mi = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd Gt(mi, mi), Gs(mi, mi);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            const double t = static_cast<double>(
                spec.targets[i].intersection_count(spec.targets[j]));
            const double s =
                static_cast<double>(spec.sources[i].intersection_count(spec.sources[j])) /
                (static_cast<double>(spec.sources[i].cell_count()) *
                 static_cast<double>(spec.sources[j].cell_count()));
            Gt(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t;
            Gt(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = t;
            Gs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
            Gs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = s;
        }
    // λ_max(Gt·Gs) = λ_max(W^T Gt W) with W = Gs^{1/2}
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gs);
    Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd W = es.eigenvectors() * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(W.transpose() * Gt * W);
    est.value = std::sqrt(std::max(0.0, es2.eigenvalues().maxCoeff()));
    return est;
}

// ===========================================================================
// Witness searches
// ===========================================================================

/// Deterministic candidate generation and ascent parameters.
struct SearchConfig {
    std::uint64_t seed = kDefaultSeed;
    int random_cubes = 6;    // indicators of seeded random dyadic cubes
    int random_unions = 2;   // indicators of seeded random cell subsets
    int random_fields = 6;   // seeded non-negative random fields
    int refine_rounds = 1;   // level-set refinements of the running best
    int ascent_sweeps = 2;   // coordinate-ascent sweep cap (strong only)
    bool enable_ascent = true;
};

namespace detail {

/// Fixed candidate order: constants, aligned cubes, seeded cubes, seeded
/// unions, seeded fields, two-level profiles.
inline std::vector<CellFunction<double>> witness_candidates(const DyadicSpace& sp,
                                                            const SearchConfig& cfg) {
    std::vector<CellFunction<double>> cand;
    cand.push_back(CellFunction<double>::constant(sp, 1.0));
    for (int level = 1; level <= sp.depth; ++level) {
        DyadicCube q{level, std::vector<std::int64_t>(static_cast<std::size_t>(sp.dim), 0)};
        cand.push_back(CellFunction<double>::indicator(sp, cube_cells(sp, q)));
    }
    Rng rng(Rng::derive(cfg.seed, 0xCA4D));
    for (int i = 0; i < cfg.random_cubes; ++i) {
        const int level = sp.depth == 0
                              ? 0
                              : 1 + static_cast<int>(rng.next_below(
                                        static_cast<std::uint64_t>(sp.depth)));
        DyadicCube q{level, {}};
        for (int a = 0; a < sp.dim; ++a)
            q.coord.push_back(rng.next_in(0, (std::int64_t{1} << level) - 1));
        cand.push_back(CellFunction<double>::indicator(sp, cube_cells(sp, q)));
    }
    for (int i = 0; i < cfg.random_unions; ++i) {
        CellFunction<double> f = CellFunction<double>::zero(sp);
        const std::uint64_t keep = (i == 0) ? 2 : 8; // densities 1/2 and 1/8
        for (auto& v : f.values)
            if (rng.next_below(keep) == 0) v = 1.0;
        cand.push_back(std::move(f));
    }
    for (int i = 0; i < cfg.random_fields; ++i) {
        CellFunction<double> f = CellFunction<double>::zero(sp);
        const int power = 1 << (i % 3); // 1, 2, 4: increasingly spiky
        for (auto& v : f.values) {
            double u = rng.next_unit();
            double x = u;
            for (int k = 1; k < power; ++k) x *= u;
            v = x;
        }
        cand.push_back(std::move(f));
    }
    if (sp.depth >= 1) {
        const int mid = (sp.depth + 1) / 2;
        DyadicCube q{mid, std::vector<std::int64_t>(static_cast<std::size_t>(sp.dim), 0)};
        const MeasSet cells = cube_cells(sp, q);
        for (double peak : {4.0, 16.0}) {
            CellFunction<double> f = CellFunction<double>::constant(sp, 1.0);
            cells.for_each_cell([&](std::int64_t c) { f[c] = peak; });
            cand.push_back(std::move(f));
        }
    }
    return cand;
}

inline bool is_zero(const CellFunction<double>& f) {
    for (double v : f.values)
        if (v != 0) return false;
    return true;
}

} // namespace detail

/// Best ratio ‖Tf‖_p / ‖f‖_p over the candidate family, optionally improved
/// by single-cell coordinate ascent (factors 2, 1/2, 17/16 in canonical cell
/// order, accepted on strict improvement).  Certified lower bound.
inline NormEstimate strong_norm_witness(const OperatorFn& T, const DyadicSpace& sp,
                                        double p, const SearchConfig& cfg = {}) {
    if (!(p > 1) || std::isinf(p))
        throw std::domain_error("strong_norm_witness: p in (1, inf)");
    NormEstimate est;
    est.kind = NormKind::StrongWitness;
    est.p = p;
    est.seed = cfg.seed;

    auto ratio = [&](const CellFunction<double>& f) {
        const double nf = lp_norm(f, p);
        if (nf == 0) return -1.0;
        ++est.iterations;
        return lp_norm(T(f), p) / nf;
    };

    std::vector<CellFunction<double>> cand = detail::witness_candidates(sp, cfg);
    double best = -1;
    std::size_t best_id = 0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        const double r = ratio(cand[i]);
        if (r > best) {
            best = r;
            best_id = i;
        }
    }
    CellFunction<double> f = cand[best_id];

    for (int round = 0; round < cfg.refine_rounds; ++round) {
        const CellFunction<double> g = T(f);
        std::vector<double> vals;
        for (double v : g.values)
            if (v > 0) vals.push_back(v);
        if (vals.empty()) break;
        std::sort(vals.begin(), vals.end());
        bool improved = false;
        for (double q : {0.5, 0.75, 0.9}) {
            const double cut = vals[static_cast<std::size_t>(
                q * static_cast<double>(vals.size() - 1))];
            CellFunction<double> h = CellFunction<double>::zero(sp);
            for (std::size_t c = 0; c < g.values.size(); ++c)
                if (g.values[c] > cut) h.values[c] = 1.0;
            if (detail::is_zero(h)) continue;
            const double r = ratio(h);
            if (r > best) {
                best = r;
                f = std::move(h);
                improved = true;
            }
        }
        if (!improved) break;
    }

    if (cfg.enable_ascent) {
        for (int sweep = 0; sweep < cfg.ascent_sweeps; ++sweep) {
            bool improved = false;
            for (std::int64_t c = 0; c < sp.cell_count(); ++c)
                for (double factor : {2.0, 0.5, 17.0 / 16.0}) {
                    CellFunction<double> trial = f;
                    trial[c] *= factor;
                    const double r = ratio(trial);
                    if (r > best) {
                        best = r;
                        f = std::move(trial);
                        improved = true;
                    }
                }
            if (!improved) break;
        }
    }

    est.value = std::max(best, 0.0);
    est.witness = std::move(f);
    return est;
}

/// Best λ·μ{Tf>λ}^{1/p}/‖f‖_p over candidates and over λ one ulp below each
/// distinct positive output value.  Chebyshev (λ·μ{Tf>λ}^{1/p} ≤ ‖Tf‖_p) is
/// checked on every evaluation up to a pinned 1e-12 roundoff guard.
inline NormEstimate weak_norm_witness(const OperatorFn& T, const DyadicSpace& sp,
                                      double p, const SearchConfig& cfg = {}) {
    if (!(p >= 1) || std::isinf(p))
        throw std::domain_error("weak_norm_witness: p in [1, inf)");
    NormEstimate est;
    est.kind = NormKind::WeakWitness;
    est.p = p;
    est.seed = cfg.seed;
    est.value = 0;
    est.lambda = 0.0;

    const double cell = sp.cell_measure();
    std::vector<CellFunction<double>> cand = detail::witness_candidates(sp, cfg);
    for (auto& f : cand) {
        const double nf = lp_norm(f, p);
        if (nf == 0) continue;
        ++est.iterations;
        const CellFunction<double> g = T(f);
        std::vector<double> vals(g.values);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        const double gnorm = lp_norm(g, p);
        for (double v : vals) {
            if (!(v > 0)) continue;
            const double lambda = std::nextafter(v, 0.0);
            std::int64_t over = 0;
            for (double x : g.values)
                if (x > lambda) ++over;
            const double quasi =
                lambda * std::pow(static_cast<double>(over) * cell, 1.0 / p);
            if (quasi > gnorm * (1 + 1e-12))
                throw std::logic_error("weak_norm_witness: Chebyshev check failed");
            const double val = quasi / nf;
            if (val > est.value) {
                est.value = val;
                est.lambda = lambda;
                est.witness = f;
            }
        }
    }
    return est;
}

/// Re-evaluates a stored witness; used by the reproducibility checks.
inline double replay_witness(const OperatorFn& T, const NormEstimate& est) {
    if (!est.witness) return est.value;
    const CellFunction<double>& f = *est.witness;
    if (est.kind == NormKind::StrongWitness)
        return lp_norm(T(f), est.p) / lp_norm(f, est.p);
    const CellFunction<double> g = T(f);
    const double lambda = est.lambda.value_or(0.0);
    std::int64_t over = 0;
    for (double x : g.values)
        if (x > lambda) ++over;
    return lambda *
           std::pow(static_cast<double>(over) * f.space.cell_measure(), 1.0 / est.p) /
           lp_norm(f, est.p);
}

} // namespace sparselab
