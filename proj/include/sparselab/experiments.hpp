#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "collections.hpp"
#include "covers.hpp"
#include "directional.hpp"
#include "norms.hpp"
#include "operators.hpp"
#include "rational.hpp"
#include "reference.hpp"
#include "rng.hpp"
#include "serialize.hpp"
#include "space.hpp"
#include "stratify.hpp"

namespace sparselab {

inline int ceil_log2(std::int64_t n) {
    if (n < 1) throw std::domain_error("ceil_log2: n >= 1");
    int m = 0;
    while ((std::int64_t{1} << m) < n) ++m;
    return m;
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_slope: need two or more points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    return num / den;
}

// ===========================================================================
// Fixture decks
// ===========================================================================

inline SparseCollection tower_fixture(const DyadicSpace& sp, int m) {
    return build_tower(sp, root_cube(sp), m);
}

/// Chain of halving intervals whose left endpoint sits a third of the way
/// into the line — deliberately misaligned with the dyadic grid.
inline SparseCollection shifted_tower_fixture(const DyadicSpace& sp, int m) {
    if (sp.dim != 1) throw std::domain_error("shifted_tower_fixture: 1-D only");
    if (m > sp.depth - 1) throw std::domain_error("shifted_tower_fixture: m too deep");
    const std::int64_t n = sp.cell_count();
    const std::int64_t b = n / 3;
    std::vector<MeasSet> sets;
    for (int j = 0; j <= m; ++j)
        sets.push_back(MeasSet::single_range(b, b + ((n / 2) >> j)));
    return SparseCollection::from_sets(sp, std::move(sets));
}

/// Mixed deck of seeded collections: towers and random laminar cube families
/// with certified gamma >= 1/2 throughout (towers halve; random targets are
/// at least 1/2), so the geometric generation decay applies to every entry.
inline std::vector<SparseCollection> standard_sparse_fixtures(const DyadicSpace& sp,
                                                              std::uint64_t seed,
                                                              std::size_t n) {
    if (sp.depth < 2)
        throw std::domain_error("standard_sparse_fixtures: depth >= 2 required");
    std::vector<SparseCollection> out;
    out.reserve(n);
    const std::size_t cap =
        2 + static_cast<std::size_t>(sp.cell_count() / 16); // keeps targets feasible
    for (std::size_t k = 0; k < n; ++k) {
        Rng rk(Rng::derive(seed, 0xF1A0 + k));
        switch (k % 3) {
            case 0: {
                const int m =
                    std::min<int>(sp.depth, 2 + static_cast<int>(rk.next_below(4)));
                out.push_back(build_tower(sp, root_cube(sp), m,
                                          ChildSelector::seeded(Rng::derive(seed, k))));
                break;
            }
            case 1: {
                const std::size_t count =
                    std::min<std::size_t>(cap, 4 + rk.next_below(6));
                out.push_back(
                    build_random_sparse(sp, Rng::derive(seed, k), 0.5, count));
                break;
            }
            default: {
                const double gamma = 0.55 + 0.05 * static_cast<double>(k % 4);
                const std::size_t count =
                    std::min<std::size_t>(cap, 3 + rk.next_below(8));
                out.push_back(
                    build_random_sparse(sp, Rng::derive(seed, k), gamma, count));
                break;
            }
        }
    }
    return out;
}

/// 1-D interval deck for the cover/domination studies: dyadic towers, the
/// misaligned third-shift towers, and random cube families.
inline std::vector<SparseCollection> interval_fixtures(const DyadicSpace& sp,
                                                       std::uint64_t seed,
                                                       std::size_t n) {
    if (sp.dim != 1) throw std::domain_error("interval_fixtures: 1-D only");
    std::vector<SparseCollection> out;
    out.push_back(tower_fixture(sp, std::min(sp.depth, 4)));
    out.push_back(shifted_tower_fixture(sp, std::min(sp.depth - 1, 4)));
    out.push_back(SparseCollection::from_sets(sp, {})); // empty: vacuous domination
    const std::size_t cap = 2 + static_cast<std::size_t>(sp.cell_count() / 16);
    for (std::size_t k = out.size(); k < n; ++k)
        out.push_back(build_random_sparse(sp, Rng::derive(seed, 0xD0A + k), 0.5,
                                          std::min<std::size_t>(cap, 3 + k % 6)));
    return out;
}

// ===========================================================================
// Generation decay and tail checks (shared by the verification front ends)
// ===========================================================================

struct DecayCheck {
    std::int64_t checks = 0;
    std::int64_t violations = 0;
};

/// mu(G_j(R)) <= gamma^j mu(R) for every member R and every depth j, in exact
/// rationals (cell counts, the common measure factor cancels).
inline DecayCheck check_generation_decay(const SparseCollection& col) {
    DecayCheck out;
    for (std::size_t i = 0; i < col.size(); ++i) {
        const MeasSet& R = col.set(i);
        for (int j = 1;; ++j) {
            const MeasSet gu = generation_union(col, R, j);
            if (gu.empty()) break;
            ++out.checks;
            if (Rational(gu.cell_count()) > int_pow(col.gamma(), static_cast<unsigned>(j)) *
                                                Rational(R.cell_count()))
                ++out.violations;
        }
    }
    return out;
}

/// For a nested chain: mu(G_j(R_i)) must equal 2^{-d j} mu(R_i) exactly.
inline bool tower_generation_equality(const SparseCollection& tower) {
    const int d = tower.space().dim;
    for (std::size_t i = 0; i < tower.size(); ++i) {
        const MeasSet& R = tower.set(i);
        for (int j = 1;; ++j) {
            const MeasSet gu = generation_union(tower, R, j);
            if (gu.empty()) break;
            if (Rational(gu.cell_count()) !=
                pow2_rational(-d * j) * Rational(R.cell_count()))
                return false;
        }
    }
    return true;
}

// ===========================================================================
// Tail experiment
// ===========================================================================

/// Overlap tail mu{overlap > lambda} against gamma^{floor(lambda)} * mu(X),
/// overlap counting every member.  Comparison is exact (rational).
inline ExperimentReport tail_experiment(const std::vector<SparseCollection>& fixtures,
                                        std::vector<double> lambdas = {}) {
    ExperimentReport rep;
    rep.id = "tail";
    rep.columns = {"fixture", "lambda", "measured", "bound", "pass"};

    if (lambdas.empty()) {
        double top = 0;
        for (const auto& col : fixtures)
            if (!col.sets().empty()) {
                const CellFunction<double> ov = overlap_function(col);
                for (double v : ov.values) top = std::max(top, v);
            }
        for (double l = 0; l <= top + 1; l += 1) lambdas.push_back(l);
    }
    for (double l : lambdas)
        if (l < 0) throw std::domain_error("tail_experiment: lambda >= 0");
    std::sort(lambdas.begin(), lambdas.end());

    std::int64_t violations = 0;
    for (std::size_t i = 0; i < fixtures.size(); ++i) {
        const auto& col = fixtures[i];
        const DyadicSpace& sp = col.space();
        const CellFunction<double> ov =
            col.sets().empty() ? CellFunction<double>::zero(sp) : overlap_function(col);
        const Rational cell = pow2_rational(-sp.dim * sp.depth);
        for (double l : lambdas) {
            std::int64_t count = 0;
            for (double v : ov.values)
                if (v > l) ++count;
            const Rational measured = Rational(count) * cell;
            const Rational bound =
                col.sets().empty()
                    ? Rational(1)
                    : int_pow(col.gamma(), static_cast<unsigned>(std::floor(l)));
            const bool pass = measured <= bound;
            if (!pass) ++violations;
            rep.add_row({static_cast<double>(i), l, to_double(measured),
                         to_double(bound), pass ? 1.0 : 0.0});
        }
    }
    rep.add_summary("fixtures", static_cast<double>(fixtures.size()));
    rep.add_summary("violations", static_cast<double>(violations));
    return rep;
}

/// mu{overlap > lambda} == 2^{-lambda} for integer lambda in [0, m) on a
/// chain of m+1 halving sets rooted at the whole space.
inline bool tower_tail_equality(const SparseCollection& tower) {
    const DyadicSpace& sp = tower.space();
    if (tower.size() == 0 || tower.set(0).cell_count() != sp.cell_count())
        return false;
    const int m = static_cast<int>(tower.size()) - 1;
    const CellFunction<double> ov = overlap_function(tower);
    const Rational cell = pow2_rational(-sp.dim * sp.depth);
    for (int l = 0; l < m; ++l) {
        std::int64_t count = 0;
        for (double v : ov.values)
            if (v > l) ++count;
        if (Rational(count) * cell != pow2_rational(-sp.dim * l)) return false;
    }
    return true;
}

// ===========================================================================
// Ensembles and the norm-scaling experiment
// ===========================================================================

enum class EnsembleKind { Axis, Shear };

inline EnsembleKind ensemble_kind_from_string(const std::string& s) {
    if (s == "axis") return EnsembleKind::Axis;
    if (s == "shear") return EnsembleKind::Shear;
    throw std::invalid_argument("ensemble must be 'axis' or 'shear'");
}

struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::Shear;
    DyadicSpace space;
    double band_density = 1.0 / 32.0; // shear: fraction of rows carrying bands
    double axis_gamma = 0.5;          // axis: sparsity target per family
    std::size_t axis_count = 16;      // axis: sets per family
};

inline std::vector<SparseCollection> build_ensemble(const EnsembleSpec& ens,
                                                    std::int64_t N, std::uint64_t seed) {
    if (N < 1) throw std::domain_error("build_ensemble: N >= 1");
    std::vector<SparseCollection> out;
    out.reserve(static_cast<std::size_t>(N));
    for (std::int64_t k = 1; k <= N; ++k) {
        if (ens.kind == EnsembleKind::Shear) {
            const ShearDirection dir = make_direction(ens.space, k);
            out.push_back(build_shear_family(ens.space, dir,
                                             Rng::derive(seed, static_cast<std::uint64_t>(k)),
                                             ens.band_density)
                              .merged);
        } else {
            out.push_back(build_random_sparse(ens.space,
                                              Rng::derive(seed, static_cast<std::uint64_t>(k)),
                                              ens.axis_gamma, ens.axis_count));
        }
    }
    return out;
}

/// Witnessed norms of the family-max sparse operator against the maximal
/// function over the pooled sets, with the log_+N normalizations.  Witness
/// searches run without local ascent so large ensembles stay tractable.
inline ExperimentReport scaling_experiment(double p, std::vector<std::int64_t> Ns,
                                           const EnsembleSpec& ens, std::uint64_t seed) {
    if (!(p > 1.0) || std::isinf(p))
        throw std::domain_error("scaling_experiment: p in (1, inf)");
    if (Ns.empty()) throw std::domain_error("scaling_experiment: empty N list");
    std::sort(Ns.begin(), Ns.end());

    ExperimentReport rep;
    rep.id = "scaling";
    rep.seed = seed;
    rep.columns = {"N",           "weak_max_sparse",   "weak_maximal",
                   "strong_max_sparse", "strong_maximal", "r_weak", "r_strong"};

    SearchConfig cfg;
    cfg.seed = seed;
    cfg.enable_ascent = false;

    const double strong_exp = std::max(1.0, 1.0 / (p - 1.0));
    for (std::int64_t N : Ns) {
        const OperatorFamily fam(build_ensemble(ens, N, seed));
        const OperatorFn T_fam = [&fam](const CellFunction<double>& f) {
            return apply_max_sparse(fam, f);
        };
        const OperatorFn T_max = [&fam](const CellFunction<double>& f) {
            return apply_maximal<double>(fam.union_sets(), f);
        };
        const DyadicSpace& sp = ens.space;
        const double w_fam = weak_norm_witness(T_fam, sp, p, cfg).value;
        const double w_max = weak_norm_witness(T_max, sp, p, cfg).value;
        const double s_fam = strong_norm_witness(T_fam, sp, p, cfg).value;
        const double s_max = strong_norm_witness(T_max, sp, p, cfg).value;
        const double logN = log_plus(static_cast<double>(N));
        const double r_weak = w_fam / (logN * w_max);
        const double r_strong = s_fam / (std::pow(logN, strong_exp) * s_max);
        rep.add_row({static_cast<double>(N), w_fam, w_max, s_fam, s_max, r_weak, r_strong});
    }

    rep.add_summary("p", p);
    rep.add_summary("r_weak_first", rep.rows.front()[5]);
    rep.add_summary("r_weak_last", rep.rows.back()[5]);
    double rw = 0, rs = 0;
    for (const auto& row : rep.rows) {
        rw = std::max(rw, row[5]);
        rs = std::max(rs, row[6]);
    }
    rep.add_summary("r_weak_max", rw);
    rep.add_summary("r_strong_max", rs);
    return rep;
}

// ===========================================================================
// Sharpness construction
// ===========================================================================

/// N independent seeded towers of depth m = ceil(log2 N) inside Q = the whole
/// space, with f = 1_Q.  On the union U of the innermost sets the family-max
/// operator equals m+1 exactly, giving the weak-norm witness
/// (m+1) * (mu(U)/mu(Q))^{1/p}.
struct SharpnessOutcome {
    int m;
    std::int64_t n;
    OperatorFamily family;
    CellFunction<double> f;
    MeasSet covered;   // union of innermost tower sets
    double u_fraction; // mu(U)/mu(Q), exact dyadic
    bool guarantee_ok; // family-max == m+1 everywhere on U

    double guarantee() const { return static_cast<double>(m + 1); }
    double witness_value(double p) const {
        return (static_cast<double>(m) + 1.0) * std::pow(u_fraction, 1.0 / p);
    }
};

inline SharpnessOutcome sharpness_construction(const DyadicSpace& sp, std::int64_t N,
                                               std::uint64_t seed) {
    if (N < 1) throw std::domain_error("sharpness_construction: N >= 1");
    const int m = ceil_log2(N);
    if (sp.depth < m + 2)
        throw std::domain_error("sharpness_construction: depth must be at least ceil(log2 N) + 2");

    std::vector<SparseCollection> towers;
    towers.reserve(static_cast<std::size_t>(N));
    MeasSet covered;
    for (std::int64_t k = 1; k <= N; ++k) {
        towers.push_back(build_tower(
            sp, root_cube(sp), m,
            ChildSelector::seeded(Rng::derive(seed, static_cast<std::uint64_t>(k)))));
        covered = covered.unite(towers.back().sets().back());
    }

    OperatorFamily family(std::move(towers));
    CellFunction<double> f = CellFunction<double>::constant(sp, 1.0);
    const CellFunction<double> lam = apply_max_sparse(family, f);
    bool ok = true;
    covered.for_each_cell([&](std::int64_t c) {
        if (lam[c] != static_cast<double>(m + 1)) ok = false;
    });

    const double u = static_cast<double>(covered.cell_count()) * sp.cell_measure();
    return SharpnessOutcome{m,  N, std::move(family), std::move(f),
                            std::move(covered), u, ok};
}

inline ExperimentReport sharpness_experiment(const std::vector<std::int64_t>& Ns, double p,
                                             std::uint64_t seed, int depth_override = -1) {
    if (!(p >= 1.0) || std::isinf(p))
        throw std::domain_error("sharpness_experiment: p in [1, inf)");
    ExperimentReport rep;
    rep.id = "sharpness";
    rep.seed = seed;
    rep.columns = {"N", "m", "u_fraction", "guarantee", "witness"};
    std::vector<std::int64_t> sorted = Ns;
    std::sort(sorted.begin(), sorted.end());

    double min_u = 1.0;
    bool increasing = true;
    double prev = 0;
    for (std::int64_t N : sorted) {
        const int m = ceil_log2(N);
        const int depth = depth_override >= 0 ? depth_override : m + 3;
        const DyadicSpace sp = build_space(1, depth);
        const SharpnessOutcome out = sharpness_construction(sp, N, seed);
        if (!out.guarantee_ok)
            throw std::logic_error("sharpness_experiment: level guarantee failed");
        const double w = out.witness_value(p);
        rep.add_row({static_cast<double>(N), static_cast<double>(out.m), out.u_fraction,
                     out.guarantee(), w});
        min_u = std::min(min_u, out.u_fraction);
        if (w <= prev) increasing = false;
        prev = w;
    }
    rep.add_summary("p", p);
    rep.add_summary("min_u_fraction", min_u);
    rep.add_summary("strictly_increasing", increasing ? 1.0 : 0.0);
    return rep;
}

// ===========================================================================
// Lemma scaling: norm of the target-redirected operator vs delta
// ===========================================================================

/// Depth-12 tower on a 1-D depth-19 line; each member R donates a sub-block
/// G(R) of measure exactly delta*mu(R) carved from the half not descended
/// into, so the G(R) are pairwise disjoint (trivially laminar and sparse).
/// Exact p=2 norms; the fitted log-log slope should sit near 1/2, and
/// delta = 1 (G = identity) reproduces the plain sparse norm bit for bit.
inline ExperimentReport lemma_delta_experiment(double p, std::vector<double> deltas,
                                               std::uint64_t seed) {
    if (p != 2.0) throw std::domain_error("lemma_delta_experiment: exact norms need p = 2");
    if (deltas.empty()) throw std::domain_error("lemma_delta_experiment: empty delta list");
    std::sort(deltas.begin(), deltas.end());

    const int tower_depth = 12;
    const DyadicSpace sp = build_space(1, 19);
    const SparseCollection tower =
        build_tower(sp, root_cube(sp), tower_depth,
                    ChildSelector::seeded(Rng::derive(seed, 0xE77)));

    ExperimentReport rep;
    rep.id = "lemma";
    rep.seed = seed;
    rep.columns = {"delta", "norm", "norm_over_sqrt_delta"};

    // spare halves: for R_j the half not containing R_{j+1}; for the deepest
    // member its right half
    std::vector<CellRange> spare;
    for (int j = 0; j <= tower_depth; ++j) {
        const MeasSet& R = tower.set(static_cast<std::size_t>(j));
        if (j < tower_depth) {
            const MeasSet comp = R.setminus(tower.set(static_cast<std::size_t>(j) + 1));
            spare.push_back(comp.ranges().front());
        } else {
            const std::int64_t b = R.min_cell();
            const std::int64_t half = R.cell_count() / 2;
            spare.push_back({b + half, b + 2 * half});
        }
    }

    std::vector<double> log_d, log_n;
    for (double d : deltas) {
        if (!(d > 0.0 && d <= 1.0))
            throw std::domain_error("lemma_delta_experiment: delta in (0, 1]");
        double norm = 0;
        if (d == 1.0) {
            norm = strong_norm_exact(RankOneSpec::from_sparse(tower)).value;
        } else {
            if (d > 0.5)
                throw std::domain_error("lemma_delta_experiment: delta in (0, 1/2] or 1");
            const Rational rd(d); // exact binary expansion of the double
            std::vector<MeasSet> targets;
            for (int j = 0; j <= tower_depth; ++j) {
                const Rational need =
                    rd * tower.set(static_cast<std::size_t>(j)).cell_count();
                if (denominator(need) != 1 || need < 1)
                    throw std::domain_error(
                        "lemma_delta_experiment: delta below one-cell resolution");
                const auto cells = static_cast<std::int64_t>(numerator(need));
                targets.push_back(MeasSet::single_range(
                    spare[static_cast<std::size_t>(j)].begin,
                    spare[static_cast<std::size_t>(j)].begin + cells));
            }
            AlphaSpec alpha;
            alpha.sources = tower;
            alpha.targets = std::move(targets);
            alpha.alpha = 1.0;
            alpha.validate();
            norm = strong_norm_exact(RankOneSpec::from_alpha(alpha)).value;
            log_d.push_back(std::log2(d));
            log_n.push_back(std::log2(norm));
        }
        rep.add_row({d, norm, norm / std::sqrt(d)});
    }

    if (log_d.size() >= 2) rep.add_summary("slope", fit_slope(log_d, log_n));
    const double plain = strong_norm_exact(RankOneSpec::from_sparse(tower)).value;
    rep.add_summary("plain_norm", plain);
    if (!rep.rows.empty() && rep.rows.back()[0] == 1.0)
        rep.add_summary("anchor_exact", rep.rows.back()[1] == plain ? 1.0 : 0.0);
    rep.add_summary("p", p);
    return rep;
}

// ===========================================================================
// Finite-martingale domination experiment
// ===========================================================================

/// Pointwise Lambda_S f <= 8 * sum of the martingale parts, per fixture and
/// per function draw.  Reports the largest observed ratio and any violations.
inline ExperimentReport domination_experiment(const std::vector<SparseCollection>& fixtures,
                                              int f_draws, std::uint64_t seed) {
    if (f_draws < 0) throw std::domain_error("domination_experiment: f_draws >= 0");
    ExperimentReport rep;
    rep.id = "dominate";
    rep.seed = seed;
    rep.columns = {"fixture", "draw", "max_ratio", "violations"};

    std::int64_t total_viol = 0;
    double worst = 0;
    for (std::size_t i = 0; i < fixtures.size(); ++i) {
        const auto& col = fixtures[i];
        const DyadicSpace& sp = col.space();
        const FiniteMartingaleCover cover = cover_shifted_grids(sp, col.sets());
        const MartingaleDomination dom = dominate_by_martingale(col, cover);

        for (int draw = 0; draw <= f_draws; ++draw) {
            CellFunction<double> f = CellFunction<double>::constant(sp, 1.0);
            if (draw > 0) {
                Rng r(Rng::derive(seed, 0xD0 * 1000 + i * 100 + static_cast<std::size_t>(draw)));
                for (auto& v : f.values) {
                    const double u = r.next_unit();
                    v = u * u;
                }
            }
            const CellFunction<double> lhs = apply_sparse(col, f);
            CellFunction<double> rhs = CellFunction<double>::zero(dom.ambient);
            const CellFunction<double> famb = embed_line(f, dom.ambient, dom.offset);
            for (const auto& part : dom.parts) {
                const CellFunction<double> g = apply_sparse(part, famb);
                for (std::size_t c = 0; c < rhs.values.size(); ++c)
                    rhs.values[c] += g.values[c];
            }
            double ratio = 0;
            std::int64_t viol = 0;
            for (std::int64_t c = 0; c < sp.cell_count(); ++c) {
                const double den = rhs[dom.offset + c];
                if (den > 0) ratio = std::max(ratio, lhs[c] / den);
                if (lhs[c] > dom.constant * den) ++viol;
            }
            total_viol += viol;
            worst = std::max(worst, ratio);
            rep.add_row({static_cast<double>(i), static_cast<double>(draw), ratio,
                         static_cast<double>(viol)});
        }
    }
    rep.add_summary("fixtures", static_cast<double>(fixtures.size()));
    rep.add_summary("max_ratio", worst);
    rep.add_summary("violations", static_cast<double>(total_viol));
    return rep;
}

// ===========================================================================
// Directional experiment (shear families)
// ===========================================================================

/// Builds N shear directions with slopes 1..N, checks certificates and the
/// pointwise domination of the pooled maximal function by the directional
/// maximal function on seeded draws.
inline ExperimentReport directional_experiment(const DyadicSpace& sp, std::int64_t N,
                                               double band_density, int f_draws,
                                               std::uint64_t seed) {
    if (sp.dim != 2) throw std::domain_error("directional_experiment: 2-D space required");
    ExperimentReport rep;
    rep.id = "directional";
    rep.seed = seed;
    rep.columns = {"direction", "sets", "gamma_ok", "mv_violations"};

    std::vector<ShearRectangleFamily> fams;
    for (std::int64_t a = 1; a <= N; ++a)
        fams.push_back(build_shear_family(sp, make_direction(sp, a),
                                          Rng::derive(seed, static_cast<std::uint64_t>(a)),
                                          band_density));

    std::int64_t bad_gamma = 0, mv_viol = 0;
    std::vector<CellFunction<double>> draws;
    draws.push_back(CellFunction<double>::constant(sp, 1.0));
    for (int t = 1; t <= f_draws; ++t) {
        Rng r(Rng::derive(seed, 0xD12 + static_cast<std::uint64_t>(t)));
        CellFunction<double> f = CellFunction<double>::zero(sp);
        for (auto& v : f.values) v = r.next_unit();
        draws.push_back(std::move(f));
    }

    for (std::size_t i = 0; i < fams.size(); ++i) {
        const bool gok = fams[i].merged.gamma() >= Rational(1, 2);
        if (!gok) ++bad_gamma;
        std::int64_t viol = 0;
        for (const auto& f : draws) viol += verify_MV_domination({fams[i]}, f).violations;
        rep.add_row({static_cast<double>(i + 1),
                     static_cast<double>(fams[i].merged.size()), gok ? 1.0 : 0.0,
                     static_cast<double>(viol)});
        mv_viol += viol;
    }
    // pooled check across every direction at once
    for (const auto& f : draws) mv_viol += verify_MV_domination(fams, f).violations;

    rep.add_summary("directions", static_cast<double>(N));
    rep.add_summary("gamma_failures", static_cast<double>(bad_gamma));
    rep.add_summary("mv_violations", static_cast<double>(mv_viol));
    return rep;
}

// ===========================================================================
// Verification suite (CLI front door)
// ===========================================================================

/// Laminarity, certificate duality, portion validity, small-space rational
/// oracle agreement, generation decay, and the overlap tail — one row per
/// check with case and violation counts.
inline ExperimentReport verify_experiment(int dim, int depth, std::uint64_t seed) {
    const DyadicSpace sp = build_space(dim, depth);
    const std::vector<SparseCollection> fixtures = standard_sparse_fixtures(sp, seed, 8);

    ExperimentReport rep;
    rep.id = "verify";
    rep.seed = seed;
    rep.columns = {"check", "cases", "violations"};

    std::int64_t cases = 0, viol = 0;
    for (const auto& col : fixtures) {
        ++cases;
        if (!verify_laminar(col.space(), col.sets()).ok()) ++viol;
    }
    rep.add_row({0, static_cast<double>(cases), static_cast<double>(viol)});

    cases = viol = 0;
    for (const auto& col : fixtures) {
        ++cases;
        if (carleson_constant(col.family()) * col.gamma() != 1) ++viol;
    }
    rep.add_row({1, static_cast<double>(cases), static_cast<double>(viol)});

    cases = viol = 0;
    for (const auto& col : fixtures) {
        const auto& portions = col.portions();
        for (std::size_t i = 0; i < portions.size(); ++i) {
            ++cases;
            bool ok = portions[i].inside(col.set(i)) &&
                      portions[i].cell_mass() >= col.gamma() * col.set(i).cell_count();
            for (std::size_t j = 0; ok && j < portions.size(); ++j)
                if (j != i && !portions[i].disjoint_from(portions[j])) ok = false;
            if (!ok) ++viol;
        }
    }
    rep.add_row({2, static_cast<double>(cases), static_cast<double>(viol)});

    cases = viol = 0;
    if (sp.cell_count() <= (1 << 10)) {
        for (const auto& col : fixtures) {
            Rng r(Rng::derive(seed, 0x0AC1E));
            CellFunction<Rational> f = CellFunction<Rational>::zero(sp);
            for (auto& v : f.values)
                v = Rational(r.next_below(16), 1 + r.next_below(7));
            ++cases;
            if (apply_sparse(col, f).values != brute_sparse(sp, col.sets(), f).values)
                ++viol;
            ++cases;
            if (apply_maximal<Rational>(col.sets(), f).values !=
                brute_maximal(sp, col.sets(), f).values)
                ++viol;
        }
    }
    rep.add_row({3, static_cast<double>(cases), static_cast<double>(viol)});

    cases = viol = 0;
    for (const auto& col : fixtures) {
        const DecayCheck dc = check_generation_decay(col);
        cases += dc.checks;
        viol += dc.violations;
    }
    rep.add_row({4, static_cast<double>(cases), static_cast<double>(viol)});

    const ExperimentReport tails = tail_experiment(fixtures);
    rep.add_row({5, static_cast<double>(tails.rows.size()),
                 tails.summary_value("violations")});

    double total = 0;
    for (const auto& row : rep.rows) total += row[2];
    rep.add_summary("violations", total);
    return rep;
}

} // namespace sparselab
