#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rational.hpp"
#include "rng.hpp"
#include "space.hpp"

namespace sparselab {

// ===========================================================================
// Laminar (martingale) families and their containment forest
// ===========================================================================

/// Straddling pair found by verify_laminar; indices refer to the input order.
struct LaminarViolation {
    std::size_t first = 0;
    std::size_t second = 0;
    std::int64_t intersection_cells = 0;
};

// A family of sets in which any two members are nested or disjoint, together
// with its containment forest.  Sets keep their construction order; children
// and roots are sorted spatially (by leftmost cell) for deterministic
// traversal.  Duplicates and empty members are rejected up front.
class MartingaleCollection {
public:
    MartingaleCollection() = default;

    /// Build from a family already known (or required) to be laminar.
    /// Throws std::invalid_argument on empty/duplicate members and
    /// std::domain_error if a straddling pair is found.
    static MartingaleCollection from_laminar(const DyadicSpace& space,
                                             std::vector<MeasSet> sets) {
        MartingaleCollection c;
        if (auto v = c.init(space, std::move(sets)))
            throw std::domain_error("collection is not laminar (sets " +
                                    std::to_string(v->first) + ", " +
                                    std::to_string(v->second) + " straddle)");
        return c;
    }

    const DyadicSpace& space() const { return space_; }
    std::size_t size() const { return sets_.size(); }
    bool empty() const { return sets_.empty(); }
    const std::vector<MeasSet>& sets() const { return sets_; }
    const MeasSet& set(std::size_t i) const { return sets_[i]; }

    int parent(std::size_t i) const { return parent_[i]; }
    const std::vector<int>& children(std::size_t i) const { return children_[i]; }
    const std::vector<int>& roots() const { return roots_; }

    /// Total cell count of every member contained in set(i) (incl. itself).
    std::int64_t subtree_cells(std::size_t i) const { return subtree_cells_[i]; }

    /// Indices in post order (children before parents).
    const std::vector<int>& post_order() const { return post_order_; }

    std::optional<std::size_t> index_of(const MeasSet& s) const {
        for (std::size_t i = 0; i < sets_.size(); ++i)
            if (sets_[i] == s) return i;
        return std::nullopt;
    }

private:
    friend std::optional<LaminarViolation> try_build(const DyadicSpace&,
                                                     std::vector<MeasSet>,
                                                     MartingaleCollection&);

    // Places each set into the forest, largest first.  Returns a violation
    // instead of a forest if two members straddle.
    std::optional<LaminarViolation> init(const DyadicSpace& space,
                                         std::vector<MeasSet> sets) {
        space_ = space;
        for (const auto& s : sets) {
            if (s.empty())
                throw std::invalid_argument("collection member must be nonempty");
            if (s.max_cell() >= space.cell_count())
                throw std::invalid_argument("collection member exceeds the space");
        }
        for (std::size_t i = 0; i < sets.size(); ++i)
            for (std::size_t j = i + 1; j < sets.size(); ++j)
                if (sets[i] == sets[j])
                    throw std::invalid_argument("duplicate set in collection");

        sets_ = std::move(sets);
        const std::size_t n = sets_.size();
        parent_.assign(n, -1);
        children_.assign(n, {});
        subtree_cells_.assign(n, 0);

        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            auto ca = sets_[static_cast<std::size_t>(a)].cell_count();
            auto cb = sets_[static_cast<std::size_t>(b)].cell_count();
            return ca != cb ? ca > cb : a < b;
        });

        for (int idx : order) {
            const MeasSet& a = sets_[static_cast<std::size_t>(idx)];
            // descend from the roots until nothing contains `a`
            int host = -1; // current containing node, -1 = virtual top
            bool descended = true;
            while (descended) {
                descended = false;
                const std::vector<int>& sibs = (host < 0) ? roots_ : children_[static_cast<std::size_t>(host)];
                for (int s : sibs) {
                    const MeasSet& r = sets_[static_cast<std::size_t>(s)];
                    const std::int64_t c = a.intersection_count(r);
                    if (c == 0) continue;
                    if (c == a.cell_count()) { // a ⊆ r (insertion order makes r the larger)
                        host = s;
                        descended = true;
                        break;
                    }
                    const auto i = static_cast<std::size_t>(std::min(idx, s));
                    const auto j = static_cast<std::size_t>(std::max(idx, s));
                    return LaminarViolation{i, j, c};
                }
            }
            if (host < 0)
                roots_.push_back(idx);
            else {
                parent_[static_cast<std::size_t>(idx)] = host;
                children_[static_cast<std::size_t>(host)].push_back(idx);
            }
        }

        auto spatial = [&](int a, int b) {
            return sets_[static_cast<std::size_t>(a)].min_cell() <
                   sets_[static_cast<std::size_t>(b)].min_cell();
        };
        std::sort(roots_.begin(), roots_.end(), spatial);
        for (auto& ch : children_) std::sort(ch.begin(), ch.end(), spatial);

        // post order + subtree weights via an explicit stack
        post_order_.clear();
        post_order_.reserve(n);
        std::vector<std::pair<int, std::size_t>> stack; // (node, next child slot)
        for (int r : roots_) {
            stack.emplace_back(r, 0);
            while (!stack.empty()) {
                auto& [node, slot] = stack.back();
                const auto& ch = children_[static_cast<std::size_t>(node)];
                if (slot < ch.size()) {
                    stack.emplace_back(ch[slot++], 0);
                } else {
                    post_order_.push_back(node);
                    std::int64_t w = sets_[static_cast<std::size_t>(node)].cell_count();
                    for (int c : ch) w += subtree_cells_[static_cast<std::size_t>(c)];
                    subtree_cells_[static_cast<std::size_t>(node)] = w;
                    stack.pop_back();
                }
            }
        }
        return std::nullopt;
    }

    DyadicSpace space_;
    std::vector<MeasSet> sets_;
    std::vector<int> parent_;
    std::vector<std::vector<int>> children_;
    std::vector<int> roots_;
    std::vector<std::int64_t> subtree_cells_;
    std::vector<int> post_order_;
};

/// Outcome of verify_laminar: either a forest or the first violating pair
/// (in input order).
struct LaminarCheck {
    std::optional<MartingaleCollection> collection;
    std::optional<LaminarViolation> violation;

    bool ok() const { return collection.has_value(); }
};

inline LaminarCheck verify_laminar(const DyadicSpace& space,
                                   std::vector<MeasSet> sets) {
    // input-order pair scan so the *first* violating pair gets reported
    for (std::size_t i = 0; i < sets.size(); ++i)
        for (std::size_t j = i + 1; j < sets.size(); ++j) {
            const std::int64_t c = sets[i].intersection_count(sets[j]);
            if (c == 0) continue;
            if (c == sets[i].cell_count() || c == sets[j].cell_count()) continue;
            return {std::nullopt, LaminarViolation{i, j, c}};
        }
    return {MartingaleCollection::from_laminar(space, std::move(sets)), std::nullopt};
}

// ===========================================================================
// Sparsity certificates
// ===========================================================================

/// Half-open interval with rational endpoints, in cell coordinates: the point
/// u ∈ [0, cell_count) sits at fraction u - floor(u) inside cell floor(u).
struct RationalInterval {
    Rational lo, hi;
    Rational mass() const { return hi - lo; }
};

// A measurable (not cell-aligned) subset used as sparsity portion E_S: a
// finite union of rational-endpoint intervals.  Exact mass queries only.
class PortionSet {
public:
    PortionSet() = default;
    explicit PortionSet(std::vector<RationalInterval> iv) : iv_(std::move(iv)) {
        std::sort(iv_.begin(), iv_.end(),
                  [](const RationalInterval& a, const RationalInterval& b) {
                      return a.lo < b.lo;
                  });
        std::vector<RationalInterval> out;
        for (auto& r : iv_) {
            if (r.hi <= r.lo) continue;
            if (!out.empty() && r.lo <= out.back().hi)
                out.back().hi = std::max(out.back().hi, r.hi);
            else
                out.push_back(r);
        }
        iv_ = std::move(out);
    }

    const std::vector<RationalInterval>& intervals() const { return iv_; }

    /// Total mass in cell units (multiply by cell_measure for the measure).
    Rational cell_mass() const {
        Rational m = 0;
        for (const auto& r : iv_) m += r.mass();
        return m;
    }

    Rational measure(const DyadicSpace& s) const {
        return cell_mass() * pow2_rational(-s.dim * s.depth);
    }

    /// Does every interval lie inside the cell runs of `host`?
    bool inside(const MeasSet& host) const {
        auto runs = host.ranges();
        for (const auto& r : iv_) {
            bool placed = false;
            for (const auto& run : runs)
                if (Rational(run.begin) <= r.lo && r.hi <= Rational(run.end)) {
                    placed = true;
                    break;
                }
            if (!placed) return false;
        }
        return true;
    }

    bool disjoint_from(const PortionSet& other) const {
        auto a = iv_.begin();
        auto b = other.iv_.begin();
        while (a != iv_.end() && b != other.iv_.end()) {
            if (std::max(a->lo, b->lo) < std::min(a->hi, b->hi)) return false;
            (a->hi < b->hi) ? ++a : ++b;
        }
        return true;
    }

private:
    std::vector<RationalInterval> iv_;
};

/// Best sparsity constant of a laminar family plus a portion assignment
/// achieving it.
struct SparsityCertificate {
    Rational gamma_max = 1;
    std::vector<PortionSet> portions; // parallel to collection.sets()
};

namespace detail {

inline std::vector<RationalInterval> to_intervals(const MeasSet& s) {
    std::vector<RationalInterval> iv;
    iv.reserve(s.ranges().size());
    for (const auto& r : s.ranges())
        iv.push_back({Rational(r.begin), Rational(r.end)});
    return iv;
}

} // namespace detail

/// gamma_max = min over members R of  mu(R) / sum_{S ⊆ R} mu(S);  for laminar
/// families disjoint portions of fraction gamma exist exactly when gamma is
/// at most this value, and the bottom-up greedy below constructs them.
inline SparsityCertificate max_sparsity(const MartingaleCollection& col) {
    SparsityCertificate cert;
    const std::size_t n = col.size();
    cert.portions.assign(n, PortionSet{});
    if (n == 0) return cert;

    cert.gamma_max = 1;
    for (std::size_t i = 0; i < n; ++i) {
        Rational ratio(col.set(i).cell_count(), col.subtree_cells(i));
        cert.gamma_max = std::min(cert.gamma_max, ratio);
    }

    // Bottom-up greedy: each node claims gamma*|R| mass from whatever its
    // subtree has not claimed yet, lowest coordinates first.
    std::vector<std::vector<RationalInterval>> free_below(n);
    for (int node : col.post_order()) {
        const auto ui = static_cast<std::size_t>(node);
        MeasSet child_union;
        for (int c : col.children(ui))
            child_union = child_union.unite(col.set(static_cast<std::size_t>(c)));
        std::vector<RationalInterval> pool =
            detail::to_intervals(col.set(ui).setminus(child_union));
        for (int c : col.children(ui)) {
            auto& fb = free_below[static_cast<std::size_t>(c)];
            pool.insert(pool.end(), fb.begin(), fb.end());
            fb.clear();
            fb.shrink_to_fit();
        }
        std::sort(pool.begin(), pool.end(),
                  [](const RationalInterval& a, const RationalInterval& b) {
                      return a.lo < b.lo;
                  });

        Rational need = cert.gamma_max * col.set(ui).cell_count();
        std::vector<RationalInterval> taken;
        std::vector<RationalInterval> rest;
        for (auto& r : pool) {
            if (need == 0) {
                rest.push_back(r);
                continue;
            }
            const Rational m = r.mass();
            if (m <= need) {
                taken.push_back(r);
                need -= m;
            } else {
                taken.push_back({r.lo, r.lo + need});
                rest.push_back({r.lo + need, r.hi});
                need = 0;
            }
        }
        if (need != 0)
            throw std::logic_error("max_sparsity: greedy ran short of mass");
        cert.portions[ui] = PortionSet(std::move(taken));
        free_below[ui] = std::move(rest);
    }
    return cert;
}

/// Independent dual certificate: max over R of sum_{S ⊆ R} mu(S) / mu(R),
/// via pairwise containment scans (no forest involved).
inline Rational carleson_constant(const MartingaleCollection& col) {
    Rational best = 0;
    for (std::size_t i = 0; i < col.size(); ++i) {
        std::int64_t acc = 0;
        for (std::size_t j = 0; j < col.size(); ++j)
            if (col.set(j).subset_of(col.set(i))) acc += col.set(j).cell_count();
        best = std::max(best, Rational(acc, col.set(i).cell_count()));
    }
    return best;
}

// ===========================================================================
// SparseCollection: laminar family + sparsity certificate
// ===========================================================================

class SparseCollection {
public:
    SparseCollection() = default;

    explicit SparseCollection(MartingaleCollection family)
        : family_(std::move(family)) {
        gamma_ = 1;
        for (std::size_t i = 0; i < family_.size(); ++i)
            gamma_ = std::min(
                gamma_, Rational(family_.set(i).cell_count(), family_.subtree_cells(i)));
    }

    static SparseCollection from_sets(const DyadicSpace& space,
                                      std::vector<MeasSet> sets) {
        return SparseCollection(MartingaleCollection::from_laminar(space, std::move(sets)));
    }

    const MartingaleCollection& family() const { return family_; }
    const DyadicSpace& space() const { return family_.space(); }
    std::size_t size() const { return family_.size(); }
    const std::vector<MeasSet>& sets() const { return family_.sets(); }
    const MeasSet& set(std::size_t i) const { return family_.set(i); }

    /// Certified sparsity constant (gamma_max of the family).
    const Rational& gamma() const { return gamma_; }

    /// Portion assignment achieving gamma(); computed on first use.
    const std::vector<PortionSet>& portions() const {
        if (!portions_ready_) {
            portions_ = max_sparsity(family_).portions;
            portions_ready_ = true;
        }
        return portions_;
    }

private:
    MartingaleCollection family_;
    Rational gamma_ = 1;
    mutable std::vector<PortionSet> portions_;
    mutable bool portions_ready_ = false;
};

// ===========================================================================
// Generations
// ===========================================================================

/// Members exactly j containment steps below R inside the family (forest
/// descendants at edge distance j); j = 0 gives {R} itself.
inline std::vector<MeasSet> generations(const MartingaleCollection& col,
                                        const MeasSet& R, int j) {
    if (j < 0) throw std::domain_error("generations: j must be >= 0");
    auto idx = col.index_of(R);
    if (!idx) throw std::domain_error("generations: R is not a member");
    std::vector<int> frontier{static_cast<int>(*idx)};
    for (int step = 0; step < j && !frontier.empty(); ++step) {
        std::vector<int> next;
        for (int node : frontier) {
            const auto& ch = col.children(static_cast<std::size_t>(node));
            next.insert(next.end(), ch.begin(), ch.end());
        }
        frontier = std::move(next);
    }
    std::vector<MeasSet> out;
    out.reserve(frontier.size());
    for (int node : frontier) out.push_back(col.set(static_cast<std::size_t>(node)));
    return out;
}

inline std::vector<MeasSet> generations(const SparseCollection& col,
                                        const MeasSet& R, int j) {
    return generations(col.family(), R, j);
}

/// Union of the j-th generation; empty MeasSet once the depth is exhausted.
inline MeasSet generation_union(const MartingaleCollection& col,
                                const MeasSet& R, int j) {
    MeasSet u;
    for (const auto& s : generations(col, R, j)) u = u.unite(s);
    return u;
}

inline MeasSet generation_union(const SparseCollection& col,
                                const MeasSet& R, int j) {
    return generation_union(col.family(), R, j);
}

// ===========================================================================
// Builders
// ===========================================================================

/// Chooses which child cube a tower descends into at each level.
class ChildSelector {
public:
    static ChildSelector always_left() { return ChildSelector(); }
    static ChildSelector seeded(std::uint64_t seed) {
        ChildSelector s;
        s.rng_.emplace(seed);
        return s;
    }

    int pick(int n_children) {
        if (!rng_) return 0;
        return static_cast<int>(rng_->next_below(static_cast<std::uint64_t>(n_children)));
    }

private:
    std::optional<Rng> rng_;
};

/// Nested chain start = R_0 ⊃ R_1 ⊃ ... ⊃ R_m, each step one dyadic child.
inline SparseCollection build_tower(const DyadicSpace& space, const DyadicCube& start,
                                    int m, ChildSelector selector = ChildSelector::always_left()) {
    check_cube(space, start);
    if (m < 0 || start.level + m > space.depth)
        throw std::domain_error("build_tower: depth m exceeds remaining levels");
    std::vector<MeasSet> sets;
    sets.reserve(static_cast<std::size_t>(m) + 1);
    DyadicCube cur = start;
    sets.push_back(cube_cells(space, cur));
    for (int j = 0; j < m; ++j) {
        auto kids = cube_children(space, cur);
        cur = kids[static_cast<std::size_t>(selector.pick(static_cast<int>(kids.size())))];
        sets.push_back(cube_cells(space, cur));
    }
    return SparseCollection::from_sets(space, std::move(sets));
}

/// Overload taking the starting cube as its cell set.
inline SparseCollection build_tower(const DyadicSpace& space, const MeasSet& start,
                                    int m, ChildSelector selector = ChildSelector::always_left()) {
    // recover the cube: level from the cell count, corner from the first cell
    const std::int64_t count = start.cell_count();
    int back = 0;
    while ((std::int64_t{1} << (space.dim * back)) < count) ++back;
    if ((std::int64_t{1} << (space.dim * back)) != count || back > space.depth)
        throw std::domain_error("build_tower: start is not a dyadic cube");
    const int level = space.depth - back;
    const std::int64_t w = std::int64_t{1} << back;
    DyadicCube q{level, {}};
    std::int64_t rem = start.min_cell();
    q.coord.assign(static_cast<std::size_t>(space.dim), 0);
    for (int a = space.dim - 1; a >= 0; --a) {
        q.coord[static_cast<std::size_t>(a)] = (rem % space.cells_per_axis()) / w;
        rem /= space.cells_per_axis();
    }
    if (cube_cells(space, q) != start)
        throw std::domain_error("build_tower: start is not a dyadic cube");
    return build_tower(space, q, m, std::move(selector));
}

/// Random laminar family of dyadic cubes with certified sparsity at least
/// `target_gamma`.  Each member's immediate sub-members occupy at most a
/// (1 - gamma) fraction of it, which also forces geometric generation decay
/// whenever target_gamma >= 1/2.
inline SparseCollection build_random_sparse(const DyadicSpace& space, std::uint64_t seed,
                                            double target_gamma, std::size_t count) {
    if (!(target_gamma > 0.0) || !(target_gamma < 1.0))
        throw std::domain_error("build_random_sparse: target gamma must be in (0,1)");
    if (count == 0) return SparseCollection{};

    Rng rng(seed);
    const Rational gamma(static_cast<std::int64_t>(std::ldexp(target_gamma, 40)),
                         std::int64_t{1} << 40); // exact binary rounding of the target

    struct Node {
        DyadicCube cube;
        Rational budget; // cells still available to immediate sub-members
    };

    std::vector<MeasSet> sets;
    std::vector<Node> active;
    const DyadicCube root = root_cube(space);
    sets.push_back(cube_cells(space, root));
    active.push_back({root, (Rational(1) - gamma) * cube_cells(space, root).cell_count()});

    while (sets.size() < count) {
        // drop nodes whose budget cannot fit even one deepest-level cube
        std::vector<Node> usable;
        for (auto& nd : active) {
            const int room = space.depth - nd.cube.level;
            if (room >= 1 && nd.budget >= 1) usable.push_back(nd);
        }
        active = std::move(usable);
        if (active.empty())
            throw std::domain_error("build_random_sparse: target infeasible at this depth");

        const std::size_t pick = rng.next_below(active.size());
        Node nd = active[pick];
        active.erase(active.begin() + static_cast<std::int64_t>(pick));

        // sample a descendant cube of nd.cube fitting the remaining budget;
        // it must avoid every member already strictly inside nd.cube so that
        // it really is a direct sub-member (budgets stay per-node honest)
        const int room = space.depth - nd.cube.level;
        const std::int64_t nd_cells = std::int64_t{1}
                                      << (space.dim * (space.depth - nd.cube.level));
        std::vector<int> downs; // descent depths whose cubes fit the budget
        for (int dn = 1; dn <= std::min(room, 3); ++dn)
            if (Rational(nd_cells >> (space.dim * dn)) <= nd.budget) downs.push_back(dn);
        auto try_place = [&](const DyadicCube& cand) {
            MeasSet cells = cube_cells(space, cand);
            for (const auto& s : sets)
                if (s.cell_count() < nd_cells && s.intersects(cells)) return false;
            nd.budget -= cells.cell_count();
            active.push_back({cand, (Rational(1) - gamma) * cells.cell_count()});
            sets.push_back(std::move(cells));
            return true;
        };

        bool placed = false;
        for (int attempt = 0; !downs.empty() && attempt < 12 && !placed; ++attempt) {
            const int down = downs[rng.next_below(downs.size())];
            DyadicCube cand{nd.cube.level + down, nd.cube.coord};
            for (auto& c : cand.coord)
                c = (c << down) + static_cast<std::int64_t>(
                                      rng.next_below(std::uint64_t{1} << down));
            placed = try_place(cand);
        }
        // random attempts can all collide, and tight budgets may only fit
        // cubes deeper than the quick attempts reach; sweep every feasible
        // candidate from a seeded offset so a node only retires when it
        // truly has no room left
        std::vector<int> sweep_downs;
        for (int dn = 1; dn <= room; ++dn)
            if (Rational(nd_cells >> (space.dim * dn)) <= nd.budget)
                sweep_downs.push_back(dn);
        for (std::size_t di = 0; di < sweep_downs.size() && !placed; ++di) {
            const int down = sweep_downs[di];
            const std::uint64_t per_axis = std::uint64_t{1} << down;
            std::uint64_t total = 1;
            for (int a = 0; a < space.dim; ++a) total *= per_axis;
            const std::uint64_t start = rng.next_below(total);
            for (std::uint64_t k = 0; k < total && !placed; ++k) {
                std::uint64_t code = (start + k) % total;
                DyadicCube cand{nd.cube.level + down, nd.cube.coord};
                for (int a = space.dim - 1; a >= 0; --a) {
                    cand.coord[static_cast<std::size_t>(a)] =
                        (cand.coord[static_cast<std::size_t>(a)] << down) +
                        static_cast<std::int64_t>(code % per_axis);
                    code /= per_axis;
                }
                placed = try_place(cand);
            }
        }
        // a node that even the sweep cannot serve will never fit anything
        // later (budgets only shrink, members only accumulate), so retire it
        if (placed) active.push_back(nd);
    }

    SparseCollection result =
        SparseCollection::from_sets(space, std::move(sets));
    if (result.gamma() < gamma)
        throw std::logic_error("build_random_sparse: certificate below target");
    return result;
}

} // namespace sparselab
