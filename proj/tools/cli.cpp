#include "cli.hpp"

#include <cstdint>
#include <iostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <sparselab/sparselab.hpp>

namespace sparselab::cli {
namespace {

struct Options {
    int dim = 1;
    int depth = 8;
    double p = 2.0;
    std::vector<std::int64_t> n;
    double gamma = 0.5;
    std::vector<double> delta;
    std::uint64_t seed = kDefaultSeed;
    std::string ensemble = "shear";
    std::string out;
    std::string format = "csv";
};

constexpr const char* kFlagNames[] = {"dim",   "depth", "p",   "n",      "gamma",
                                      "delta", "seed",  "ensemble", "out", "format"};

void add_common_flags(CLI::App* sub, Options& o) {
    sub->add_option("--dim", o.dim, "space dimension");
    sub->add_option("--depth", o.depth, "dyadic depth per axis");
    sub->add_option("--p", o.p, "Lebesgue exponent");
    sub->add_option("--n", o.n, "family sizes, comma separated")->delimiter(',');
    sub->add_option("--gamma", o.gamma, "sparsity target");
    sub->add_option("--delta", o.delta, "delta values, comma separated")->delimiter(',');
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_option("--ensemble", o.ensemble, "ensemble kind: shear | axis");
    sub->add_option("--out", o.out, "output path (default: stdout)");
    sub->add_option("--format", o.format, "csv | json");
}

template <class T>
std::vector<T> json_list(const ordered_json& v) {
    std::vector<T> out;
    if (v.is_array())
        for (const auto& e : v) out.push_back(e.get<T>());
    else
        out.push_back(v.get<T>());
    return out;
}

// Config supplies defaults for flags the user did not pass on the command line.
void apply_config(const std::string& path, CLI::App* sub, Options& o,
                  std::set<std::string>& provided) {
    for (const char* f : kFlagNames)
        if (sub->count(std::string("--") + f) > 0) provided.insert(f);
    if (path.empty()) return;

    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(path));
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    try {
        for (const auto& [k, v] : j.items()) {
            if (provided.count(k)) continue;
            if (k == "dim")
                o.dim = v.get<int>();
            else if (k == "depth")
                o.depth = v.get<int>();
            else if (k == "p")
                o.p = v.get<double>();
            else if (k == "n")
                o.n = json_list<std::int64_t>(v);
            else if (k == "gamma")
                o.gamma = v.get<double>();
            else if (k == "delta")
                o.delta = json_list<double>(v);
            else if (k == "seed")
                o.seed = v.get<std::uint64_t>();
            else if (k == "ensemble")
                o.ensemble = v.get<std::string>();
            else if (k == "out")
                o.out = v.get<std::string>();
            else if (k == "format")
                o.format = v.get<std::string>();
            else
                throw std::invalid_argument("config: unknown key '" + k + "'");
            provided.insert(k);
        }
    } catch (const ordered_json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
}

struct Outcome {
    ExperimentReport report;
    bool pass = false;
};

Outcome run_verify(const Options& o) {
    ExperimentReport rep = verify_experiment(o.dim, o.depth, o.seed);
    const bool ok = rep.summary_value("violations") == 0.0;
    return {std::move(rep), ok};
}

Outcome run_tail(const Options& o) {
    const DyadicSpace sp = build_space(o.dim, o.depth);
    ExperimentReport rep = tail_experiment(standard_sparse_fixtures(sp, o.seed, 8));
    rep.seed = o.seed;
    const bool ok = rep.summary_value("violations") == 0.0;
    return {std::move(rep), ok};
}

Outcome run_scaling(const Options& o, const std::set<std::string>& provided) {
    EnsembleSpec ens;
    ens.kind = ensemble_kind_from_string(o.ensemble);
    if (ens.kind == EnsembleKind::Shear) {
        if (provided.count("dim") && o.dim != 2)
            throw std::invalid_argument("scaling: the shear ensemble lives on a 2-D space");
        ens.space = build_space(2, o.depth);
    } else {
        ens.space = build_space(o.dim, o.depth);
        ens.axis_gamma = o.gamma;
    }
    std::vector<std::int64_t> ns = o.n.empty() ? std::vector<std::int64_t>{2, 4, 8, 16} : o.n;
    ExperimentReport rep = scaling_experiment(o.p, std::move(ns), ens, o.seed);
    bool ok = !rep.rows.empty();
    for (const auto& row : rep.rows)
        for (double v : row)
            if (!std::isfinite(v)) ok = false;
    return {std::move(rep), ok};
}

Outcome run_sharpness(const Options& o, const std::set<std::string>& provided) {
    const std::vector<std::int64_t> ns =
        o.n.empty() ? std::vector<std::int64_t>{4, 8, 16, 32, 64, 128, 256} : o.n;
    const int depth_override = provided.count("depth") ? o.depth : -1;
    ExperimentReport rep = sharpness_experiment(ns, o.p, o.seed, depth_override);
    const bool ok = rep.summary_value("min_u_fraction") >= 0.3 &&
                    rep.summary_value("strictly_increasing") == 1.0;
    return {std::move(rep), ok};
}

Outcome run_lemma(const Options& o) {
    const std::vector<double> deltas =
        o.delta.empty()
            ? std::vector<double>{0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 1.0}
            : o.delta;
    ExperimentReport rep = lemma_delta_experiment(o.p, deltas, o.seed);
    bool ok = true;
    for (const auto& [k, v] : rep.summary) {
        if (k == "slope" && !(v >= 0.4 && v <= 0.6)) ok = false;
        if (k == "anchor_exact" && v != 1.0) ok = false;
    }
    return {std::move(rep), ok};
}

Outcome run_dominate(const Options& o, const std::set<std::string>& provided) {
    if (provided.count("dim") && o.dim != 1)
        throw std::invalid_argument("dominate: interval covers need a 1-D space");
    const DyadicSpace sp = build_space(1, o.depth);
    ExperimentReport rep = domination_experiment(interval_fixtures(sp, o.seed, 6), 3, o.seed);
    const bool ok = rep.summary_value("violations") == 0.0;
    return {std::move(rep), ok};
}

Outcome run_directional(const Options& o, const std::set<std::string>& provided) {
    if (provided.count("dim") && o.dim != 2)
        throw std::invalid_argument("directional: shear families need a 2-D space");
    const DyadicSpace sp = build_space(2, o.depth);
    const std::int64_t N = o.n.empty() ? 4 : o.n.front();
    ExperimentReport rep = directional_experiment(sp, N, 0.25, 3, o.seed);
    const bool ok = rep.summary_value("gamma_failures") == 0.0 &&
                    rep.summary_value("mv_violations") == 0.0;
    return {std::move(rep), ok};
}

int emit(const Outcome& res, const Options& o) {
    const std::string payload = report_to_string(res.report, o.format);
    const std::string line = res.report.id + ": rows=" + std::to_string(res.report.rows.size()) +
                             (res.pass ? " pass" : " FAIL") + "\n";
    if (o.out.empty()) {
        std::cout << payload;
        std::cerr << line;
    } else {
        write_text_file(o.out, payload);
        std::cout << line;
    }
    return res.pass ? 0 : 1;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"desk-scale laboratory for sparse operators on dyadic spaces"};
    app.require_subcommand(1);

    Options o;
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with default flag values");

    for (const char* name : {"verify", "tail", "scaling", "sharpness", "lemma",
                             "dominate", "directional"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON file with default flag values");
        add_common_flags(sub, o);
    }
    app.get_subcommand("verify")->description("laminarity, duality, oracle and tail suites");
    app.get_subcommand("tail")->description("exponential overlap tail on seeded fixtures");
    app.get_subcommand("scaling")->description("witnessed norm ratios across family sizes");
    app.get_subcommand("sharpness")->description("lower-bound construction for the family max");
    app.get_subcommand("lemma")->description("delta scaling of the redirected sparse operator");
    app.get_subcommand("dominate")->description("shifted-grid martingale domination");
    app.get_subcommand("directional")->description("shear families and maximal domination");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        std::set<std::string> provided;
        apply_config(config_path, sub, o, provided);

        const std::string& name = sub->get_name();
        Outcome res;
        if (name == "verify")
            res = run_verify(o);
        else if (name == "tail")
            res = run_tail(o);
        else if (name == "scaling")
            res = run_scaling(o, provided);
        else if (name == "sharpness")
            res = run_sharpness(o, provided);
        else if (name == "lemma")
            res = run_lemma(o);
        else if (name == "dominate")
            res = run_dominate(o, provided);
        else
            res = run_directional(o, provided);
        return emit(res, o);
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::length_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("sparselab");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace sparselab::cli
