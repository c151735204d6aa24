// patchbound: run the experiments and the verification suite.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "patchbound/experiments.hpp"

namespace pe = patchbound::experiments;

namespace {

void print_counterexample(const pe::CounterexampleResult& ce)
{
    std::printf("eigenvalues of P^-1 (A + B):\n");
    for (const auto& z : ce.spectrum.values)
        std::printf("  %.3f %+.3fi\n", z.real(), z.imag());
    std::printf("dof  alpha_min  alpha_max  beta_max\n");
    for (std::size_t j = 0; j < ce.bounds.alpha_min.size(); ++j)
        std::printf("%3zu  %9g  %9g  %8g\n", j + 1, ce.bounds.alpha_min[j], ce.bounds.alpha_max[j],
                    ce.bounds.beta_max[j]);
    std::printf("global rectangle [%g, %g] x [-%gi, %gi]\n", ce.bounds.bounds.alpha_min, ce.bounds.bounds.alpha_max,
                ce.bounds.bounds.beta_max, ce.bounds.bounds.beta_max);
    std::printf("outside all per-patch rectangles: %s\n", ce.outside_all_patch_rectangles ? "true" : "false");
    std::printf("inside global rectangle: %s\n", ce.inside_global_rectangle ? "true" : "false");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Patch-based eigenvalue bounds for preconditioned finite element systems"};
    app.require_subcommand(1);

    pe::Config cfg;
    std::string experiment, ref = "ap1", diag = "ll-ur", method = "cg", out = "out";
    std::vector<patchbound::Index> sizes;
    bool no_oracle = false;

    auto* run = app.add_subcommand("run", "run one experiment and write its tables");
    run->add_option("experiment", experiment, "ex1-galerkin | ex1-dg | ex2-figure | ex3-nonsym | counterexample")
        ->required()
        ->check(CLI::IsMember({"ex1-galerkin", "ex1-dg", "ex2-figure", "ex3-nonsym", "counterexample"}));
    run->add_option("--n", sizes, "comma separated mesh sizes N (N x N squares)")
        ->delimiter(',')
        ->check(CLI::Validator(
            [](std::string& v) {
                std::size_t used = 0;
                long long n = 0;
                try {
                    n = std::stoll(v, &used);
                } catch (const std::exception&) {
                }
                return used == v.size() && n > 0 ? std::string() : "mesh sizes must be positive integers: '" + v + "'";
            },
            "POSITIVE"));
    run->add_option("--c-sigma", cfg.c_sigma, "SIPG penalty constant (> 1)")->capture_default_str();
    run->add_option("--ref", ref, "reference data of the preconditioner")
        ->check(CLI::IsMember({"ap1", "ap2", "none"}))
        ->capture_default_str();
    run->add_option("--diag", diag, "cell diagonal")->check(CLI::IsMember({"ll-ur", "lr-ul"}))->capture_default_str();
    run->add_option("--test", cfg.test, "ex2-figure test problem")->check(CLI::Range(1, 3))->capture_default_str();
    run->add_option("--method", method, "ex2-figure discretization")
        ->check(CLI::IsMember({"cg", "dg"}))
        ->capture_default_str();
    run->add_option("--boundary-flux-weight", cfg.boundary_flux_weight,
                    "weight of the flux average on boundary edges (SIPG)")
        ->capture_default_str();
    run->add_option("--cg-tol", cfg.cg_tol, "CG residual reduction")->capture_default_str();
    run->add_option("--gmres-tol", cfg.gmres_tol, "GMRES relative residual")->capture_default_str();
    run->add_option("--maxit", cfg.maxit, "iteration limit")->capture_default_str();
    run->add_flag("--no-oracle", no_oracle, "skip the dense eigenvalue oracles");
    run->add_flag("--dump-matrices", cfg.dump_matrices, "write A, B, P in Matrix Market format");
    run->add_option("--out", out, "output directory")->capture_default_str();

    pe::VerifyOptions vopts;
    auto* verify = app.add_subcommand("verify", "check bounds against the oracles; nonzero exit on failure");
    verify->add_flag("--swap-gamma", vopts.swap_gamma, "negative control: exchange lower and upper bounds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*verify) {
            const auto rep = pe::verify(vopts);
            for (const auto& c : rep.checks)
                std::printf("%s  %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
            std::printf("%s\n", rep.passed() ? "verify: all checks passed" : "verify: FAILED");
            return rep.passed() ? 0 : 1;
        }

        cfg.experiment = pe::parse_experiment(experiment);
        cfg.sizes = sizes;
        if (ref == "none")
            cfg.reference.reset();
        else
            cfg.reference = ref == "ap1" ? 1 : 2;
        cfg.diagonal = diag == "ll-ur" ? patchbound::Diagonal::lower_left_upper_right
                                       : patchbound::Diagonal::lower_right_upper_left;
        cfg.method = method == "dg" ? pe::Method::dg : pe::Method::cg;
        cfg.oracle = !no_oracle;
        cfg.out = out;

        const auto res = pe::run(cfg);
        if (res.counterexample) {
            print_counterexample(*res.counterexample);
        } else {
            pe::write_table_csv(std::cout, res.rows);
        }
        int status = 0;
        for (const auto& r : res.rows)
            if (!r.error.empty()) {
                std::fprintf(stderr, "N=%td: %s\n", r.n, r.error.c_str());
                status = 1;
            }
        for (const auto& f : res.files)
            std::fprintf(stderr, "wrote %s\n", f.c_str());
        return status;
    } catch (const patchbound::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
