#pragma once

// Experiment drivers behind the patchbound CLI: table rows, CSV/SVG artifacts,
// the counterexample and the verify suite.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "patchbound/bounds.hpp"
#include "patchbound/cholesky.hpp"
#include "patchbound/error.hpp"
#include "patchbound/krylov.hpp"
#include "patchbound/mesh.hpp"
#include "patchbound/problems.hpp"
#include "patchbound/sparse.hpp"
#include "patchbound/spectrum.hpp"

namespace patchbound::experiments {

enum class Experiment { ex1_galerkin, ex1_dg, ex2_figure, ex3_nonsym, counterexample };
enum class Method { cg, dg };

inline const std::array<std::pair<Experiment, const char*>, 5> experiment_names{{
    {Experiment::ex1_galerkin, "ex1-galerkin"},
    {Experiment::ex1_dg, "ex1-dg"},
    {Experiment::ex2_figure, "ex2-figure"},
    {Experiment::ex3_nonsym, "ex3-nonsym"},
    {Experiment::counterexample, "counterexample"},
}};

inline std::string to_string(Experiment e)
{
    for (const auto& [k, v] : experiment_names)
        if (k == e)
            return v;
    return "?";
}

inline Experiment parse_experiment(const std::string& s)
{
    for (const auto& [k, v] : experiment_names)
        if (s == v)
            return k;
    throw InvalidArgument("unknown experiment '" + s + "'");
}

struct Config {
    Experiment experiment = Experiment::ex1_galerkin;
    std::vector<Index> sizes; ///< empty: the experiment's default sizes
    double c_sigma = 2.0;
    std::optional<int> reference = 1; ///< 1 or 2; empty runs without preconditioner
    int test = 1;                     ///< ex2-figure test problem
    Method method = Method::cg;       ///< ex2-figure discretization
    Diagonal diagonal = Diagonal::lower_left_upper_right;
    double boundary_flux_weight = 1.0;
    double cg_tol = 1e-6;
    double gmres_tol = 1e-8;
    int maxit = 20000;
    bool oracle = true;
    std::filesystem::path out; ///< empty: no files
    bool dump_matrices = false;
};

inline std::vector<Index> default_sizes(Experiment e)
{
    switch (e) {
    case Experiment::ex2_figure:
        return {10};
    case Experiment::ex3_nonsym:
        return {10, 30, 50, 70};
    case Experiment::counterexample:
        return {};
    default:
        return {10, 20, 30, 40};
    }
}

inline std::vector<Index> sizes_of(const Config& cfg)
{
    return cfg.sizes.empty() ? default_sizes(cfg.experiment) : cfg.sizes;
}

/// One line of table.csv. Empty optionals are written as empty cells.
struct TableRow {
    Index n = 0;
    std::optional<double> kappa_A;
    std::optional<double> kappa_PA;
    std::optional<double> bound_ratio;
    std::optional<double> lam_im_max;
    std::optional<double> beta_max;
    std::optional<int> iters;
    std::string error;
};

struct SymmetricRecord {
    Index n = 0;
    BoundsVectors bounds;
    std::optional<Spectrum> spectrum;
};

struct NonsymRecord {
    Index n = 0;
    NonSymBounds bounds;
    std::optional<Spectrum> spectrum;
};

struct CounterexampleResult {
    NonSymmetricBounds bounds;
    Spectrum spectrum;
    bool outside_all_patch_rectangles = false; ///< some eigenvalue lies in no per-DOF rectangle
    bool inside_global_rectangle = false;
};

struct RunResult {
    std::vector<TableRow> rows;
    std::vector<SymmetricRecord> symmetric;
    std::vector<NonsymRecord> nonsymmetric;
    std::optional<CounterexampleResult> counterexample;
    std::vector<std::string> files;
};

inline std::string fmt6(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

namespace detail {

inline std::string cell(const std::optional<double>& v) { return v ? fmt6(*v) : std::string(); }
inline std::string cell(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

inline bool in_rectangle(std::complex<double> z, double re_lo, double re_hi, double im_max, double slack)
{
    return z.real() >= re_lo - slack && z.real() <= re_hi + slack && std::abs(z.imag()) <= im_max + slack;
}

/// Tolerance used for containment of oracle eigenvalues in bounds.
inline double slack_for(double scale) { return 1e-9 * std::max(1.0, std::abs(scale)); }

} // namespace detail

inline void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows)
{
    os << "N,kappa_A,kappa_PA,bound_ratio,lam_im_max,beta_max,iters\n";
    for (const auto& r : rows)
        os << r.n << ',' << detail::cell(r.kappa_A) << ',' << detail::cell(r.kappa_PA) << ','
           << detail::cell(r.bound_ratio) << ',' << detail::cell(r.lam_im_max) << ',' << detail::cell(r.beta_max)
           << ',' << detail::cell(r.iters) << '\n';
}

inline void write_spectrum_rows(std::ostream& os, Index n, const Spectrum& s)
{
    for (std::size_t i = 0; i < s.values.size(); ++i)
        os << n << ',' << i << ',' << fmt6(s.values[i].real()) << ',' << fmt6(s.values[i].imag()) << '\n';
}

// SVG plots: sorted eigenvalues between bound curves, or complex eigenvalues
// against rectangles.

namespace svg {

struct Frame {
    double x0, x1, y0, y1;
    double width = 640, height = 420, margin = 50;

    double px(double x) const { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); }
    double py(double y) const { return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin); }
};

inline Frame padded(double x0, double x1, double y0, double y1)
{
    if (x1 <= x0)
        x1 = x0 + 1.0;
    if (y1 <= y0)
        y1 = y0 + 1.0;
    const double dx = 0.04 * (x1 - x0), dy = 0.06 * (y1 - y0);
    return {x0 - dx, x1 + dx, y0 - dy, y1 + dy};
}

inline void open(std::ostream& os, const Frame& f, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel)
{
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<rect x=\"" << f.margin << "\" y=\"" << f.margin << "\" width=\"" << f.width - 2 * f.margin
       << "\" height=\"" << f.height - 2 * f.margin << "\" fill=\"none\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << f.width / 2 << "\" y=\"" << f.margin / 2 << "\" text-anchor=\"middle\">" << title
       << "</text>\n";
    os << "<text x=\"" << f.width / 2 << "\" y=\"" << f.height - 12 << "\" text-anchor=\"middle\">" << xlabel
       << "</text>\n";
    os << "<text x=\"14\" y=\"" << f.height / 2 << "\" transform=\"rotate(-90 14 " << f.height / 2
       << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double x = f.x0 + (f.x1 - f.x0) * k / 4.0, y = f.y0 + (f.y1 - f.y0) * k / 4.0;
        os << "<text x=\"" << f.px(x) << "\" y=\"" << f.height - f.margin + 16 << "\" text-anchor=\"middle\">"
           << fmt6(x) << "</text>\n";
        os << "<text x=\"" << f.margin - 4 << "\" y=\"" << f.py(y) + 4 << "\" text-anchor=\"end\">" << fmt6(y)
           << "</text>\n";
    }
}

inline void polyline(std::ostream& os, const Frame& f, const std::vector<double>& ys, const char* color)
{
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ys.size(); ++i)
        os << f.px(static_cast<double>(i)) << ',' << f.py(ys[i]) << ' ';
    os << "\"/>\n";
}

inline void rect(std::ostream& os, const Frame& f, double re0, double re1, double im, const char* color,
                 double width)
{
    os << "<rect x=\"" << f.px(re0) << "\" y=\"" << f.py(im) << "\" width=\"" << f.px(re1) - f.px(re0)
       << "\" height=\"" << f.py(-im) - f.py(im) << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
       << width << "\"/>\n";
}

inline void dot(std::ostream& os, const Frame& f, double x, double y)
{
    os << "<circle cx=\"" << f.px(x) << "\" cy=\"" << f.py(y) << "\" r=\"2.2\" fill=\"black\"/>\n";
}

/// Sorted eigenvalues (black) with lower (red) and upper (blue) bounds.
inline void sorted_bounds(std::ostream& os, const BoundsVectors& b, const Spectrum* s, const std::string& title)
{
    const double lo = std::min(b.gamma_min.front(), s ? s->values.front().real() : b.gamma_min.front());
    const double hi = std::max(b.gamma_max.back(), s ? s->values.back().real() : b.gamma_max.back());
    const Frame f = padded(0.0, static_cast<double>(b.gamma_min.size() - 1), lo, hi);
    open(os, f, title, "index", "eigenvalue");
    polyline(os, f, b.gamma_min, "red");
    polyline(os, f, b.gamma_max, "blue");
    if (s)
        for (std::size_t i = 0; i < s->values.size(); ++i)
            dot(os, f, static_cast<double>(i), s->values[i].real());
    os << "</svg>\n";
}

/// Complex eigenvalues with the global rectangle (blue) and optional per-DOF
/// rectangles (grey).
inline void complex_plane(std::ostream& os, const NonSymBounds& g, const Spectrum* s,
                          const std::vector<std::array<double, 3>>& patch_rects, const std::string& title)
{
    double re0 = g.alpha_min, re1 = g.alpha_max, im = g.beta_max;
    if (s)
        for (const auto& z : s->values) {
            re0 = std::min(re0, z.real());
            re1 = std::max(re1, z.real());
            im = std::max(im, std::abs(z.imag()));
        }
    const Frame f = padded(re0, re1, -im, im);
    open(os, f, title, "real part", "imaginary part");
    for (const auto& r : patch_rects)
        rect(os, f, r[0], r[1], r[2], "#999", 1.0);
    rect(os, f, g.alpha_min, g.alpha_max, g.beta_max, "blue", 1.5);
    if (s)
        for (const auto& z : s->values)
            dot(os, f, z.real(), z.imag());
    os << "</svg>\n";
}

} // namespace svg


/// Number of sorted eigenvalues outside [gamma_min_j, gamma_max_j].
inline std::size_t sorted_violations(const BoundsVectors& b, const Spectrum& s)
{
    std::size_t bad = 0;
    for (std::size_t j = 0; j < s.values.size(); ++j) {
        const double x = s.values[j].real();
        const double slack = detail::slack_for(x);
        if (j >= b.gamma_min.size() || x < b.gamma_min[j] - slack || x > b.gamma_max[j] + slack)
            ++bad;
    }
    return bad;
}

/// Number of eigenvalues outside the union of the per-DOF intervals.
inline std::size_t union_violations(const SymmetricBounds& sb, const Spectrum& s)
{
    const auto patches = sb.dof_patches();
    const auto iv = interval_union(patches);
    std::size_t bad = 0;
    for (const auto& z : s.values)
        if (!contains(iv, z.real(), detail::slack_for(z.real())))
            ++bad;
    return bad;
}

/// Number of eigenvalues outside [alpha_min, alpha_max] x i[-beta_max, beta_max].
inline std::size_t rectangle_violations(const NonSymBounds& g, const Spectrum& s)
{
    const double slack = detail::slack_for(g.alpha_max);
    std::size_t bad = 0;
    for (const auto& z : s.values)
        if (!detail::in_rectangle(z, g.alpha_min, g.alpha_max, g.beta_max, slack))
            ++bad;
    return bad;
}

/// The 4x4 system built from three 2x2 blocks for which per-DOF rectangles fail.
inline CounterexampleResult counterexample()
{
    const auto block = [](double a, double b, double c, double d) {
        DenseMatrix m(2, 2);
        m << a, b, c, d;
        return m;
    };
    const std::array<DenseMatrix, 3> m{block(10, 12, -12, 11), block(10, 11, -11, 10), block(8, 11, -11, 10)};
    std::vector<LocalContribution> a, b, p;
    for (Index k = 0; k < 3; ++k) {
        const std::vector<Index> dofs{k, k + 1};
        a.push_back({dofs, 0.5 * (m[k] + m[k].transpose()), LocalContribution::Kind::symmetric});
        b.push_back({dofs, 0.5 * (m[k] - m[k].transpose()), LocalContribution::Kind::skew});
        p.push_back({dofs, DenseMatrix::Identity(2, 2), LocalContribution::Kind::symmetric});
    }

    CounterexampleResult out;
    out.bounds = nonsymmetric_bounds(a, b, p, 4);
    out.spectrum = gen_spectrum(add<GeneralTag>(out.bounds.a, out.bounds.b), out.bounds.p);

    const auto& nb = out.bounds;
    out.outside_all_patch_rectangles = std::any_of(out.spectrum.values.begin(), out.spectrum.values.end(), [&](auto z) {
        for (std::size_t j = 0; j < nb.alpha_min.size(); ++j)
            if (detail::in_rectangle(z, nb.alpha_min[j], nb.alpha_max[j], nb.beta_max[j], 0.0))
                return false;
        return true;
    });
    out.inside_global_rectangle = rectangle_violations(nb.bounds, out.spectrum) == 0;
    return out;
}

namespace detail {

inline SymmetricBounds symmetric_bounds_for(const TriMesh& mesh, Method method, const CoefficientField& coeff,
                                            const CoefficientField& ref, const Config& cfg)
{
    if (method == Method::dg) {
        const SipgOptions o{cfg.c_sigma, cfg.boundary_flux_weight};
        return bounds_dg(mesh, coeff, ref, o, o);
    }
    return bounds_cg(mesh, coeff, ref);
}

inline void write_file(const std::filesystem::path& path, const std::string& text, RunResult& res)
{
    std::ofstream os(path);
    if (!os)
        throw InvalidArgument("cannot write " + path.string());
    os << text;
    res.files.push_back(path.string());
}

template <class Tag>
void dump(const Config& cfg, Index n, const char* name, const Csr<Tag>& m, RunResult& res)
{
    if (!cfg.dump_matrices || cfg.out.empty())
        return;
    std::ostringstream os;
    write_matrix_market(os, m);
    write_file(cfg.out / ("N" + std::to_string(n) + "_" + name + ".mtx"), os.str(), res);
}

inline void require_converged(const SolveReport& rep, TableRow& row)
{
    if (!rep.converged)
        row.error = "solver did not converge in " + std::to_string(rep.iterations) + " iterations";
}

/// Symmetric experiments: bounds, oracles and (P)CG for one mesh size.
inline TableRow symmetric_row(const Config& cfg, Index n, Method method, const CoefficientField& coeff,
                              const std::optional<CoefficientField>& ref, RunResult& res)
{
    TableRow row;
    row.n = n;
    const TriMesh mesh = build_uniform(n, n, {}, cfg.diagonal);
    const DofMap dofs = dof_map(mesh, method == Method::dg ? DofKind::dg : DofKind::cg);
    const SymmetricBounds sb = symmetric_bounds_for(mesh, method, coeff, ref ? *ref : coeff, cfg);
    const Eigen::VectorXd f = load_vector(mesh, dofs, problems::source);
    const bool oracle = cfg.oracle && sb.a.order() <= symmetric_oracle_cap;
    dump(cfg, n, "A", sb.a, res);

    if (oracle)
        row.kappa_A = sym_def_spectrum(sb.a, identity_matrix(sb.a.order())).condition();
    if (!ref) {
        const auto sol = cg(sb.a, f, cfg.cg_tol, cfg.maxit);
        row.iters = sol.report.iterations;
        require_converged(sol.report, row);
        return row;
    }

    dump(cfg, n, "P", sb.p, res);
    row.bound_ratio = sb.bounds.ratio();
    SymmetricRecord rec{n, sb.bounds, std::nullopt};
    if (oracle) {
        rec.spectrum = sym_def_spectrum(sb.a, sb.p);
        row.kappa_PA = rec.spectrum->condition();
    }
    const auto sol = pcg(sb.a, chol(sb.p), f, cfg.cg_tol, cfg.maxit);
    row.iters = sol.report.iterations;
    require_converged(sol.report, row);
    res.symmetric.push_back(std::move(rec));
    return row;
}

/// Convection-diffusion-reaction: rectangle bounds, oracles and (p)GMRES.
inline TableRow nonsymmetric_row(const Config& cfg, Index n, RunResult& res)
{
    TableRow row;
    row.n = n;
    const TriMesh mesh = build_uniform(n, n, {}, cfg.diagonal);
    const DofMap dofs = dof_map(mesh, DofKind::cg);
    ElementOptions opts;
    opts.drop_symmetric_convection = true; // div b = 0
    const auto nb = bounds_nonsym(mesh, problems::convection_diffusion(),
                                  problems::convection_diffusion_reference(cfg.reference.value_or(1)), opts);
    const SparseGen m = add<GeneralTag>(nb.a, nb.b);
    const Eigen::VectorXd f = load_vector(mesh, dofs, problems::source);
    const Index nd = nb.a.order();
    const bool sym_oracle = cfg.oracle && nd <= symmetric_oracle_cap;
    const bool gen_oracle = cfg.oracle && nd <= general_oracle_cap;
    dump(cfg, n, "A", nb.a, res);
    dump(cfg, n, "B", nb.b, res);

    if (sym_oracle)
        row.kappa_A = sym_def_spectrum(nb.a, identity_matrix(nd)).condition();
    if (!cfg.reference) {
        if (sym_oracle)
            row.lam_im_max = skew_extreme(nb.b, identity_matrix(nd));
        const auto sol = gmres(m, f, cfg.gmres_tol, cfg.maxit);
        row.iters = sol.report.iterations;
        require_converged(sol.report, row);
        return row;
    }

    dump(cfg, n, "P", nb.p, res);
    row.bound_ratio = nb.bounds.ratio();
    row.beta_max = nb.bounds.beta_max;
    if (sym_oracle) {
        row.kappa_PA = sym_def_spectrum(nb.a, nb.p).condition();
        row.lam_im_max = skew_extreme(nb.b, nb.p);
    }
    NonsymRecord rec{n, nb.bounds, std::nullopt};
    if (gen_oracle)
        rec.spectrum = gen_spectrum(m, nb.p);
    const auto sol = pgmres(m, chol(nb.p), f, cfg.gmres_tol, cfg.maxit);
    row.iters = sol.report.iterations;
    require_converged(sol.report, row);
    res.nonsymmetric.push_back(std::move(rec));
    return row;
}

inline std::string title_of(const Config& cfg, Index n)
{
    std::string t = to_string(cfg.experiment) + ", N = " + std::to_string(n);
    if (cfg.reference)
        t += ", ap" + std::to_string(*cfg.reference);
    return t;
}

inline void write_artifacts(const Config& cfg, RunResult& res)
{
    if (cfg.out.empty())
        return;

    if (res.counterexample) {
        const auto& ce = *res.counterexample;
        std::ostringstream b, s, g;
        b << "dof,alpha_min,alpha_max,beta_max\n";
        for (std::size_t j = 0; j < ce.bounds.alpha_min.size(); ++j)
            b << j + 1 << ',' << fmt6(ce.bounds.alpha_min[j]) << ',' << fmt6(ce.bounds.alpha_max[j]) << ','
              << fmt6(ce.bounds.beta_max[j]) << '\n';
        b << "global," << fmt6(ce.bounds.bounds.alpha_min) << ',' << fmt6(ce.bounds.bounds.alpha_max) << ','
          << fmt6(ce.bounds.bounds.beta_max) << '\n';
        s << "N,index,re,im\n";
        write_spectrum_rows(s, 4, ce.spectrum);
        std::vector<std::array<double, 3>> rects;
        for (std::size_t j = 0; j < ce.bounds.alpha_min.size(); ++j)
            rects.push_back({ce.bounds.alpha_min[j], ce.bounds.alpha_max[j], ce.bounds.beta_max[j]});
        svg::complex_plane(g, ce.bounds.bounds, &ce.spectrum, rects, "counterexample");
        write_file(cfg.out / "bounds.csv", b.str(), res);
        write_file(cfg.out / "spectrum.csv", s.str(), res);
        write_file(cfg.out / "spectrum.svg", g.str(), res);
        return;
    }

    std::ostringstream t;
    write_table_csv(t, res.rows);
    write_file(cfg.out / "table.csv", t.str(), res);

    std::ostringstream b, s;
    s << "N,index,re,im\n";
    std::vector<std::pair<Index, std::string>> plots;
    if (cfg.experiment == Experiment::ex3_nonsym) {
        b << "N,alpha_min,alpha_max,beta_max\n";
        for (const auto& r : res.nonsymmetric) {
            b << r.n << ',' << fmt6(r.bounds.alpha_min) << ',' << fmt6(r.bounds.alpha_max) << ','
              << fmt6(r.bounds.beta_max) << '\n';
            if (r.spectrum)
                write_spectrum_rows(s, r.n, *r.spectrum);
            std::ostringstream g;
            svg::complex_plane(g, r.bounds, r.spectrum ? &*r.spectrum : nullptr, {}, title_of(cfg, r.n));
            plots.emplace_back(r.n, g.str());
        }
    } else {
        b << "N,index,gamma_min,gamma_max\n";
        for (const auto& r : res.symmetric) {
            for (std::size_t j = 0; j < r.bounds.gamma_min.size(); ++j)
                b << r.n << ',' << j << ',' << fmt6(r.bounds.gamma_min[j]) << ',' << fmt6(r.bounds.gamma_max[j])
                  << '\n';
            if (r.spectrum)
                write_spectrum_rows(s, r.n, *r.spectrum);
            std::ostringstream g;
            svg::sorted_bounds(g, r.bounds, r.spectrum ? &*r.spectrum : nullptr, title_of(cfg, r.n));
            plots.emplace_back(r.n, g.str());
        }
    }
    write_file(cfg.out / "bounds.csv", b.str(), res);
    write_file(cfg.out / "spectrum.csv", s.str(), res);
    if (!plots.empty())
        write_file(cfg.out / "spectrum.svg", plots.front().second, res);
    if (plots.size() > 1)
        for (const auto& [n, text] : plots)
            write_file(cfg.out / ("spectrum_N" + std::to_string(n) + ".svg"), text, res);
}

} // namespace detail

/// Runs one experiment. A failing mesh size keeps its row with the error text
/// and the remaining sizes still run.
inline RunResult run(const Config& cfg)
{
    if (cfg.reference && *cfg.reference != 1 && *cfg.reference != 2)
        throw InvalidArgument("reference data must be ap1 or ap2");
    if (!(cfg.c_sigma > 1.0))
        throw InvalidArgument("c_sigma must be greater than one");
    const auto sizes = sizes_of(cfg);
    for (Index n : sizes)
        if (n <= 0)
            throw InvalidArgument("mesh sizes must be positive");

    if (!cfg.out.empty())
        std::filesystem::create_directories(cfg.out);

    RunResult res;
    if (cfg.experiment == Experiment::counterexample) {
        res.counterexample = counterexample();
        detail::write_artifacts(cfg, res);
        return res;
    }

    for (Index n : sizes) {
        try {
            switch (cfg.experiment) {
            case Experiment::ex1_galerkin:
            case Experiment::ex1_dg: {
                const Method method = cfg.experiment == Experiment::ex1_dg ? Method::dg : Method::cg;
                std::optional<CoefficientField> ref;
                if (cfg.reference)
                    ref = problems::diffusion_reaction_reference(*cfg.reference);
                res.rows.push_back(detail::symmetric_row(cfg, n, method, problems::diffusion_reaction(), ref, res));
                break;
            }
            case Experiment::ex2_figure: {
                const auto t = problems::bound_test(cfg.test);
                res.rows.push_back(detail::symmetric_row(cfg, n, cfg.method, t.coeff, t.reference, res));
                break;
            }
            case Experiment::ex3_nonsym:
                res.rows.push_back(detail::nonsymmetric_row(cfg, n, res));
                break;
            case Experiment::counterexample:
                break;
            }
        } catch (const Error& e) {
            TableRow row;
            row.n = n;
            row.error = e.what();
            res.rows.push_back(std::move(row));
        }
    }
    detail::write_artifacts(cfg, res);
    return res;
}

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyOptions {
    std::vector<Index> sizes{4, 10};
    /// Negative control: exchange gamma_min and gamma_max before checking.
    bool swap_gamma = false;
};

struct VerifyReport {
    std::vector<Check> checks;

    bool passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    }
};

/// Bound containment, matrix structure and counterexample checks on small meshes.
inline VerifyReport verify(const VerifyOptions& opts = {})
{
    VerifyReport rep;
    const auto guarded = [&](const std::string& name, auto&& body) {
        try {
            rep.checks.push_back(body());
            rep.checks.back().name = name;
        } catch (const Error& e) {
            rep.checks.push_back({name, false, e.what()});
        }
    };

    const auto symmetric_check = [&](const TriMesh& mesh, Method method, const CoefficientField& coeff,
                                     const CoefficientField& ref, double c_sigma) {
        Config cfg;
        cfg.c_sigma = c_sigma;
        const SymmetricBounds sb = detail::symmetric_bounds_for(mesh, method, coeff, ref, cfg);
        BoundsVectors b = sb.bounds;
        if (opts.swap_gamma)
            std::swap(b.gamma_min, b.gamma_max);
        const Spectrum s = sym_def_spectrum(sb.a, sb.p);
        const std::size_t sorted = sorted_violations(b, s);
        const std::size_t unioned = union_violations(sb, s);
        const double asym = std::max(sb.a.symmetry_defect(), sb.p.symmetry_defect());
        Check c;
        c.passed = sorted == 0 && unioned == 0 && asym <= 1e-12;
        c.detail = std::to_string(s.values.size()) + " eigenvalues, " + std::to_string(sorted) +
                   " outside sorted bounds, " + std::to_string(unioned) + " outside interval union, asymmetry " +
                   fmt6(asym);
        return c;
    };

    for (int test = 1; test <= 3; ++test) {
        const auto t = problems::bound_test(test);
        const TriMesh mesh = build_uniform(10, 10);
        for (Method m : {Method::cg, Method::dg})
            guarded("test " + std::to_string(test) + (m == Method::cg ? " cg" : " dg") + " N=10",
                    [&] { return symmetric_check(mesh, m, t.coeff, t.reference, 2.0); });
    }

    for (Index n : opts.sizes) {
        const TriMesh mesh = build_uniform(n, n);
        for (int ref = 1; ref <= 2; ++ref) {
            const auto coeff = problems::diffusion_reaction();
            const auto r = problems::diffusion_reaction_reference(ref);
            const std::string tag = " ap" + std::to_string(ref) + " N=" + std::to_string(n);
            guarded("diffusion-reaction cg" + tag, [&] { return symmetric_check(mesh, Method::cg, coeff, r, 2.0); });
            for (double cs : {2.0, 20.0})
                guarded("diffusion-reaction dg c_sigma=" + fmt6(cs) + tag,
                        [&] { return symmetric_check(mesh, Method::dg, coeff, r, cs); });
        }
    }

    for (Index n : opts.sizes) {
        const TriMesh mesh = build_uniform(n, n);
        const DofMap dofs = dof_map(mesh, DofKind::cg);
        const auto coeff = problems::convection_diffusion();
        for (int ref = 1; ref <= 2; ++ref) {
            guarded("convection-diffusion ap" + std::to_string(ref) + " N=" + std::to_string(n), [&] {
                ElementOptions o;
                o.drop_symmetric_convection = true;
                const auto nb = bounds_nonsym(mesh, coeff, problems::convection_diffusion_reference(ref), o);
                const Spectrum s = gen_spectrum(add<GeneralTag>(nb.a, nb.b), nb.p);
                const std::size_t bad = rectangle_violations(nb.bounds, s);
                const double skew = nb.b.symmetry_defect(-1.0);

                // With div b = 0 the symmetrized convection must cancel after assembly.
                const auto full = element_contributions(mesh, dofs, coeff);
                const double scale = nb.a.dense().cwiseAbs().maxCoeff();
                const double sym_conv =
                    (assemble<SymmetricTag>(full.sym, dofs.n_dof).dense() - nb.a.dense()).cwiseAbs().maxCoeff() /
                    scale;
                Check c;
                c.passed = bad == 0 && skew <= 1e-12 && sym_conv <= 1e-10;
                c.detail = std::to_string(s.values.size()) + " eigenvalues, " + std::to_string(bad) +
                           " outside rectangle, skew defect " + fmt6(skew) + ", symmetric convection " +
                           fmt6(sym_conv);
                return c;
            });
        }
    }

    guarded("counterexample", [&] {
        const auto ce = counterexample();
        Check c;
        c.passed = ce.outside_all_patch_rectangles && ce.inside_global_rectangle;
        c.detail = std::string("outside all per-patch rectangles: ") +
                   (ce.outside_all_patch_rectangles ? "true" : "false") +
                   ", inside global rectangle: " + (ce.inside_global_rectangle ? "true" : "false");
        return c;
    });
    return rep;
}

} // namespace patchbound::experiments
