// casimir: command-line front end for the vorticity classification pipeline.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "casimir/casimir.hpp"

using namespace casimir;
using Json = nlohmann::json;

namespace {

enum Exit : int { Ok = 0, Invalid = 2, Different = 3, NotSimpleExit = 4, Numerical = 5 };

struct Tolerances {
    double tol_rel = 1e-6;
    double tol_circ = 1e-6;
    double tol_f = 1e-8;
    double tol_feas = 1e-12;
};

void emit(const Json& j, const std::string& path = "") {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("'" + path + "': " + e.what());
    }
}

TriangulatedSurface load_surface(const std::string& mesh, const std::string& areas) {
    if (areas.empty()) return io::make_surface(io::read_off(mesh));
    const auto a = io::read_reals(areas);
    return io::make_surface(io::read_off(mesh), &a);
}

std::vector<double> load_field(const TriangulatedSurface& s, const std::string& path) {
    auto F = io::read_reals(path);
    if (static_cast<Index>(F.size()) != s.num_vertices())
        throw CountMismatch("field has " + std::to_string(F.size()) + " values for " + std::to_string(s.num_vertices()) +
                            " vertices");
    return F;
}

MorseField simple_field(const TriangulatedSurface& s, std::vector<double> F, bool perturb) {
    auto f = classify_vertices(s, std::move(F));
    if (perturb) f = perturb_to_simple(f, s);
    require_simple(f, s);
    return f;
}

Json compatibility(const TriangulatedSurface& s, const MeasuredReebGraph& mg) {
    const auto& g = mg.graph;
    const auto in = g.in_arcs(), out = g.out_arcs();
    int one = 0, three = 0, extrema = 0, saddles = 0;
    for (Index v = 0; v < g.num_nodes(); ++v) {
        const auto deg = in[v].size() + out[v].size();
        one += deg == 1;
        three += deg == 3;
        extrema += g.nodes[v].kind == VertexKind::Min || g.nodes[v].kind == VertexKind::Max;
        saddles += g.nodes[v].kind == VertexKind::Saddle;
    }
    const auto problems = g.problems();
    return {{"genus", s.genus()},
            {"betti1", g.betti1()},
            {"betti1_equals_genus", g.betti1() == s.genus()},
            {"one_valent_equals_extrema", one == extrema},
            {"three_valent_equals_saddles", three == saddles},
            {"volume_defect", volume_defect(mg, s)},
            {"problems", problems},
            {"pass", problems.empty() && g.betti1() == s.genus() && one == extrema && three == saddles}};
}

// Monte-Carlo estimate of per-arc masses, for spot checks of the pushforward.
Json monte_carlo(const TriangulatedSurface& s, const MorseField& f, const ReebResult& r, const MeasuredReebGraph& mg,
                 long samples, unsigned long long seed) {
    std::vector<std::vector<Index>> pieces_of(s.num_triangles());
    for (std::size_t k = 0; k < r.qmap.pieces.size(); ++k) pieces_of[r.qmap.pieces[k].triangle].push_back(static_cast<Index>(k));
    std::discrete_distribution<Index> pick(s.areas().begin(), s.areas().end());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::mt19937_64 rng(seed);
    std::vector<long> hits(mg.edges.size(), 0);
    for (long k = 0; k < samples; ++k) {
        const Index t = pick(rng);
        double r1 = u(rng), r2 = u(rng);
        if (r1 + r2 > 1) r1 = 1 - r1, r2 = 1 - r2;
        const auto& tri = s.triangles()[t];
        const double F = (1 - r1 - r2) * f.values[tri[0]] + r1 * f.values[tri[1]] + r2 * f.values[tri[2]];
        for (Index p : pieces_of[t]) {
            const auto& pc = r.qmap.pieces[p];
            if (F >= pc.lo && F <= pc.hi) {
                ++hits[pc.arc];
                break;
            }
        }
    }
    Json arcs = Json::array();
    const double A = s.total_area();
    for (std::size_t e = 0; e < hits.size(); ++e) {
        const double p = static_cast<double>(hits[e]) / samples;
        const double est = A * p, sigma = A * std::sqrt(p * (1 - p) / samples);
        arcs.push_back({{"arc", e}, {"m0", mg.edges[e].m[0]}, {"estimate", est}, {"sigma", sigma},
                        {"z", sigma > 0 ? (mg.edges[e].m[0] - est) / sigma : 0.0}});
    }
    return {{"samples", samples}, {"seed", seed}, {"arcs", arcs}};
}

// Runs fn and maps library errors to exit codes.
template <class Fn>
int guarded(Fn&& fn) {
    auto fail = [](int code, const std::exception& e) {
        std::cerr << "casimir: " << e.what() << '\n';
        return code;
    };
    try {
        return fn();
    } catch (const NotSimple& e) {
        return fail(NotSimpleExit, e);
    } catch (const IllConditioned& e) {
        return fail(Numerical, e);
    } catch (const Infeasible& e) {
        return fail(Numerical, e);
    } catch (const DivergenceRisk& e) {
        return fail(Numerical, e);
    } catch (const AntiderivativeViolation& e) {
        return fail(Numerical, e);
    } catch (const NoSolution& e) {
        return fail(Numerical, e);
    } catch (const CFLViolation& e) {
        return fail(Numerical, e);
    } catch (const TopologyChange& e) {
        return fail(Numerical, e);
    } catch (const PerturbFailure& e) {
        return fail(Numerical, e);
    } catch (const InsufficientSamples& e) {
        return fail(Numerical, e);
    } catch (const Error& e) {
        return fail(Invalid, e);
    } catch (const std::invalid_argument& e) {
        return fail(Invalid, e);
    } catch (const std::out_of_range& e) {
        return fail(Invalid, e);
    }
}

void add_tolerances(CLI::App* app, Tolerances& t) {
    app->add_option("--tol-rel", t.tol_rel, "relative tolerance for moment and Kirchhoff checks")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--tol-circ", t.tol_circ, "relative tolerance for circulation limits")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--tol-f", t.tol_f, "node value tolerance, relative to the field range")->capture_default_str()->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classify 2D ideal-fluid vorticity up to area-preserving maps.\n"
                 "Exit codes: 0 ok or same orbit, 2 invalid input, 3 different orbit, 4 field not simple, 5 numerical failure."};
    app.require_subcommand(1);
    Tolerances tol;
    int n_moments = 16, k_samples = 256;

    // analyze
    auto* analyze = app.add_subcommand("analyze", "measured Reeb graph of a field on a mesh");
    std::string mesh, field, areas, out_path;
    bool profiles = false, perturb = false;
    long mc_samples = 0;
    unsigned long long seed = 1;
    analyze->add_option("mesh", mesh, "OFF mesh")->required()->check(CLI::ExistingFile);
    analyze->add_option("field", field, "one value per vertex")->required()->check(CLI::ExistingFile);
    analyze->add_option("--areas", areas, "per-triangle area weights (default: from positions)")->check(CLI::ExistingFile);
    analyze->add_option("--moments,-N", n_moments, "moments per arc")->capture_default_str()->check(CLI::Range(2, 64));
    analyze->add_option("--samples,-K", k_samples, "profile samples per arc")->capture_default_str()->check(CLI::Range(2, 1 << 20));
    analyze->add_flag("--profiles", profiles, "include cumulative area profiles");
    analyze->add_flag("--perturb", perturb, "perturb ties and degenerate saddles before certification");
    analyze->add_option("--mc-samples", mc_samples, "Monte-Carlo check of arc masses with this many samples")->check(CLI::NonNegativeNumber);
    analyze->add_option("--seed", seed, "seed for the Monte-Carlo check")->capture_default_str();
    analyze->add_option("-o,--output", out_path, "output file (default: standard output)");

    // moments
    auto* moments = app.add_subcommand("moments", "per-arc moments with Hausdorff feasibility");
    std::string graph_doc;
    moments->add_option("mesh", mesh, "OFF mesh")->check(CLI::ExistingFile);
    moments->add_option("field", field, "one value per vertex")->check(CLI::ExistingFile);
    moments->add_option("--graph", graph_doc, "analyze document to read instead of a mesh")->check(CLI::ExistingFile);
    moments->add_option("--areas", areas, "per-triangle area weights")->check(CLI::ExistingFile);
    moments->add_option("--moments,-N", n_moments, "moments per arc")->capture_default_str()->check(CLI::Range(2, 64));
    moments->add_option("--tol-feas", tol.tol_feas, "Hausdorff feasibility tolerance, relative to m_0")->capture_default_str()->check(CLI::PositiveNumber);
    moments->add_flag("--perturb", perturb, "perturb ties and degenerate saddles before certification");
    moments->add_option("-o,--output", out_path, "output file");

    // circulation
    auto* circ = app.add_subcommand("circulation", "circulation graph of a coset");
    std::string form;
    circ->add_option("mesh", mesh, "OFF mesh")->required()->check(CLI::ExistingFile);
    circ->add_option("form", form, "one-form rows 'u v value'")->required()->check(CLI::ExistingFile);
    circ->add_option("--field", field, "vorticity file, checked against the curl of the form")->check(CLI::ExistingFile);
    circ->add_option("--areas", areas, "per-triangle area weights")->check(CLI::ExistingFile);
    circ->add_option("--moments,-N", n_moments, "moments per arc")->capture_default_str()->check(CLI::Range(2, 64));
    circ->add_option("--samples,-K", k_samples, "profile samples per arc")->capture_default_str()->check(CLI::Range(2, 1 << 20));
    add_tolerances(circ, tol);
    circ->add_option("-o,--output", out_path, "output file");

    // equiv
    auto* equiv = app.add_subcommand("equiv", "decide whether two cosets lie in one orbit");
    std::string a_mesh, a_field, a_form, b_mesh, b_field, b_form, a_areas, b_areas;
    double tol_all = 0.0;
    equiv->add_option("a_mesh", a_mesh)->required()->check(CLI::ExistingFile);
    equiv->add_option("a_field", a_field)->required()->check(CLI::ExistingFile);
    equiv->add_option("a_form", a_form)->required()->check(CLI::ExistingFile);
    equiv->add_option("b_mesh", b_mesh)->required()->check(CLI::ExistingFile);
    equiv->add_option("b_field", b_field)->required()->check(CLI::ExistingFile);
    equiv->add_option("b_form", b_form)->required()->check(CLI::ExistingFile);
    equiv->add_option("--areas-a", a_areas, "per-triangle areas of the first surface")->check(CLI::ExistingFile);
    equiv->add_option("--areas-b", b_areas, "per-triangle areas of the second surface")->check(CLI::ExistingFile);
    equiv->add_option("--moments,-N", n_moments, "moments compared per arc")->capture_default_str()->check(CLI::Range(2, 64));
    equiv->add_option("--tol", tol_all, "sets --tol-rel and --tol-circ together")->check(CLI::PositiveNumber);
    add_tolerances(equiv, tol);
    equiv->add_option("-o,--output", out_path, "output file");

    // reconstruct
    auto* recon = app.add_subcommand("reconstruct", "density from moments, CSV (lambda, w)");
    std::string moments_doc;
    int arc = -1, grid_points = 201;
    double L = 0.0, eps = 0.0, max_defect = 0.2;
    recon->add_option("--moments", moments_doc, "moment document or analyze document")->required()->check(CLI::ExistingFile);
    recon->add_option("--arc", arc, "arc to reconstruct when reading a graph document");
    recon->add_option("--L", L, "grid half-width (default: max |support end|)")->check(CLI::PositiveNumber);
    recon->add_option("--eps", eps, "distance of the evaluation lines from the real axis (default: 0.01 L)")->check(CLI::PositiveNumber);
    recon->add_option("--grid", grid_points, "interior grid points")->capture_default_str()->check(CLI::Range(2, 1 << 20));
    recon->add_option("--max-defect", max_defect, "largest accepted relative mass defect")->capture_default_str()->check(CLI::PositiveNumber);
    recon->add_option("--tol-feas", tol.tol_feas, "Hausdorff feasibility tolerance, relative to m_0")->capture_default_str()->check(CLI::PositiveNumber);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Euler flow on the flat torus with Casimir trace");
    int grid_n = 128, n_samples = 4, upsample = 4, sim_moments = 8;
    double T = 2.0, cfl = 0.4;
    std::string dt_str = "auto", init_path, trace_path;
    sim->add_option("--n", grid_n, "grid points per side")->capture_default_str()->check(CLI::Range(8, 4096));
    sim->add_option("--T", T, "final time")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--dt", dt_str, "time step or 'auto'")->capture_default_str();
    sim->add_option("--cfl", cfl, "Courant number for --dt auto")->capture_default_str()->check(CLI::Range(1e-6, 1.0));
    sim->add_option("--init", init_path, "JSON list of Fourier modes {kx, ky, amplitude, phase}")->required()->check(CLI::ExistingFile);
    sim->add_option("--trace", trace_path, "trace output (default: standard output)");
    sim->add_option("--samples", n_samples, "equally spaced analysis times after t = 0")->capture_default_str()->check(CLI::Range(1, 10000));
    sim->add_option("--upsample", upsample, "analysis grid refinement factor")->capture_default_str()->check(CLI::Range(1, 16));
    sim->add_option("--moments,-N", sim_moments, "moments per arc")->capture_default_str()->check(CLI::Range(1, 64));

    // fixture
    auto* fix = app.add_subcommand("fixture", "write a built-in test configuration as mesh, field, form and areas");
    std::string fixture_name, prefix;
    int resolution = 0;
    fix->add_option("name", fixture_name, "sphere | two-peak-torus | branch-transfer")
        ->required()
        ->check(CLI::IsMember({"sphere", "two-peak-torus", "branch-transfer"}));
    fix->add_option("prefix", prefix, "output path prefix")->required();
    fix->add_option("--resolution", resolution, "subdivision level or grid size (0: fixture default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version requests exit 0; every other parse error is invalid input.
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    OrbitOptions orbit_opt;
    auto sync_orbit = [&] {
        if (tol_all > 0) tol.tol_rel = tol.tol_circ = tol_all;
        orbit_opt.n_moments = sim_moments;
        orbit_opt.tol_rel = tol.tol_rel;
        orbit_opt.tol_circ = tol.tol_circ;
        orbit_opt.tol_f = tol.tol_f;
        orbit_opt.circulation.n_moments = n_moments;
        orbit_opt.circulation.k_samples = k_samples;
        orbit_opt.circulation.tol_rel = tol.tol_rel;
    };

    if (*analyze) {
        return guarded([&] {
            const auto s = load_surface(mesh, areas);
            auto f0 = classify_vertices(s, load_field(s, field));
            if (perturb) f0 = perturb_to_simple(f0, s);
            const auto report = certify_simple(f0, s);
            if (!report.simple()) {
                Json j = json::document("violations");
                j["violations"] = json::violations_json(report);
                emit(j, out_path);
                throw NotSimple(report.describe());
            }
            const auto reeb = build_reeb(s, f0);
            const auto mg = pushforward_measure(s, f0, reeb, n_moments, k_samples);
            Json j = json::document("measured_reeb_graph");
            j.update(json::measured_json(mg, profiles));
            j["compatibility"] = compatibility(s, mg);
            if (mc_samples > 0) j["monte_carlo"] = monte_carlo(s, f0, reeb, mg, mc_samples, seed);
            emit(j, out_path);
            return j["compatibility"]["pass"].get<bool>() ? Ok : Numerical;
        });
    }

    if (*moments) {
        return guarded([&] {
            MeasuredReebGraph mg;
            if (!graph_doc.empty()) {
                const auto doc = read_json(graph_doc);
                json::require_version(doc);
                mg = json::measured_from_json(doc);
            } else {
                if (mesh.empty() || field.empty()) throw std::invalid_argument("moments needs a mesh and field, or --graph");
                const auto s = load_surface(mesh, areas);
                const auto f = simple_field(s, load_field(s, field), perturb);
                mg = pushforward_measure(s, f, build_reeb(s, f), n_moments, 2);
            }
            Json j = json::document("moments");
            Json arcs = Json::array();
            bool feasible = true;
            for (const auto& em : mg.edges) {
                const auto r = hausdorff_check_unit(em.mu, tol.tol_feas);
                feasible = feasible && r.feasible;
                arcs.push_back({{"id", em.arc}, {"f_lo", em.f_lo}, {"f_hi", em.f_hi}, {"m", em.m}, {"mu", em.mu},
                                {"hausdorff", json::feasibility_json(r)}});
            }
            j["arcs"] = arcs;
            j["total_moments"] = mg.total_moments();
            j["feasible"] = feasible;
            emit(j, out_path);
            return feasible ? Ok : Numerical;
        });
    }

    if (*circ) {
        return guarded([&] {
            sync_orbit();
            const auto s = load_surface(mesh, areas);
            const auto a = DiscreteOneForm::from_rows(s, io::read_form(form));
            std::vector<double> given;
            if (!field.empty()) given = load_field(s, field);
            const auto F = coset_vorticity(s, a, field.empty() ? nullptr : &given);
            const auto f = simple_field(s, F, false);
            const auto cg = build_circulation_graph(s, f, a, orbit_opt.circulation);
            Json j = json::document("circulation_graph");
            j.update(json::circulation_json(cg));
            emit(j, out_path);
            return Ok;
        });
    }

    if (*equiv) {
        return guarded([&] {
            sync_orbit();
            const auto s1 = load_surface(a_mesh, a_areas);
            const auto s2 = load_surface(b_mesh, b_areas);
            const auto F1 = load_field(s1, a_field), F2 = load_field(s2, b_field);
            const auto a1 = DiscreteOneForm::from_rows(s1, io::read_form(a_form));
            const auto a2 = DiscreteOneForm::from_rows(s2, io::read_form(b_form));
            const auto r = same_orbit(s1, a1, s2, a2, orbit_opt, &F1, &F2);
            Json j = json::document("orbit_report");
            j["same_orbit"] = r.same;
            j["measured_isomorphic"] = r.measured.isomorphic;
            j["witness"] = json::witness_json(r.witness());
            if (r.same) {
                j["matching"] = {{"node_map", r.circulation.matching.node_map},
                                 {"arc_map", r.circulation.matching.arc_map},
                                 {"moment_discrepancy", r.circulation.matching.moment_discrepancy},
                                 {"circulation_discrepancy", r.circulation.matching.circulation_discrepancy}};
            }
            j["tolerances"] = {{"tol_rel", tol.tol_rel}, {"tol_circ", tol.tol_circ}, {"tol_f", tol.tol_f}, {"moments", n_moments}};
            j["first"] = json::circulation_json(r.first);
            j["second"] = json::circulation_json(r.second);
            emit(j, out_path);
            return r.same ? Ok : Different;
        });
    }

    if (*recon) {
        return guarded([&] {
            const auto ms = json::moments_from_json(read_json(moments_doc), arc);
            const auto feas = hausdorff_check(ms, tol.tol_feas);
            if (!feas.feasible) throw Infeasible("moments fail the Hausdorff conditions");
            const auto r = reconstruct_density(ms, {L, eps, grid_points, max_defect});
            std::cout << "lambda,w\n" << std::setprecision(17);
            for (std::size_t j = 0; j < r.grid.size(); ++j) std::cout << r.grid[j] << ',' << r.w[j] << '\n';
            std::cerr << "mass " << r.mass << ", defect " << r.defect << ", effective moments " << r.effective_n
                      << ", eps " << r.eps << '\n';
            return Ok;
        });
    }

    if (*sim) {
        return guarded([&] {
            const auto init = read_json(init_path);
            const auto st = TorusFlowState::from_modes(grid_n, json::modes_from_json(init));
            TraceOptions opt;
            opt.n_moments = sim_moments;
            opt.cfl = cfl;
            opt.upsample = upsample;
            if (dt_str != "auto") {
                try {
                    opt.dt = std::stod(dt_str);
                } catch (const std::exception&) {
                    throw std::invalid_argument("--dt must be a number or 'auto'");
                }
                if (!(opt.dt > 0)) throw std::invalid_argument("--dt must be positive");
            }
            std::vector<double> times;
            for (int k = 1; k <= n_samples; ++k) times.push_back(T * k / n_samples);
            const auto tr = casimir_trace(st, times, opt);
            emit(json::trace_json(tr), trace_path);
            return Ok;
        });
    }

    if (*fix) {
        return guarded([&] {
            auto write = [&](const TriangulatedSurface& s, const std::vector<double>& F, const std::string& p) {
                std::ofstream off(p + ".off"), fld(p + ".field"), frm(p + ".form"), ars(p + ".areas");
                if (!off || !fld || !frm || !ars) throw ParseError("cannot write files with prefix '" + p + "'");
                io::write_off(off, s);
                io::write_reals(fld, F);
                io::write_reals(ars, s.areas());
                frm << std::setprecision(17);
                for (const auto& [u, v, w] : inverse_curl(s, F).rows(s)) frm << u << ' ' << v << ' ' << w << '\n';
            };
            auto centered = [](const TriangulatedSurface& s, std::vector<double> F) {
                const double m = lumped_mean(s, F);
                for (double& x : F) x -= m;
                return F;
            };
            if (fixture_name == "sphere") {
                const auto s = fixtures::icosphere(resolution > 0 ? resolution : 8);
                std::vector<double> F;
                for (const auto& p : s.positions()) F.push_back(p[2]);
                write(s, centered(s, F), prefix);
            } else if (fixture_name == "two-peak-torus") {
                const int n = resolution > 0 ? resolution : 48;
                const auto s = fixtures::torus_grid(n);
                write(s, centered(s, fixtures::sample_grid(n, fixtures::two_peak_torus)), prefix);
            } else {
                const auto bt = fixtures::branch_transfer_sphere(resolution > 0 ? resolution : 8);
                write(bt.before, bt.field, prefix + "_before");
                write(bt.after, bt.field, prefix + "_after");
            }
            return Ok;
        });
    }
    return Invalid;
}
