// Command line front end: curve generation, distortion reports, the
// falsification suites, annealing runs, and the saturation diagnostic.
//
// Exit codes: 0 success, 1 verification failure (counterexample written),
// 2 usage/config error, 3 I/O error.

#include "distort/generators.hpp"
#include "distort/io.hpp"
#include "distort/random_instances.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr const char* kToolVersion = "0.1.0";

using distort::io::Curve;

nlohmann::json echo_inputs(int argc, char** argv) {
    auto args = nlohmann::json::array();
    for (int i = 0; i < argc; ++i) args.push_back(argv[i]);
    return args;
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw distort::io::IoError("cannot write: " + path);
    out << body;
    if (!out) throw distort::io::IoError("write failed: " + path);
}

int run(int argc, char** argv) {
    CLI::App app{"Gromov distortion toolbox for polygonal space curves"};
    app.require_subcommand(1);

    // ---- generate ----------------------------------------------------
    auto* gen = app.add_subcommand("generate", "construct a standard curve");
    std::string gen_kind, gen_out, gen_curve_in;
    double phi = 2.0, radius = 1.0, seg_len = 1.0, r_small = 1.0, r_big = 10.0;
    double max_step = 0.01, eps_twist = 0.01, loop_len = 0.52;
    double torus_R = 2.0, torus_r = 1.0;
    int n = 64, p = 2, q = 3, edge = 0;
    gen->add_option("kind", gen_kind,
                    "ngon | comet | dragons_tooth | torus_knot | twist")
        ->required();
    gen->add_option("--out", gen_out, "output curve file")->required();
    gen->add_option("--phi", phi, "corner exterior angle (radians)");
    gen->add_option("--n", n, "vertex count");
    gen->add_option("--radius", radius, "circumradius / comet arc radius");
    gen->add_option("--segment-len", seg_len, "comet segment length");
    gen->add_option("--r", r_small, "small radius (dragons_tooth / torus tube)");
    gen->add_option("--R", r_big, "large radius (dragons_tooth / torus ring)");
    gen->add_option("--p", p, "torus knot p");
    gen->add_option("--q", q, "torus knot q");
    gen->add_option("--max-step", max_step, "arc discretization step (radians)");
    gen->add_option("--eps-twist", eps_twist, "twist gap");
    gen->add_option("--loop-len", loop_len, "twist loop length");
    gen->add_option("--edge", edge, "twist host edge index");
    gen->add_option("--curve", gen_curve_in, "input curve (twist only)");

    // ---- compute ------------------------------------------------------
    auto* comp = app.add_subcommand("compute", "distortion report for a curve");
    std::string comp_curve, comp_report, comp_shadow_csv;
    double comp_density = 0.0, comp_b = 0.0;
    comp->add_option("--curve", comp_curve, "input curve file")->required();
    comp->add_option("--report", comp_report, "output JSON report")->required();
    comp->add_option("--density", comp_density, "shadow samples per unit length");
    comp->add_option("--b", comp_b, "thickness threshold (enables tau_b)");
    comp->add_option("--shadow-csv", comp_shadow_csv, "shadow sample CSV");

    // ---- verify -------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "falsification suites");
    verify->require_subcommand(1);
    auto* vds = verify->add_subcommand("ds-bound",
                                       "dq <= sec(kappa/2) on random arcs");
    int v_trials = 200, v_max_edges = 12;
    std::uint64_t v_seed = 42;
    std::string v_dump = "ds_violation";
    vds->add_option("--trials", v_trials, "number of random arcs");
    vds->add_option("--seed", v_seed, "base seed");
    vds->add_option("--max-edges", v_max_edges, "maximum edges per arc");
    vds->add_option("--dump", v_dump, "counterexample file prefix");
    auto* vml = verify->add_subcommand("measure-lemma",
                                       "subdivision scale on random measures");
    int m_trials = 100;
    std::uint64_t m_seed = 42;
    vml->add_option("--trials", m_trials, "number of random measures");
    vml->add_option("--seed", m_seed, "base seed");

    // ---- anneal ---------------------------------------------------------
    auto* ann = app.add_subcommand("anneal", "constrained annealing run");
    std::string ann_config, ann_curve, ann_out, ann_trace;
    ann->add_option("--config", ann_config, "annealing config file")->required();
    ann->add_option("--curve", ann_curve, "seed curve file")->required();
    ann->add_option("--out", ann_out, "best curve output file")->required();
    ann->add_option("--trace", ann_trace, "per-step CSV trace")->required();

    // ---- saturation -----------------------------------------------------
    auto* sat = app.add_subcommand("saturation", "drc saturation report");
    std::string sat_curve, sat_report;
    double sat_eta = 1e-2, sat_window = 0.0, sat_kmin = 1e-6;
    sat->add_option("--curve", sat_curve, "input curve file")->required();
    sat->add_option("--report", sat_report, "output JSON report")->required();
    sat->add_option("--eta", sat_eta, "shadow margin below delta");
    sat->add_option("--window", sat_window, "window length (default L/64)");
    sat->add_option("--kappa-min", sat_kmin, "straightness threshold (radians)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (gen->parsed()) {
        Curve curve = [&]() -> Curve {
            if (gen_kind == "ngon") return distort::make_ngon<double>(n, radius);
            if (gen_kind == "comet") {
                auto c = distort::make_comet<double>(
                    phi, seg_len, gen->count("--radius") ? radius : 0.0, max_step);
                return c.curve;
            }
            if (gen_kind == "dragons_tooth")
                return distort::make_dragons_tooth<double>(phi, r_small, r_big,
                                                           max_step)
                    .curve;
            if (gen_kind == "torus_knot")
                return distort::make_torus_knot<double>(
                    p, q, n, gen->count("--R") ? r_big : torus_R,
                    gen->count("--r") ? r_small : torus_r);
            if (gen_kind == "twist") {
                if (gen_curve_in.empty())
                    throw CLI::ValidationError("generate",
                                               "twist requires --curve");
                const Curve base = distort::io::read_curve_file(gen_curve_in);
                return distort::apply_twist(base, edge, eps_twist, loop_len)
                    .curve;
            }
            throw CLI::ValidationError("generate", "unknown kind: " + gen_kind);
        }();
        distort::io::write_curve_file(gen_out, curve);
        std::cout << "wrote " << gen_out << " (" << curve.vertex_count()
                  << " vertices, length " << curve.length() << ")\n";
        return 0;
    }

    if (comp->parsed()) {
        const Curve curve = distort::io::read_curve_file(comp_curve);
        const auto report =
            distort::distortion<double>(curve, comp_density, comp_b);
        nlohmann::json j = distort::io::report_to_json(report);
        j["tool_version"] = kToolVersion;
        j["inputs"] = echo_inputs(argc, argv);
        write_text_file(comp_report, j.dump(2) + "\n");
        if (!comp_shadow_csv.empty()) {
            std::ofstream csv(comp_shadow_csv);
            if (!csv) throw distort::io::IoError("cannot write: " + comp_shadow_csv);
            distort::io::write_shadow_csv(csv, report.shadow);
        }
        std::cout << "delta = " << report.delta << "\n";
        return 0;
    }

    if (vds->parsed()) {
        int violations = 0;
        for (int t = 0; t < v_trials; ++t) {
            const auto arc =
                distort::make_random_arc<double>(v_seed + t, v_max_edges);
            const auto rep = distort::ds_bound_check(
                arc, distort::Interval<double>{0.0, arc.length()});
            if (!rep.applicable || rep.ok) continue;
            ++violations;
            const std::string path = v_dump + "_" + std::to_string(t) + ".txt";
            distort::io::write_curve_file(path, arc);
            nlohmann::json j{{"trial", t},
                             {"seed", v_seed + t},
                             {"kappa", rep.kappa},
                             {"bound", rep.bound},
                             {"max_dq", rep.max_dq},
                             {"curve_file", path}};
            write_text_file(v_dump + "_" + std::to_string(t) + ".json",
                            j.dump(2) + "\n");
            std::cerr << "violation on trial " << t << ": max_dq " << rep.max_dq
                      << " > bound " << rep.bound << "\n";
        }
        std::cout << v_trials << " arcs checked, " << violations
                  << " violations\n";
        return violations == 0 ? 0 : 1;
    }

    if (vml->parsed()) {
        int violations = 0;
        for (int t = 0; t < m_trials; ++t) {
            const auto measure =
                distort::make_random_density_measure<double>(m_seed + t);
            const distort::Interval<double> iv{0.0, 1.0};
            const double L = distort::subdivision_scale(measure, iv);
            const double total = measure.mass_open(iv);
            // exhaustive sliding-window scan just below the returned scale
            const double win = L * (1.0 - 1e-9);
            bool bad = false;
            std::vector<double> anchors{0.0, 1.0 - win};
            for (const auto& d : measure.density()) {
                anchors.push_back(d.lo);
                anchors.push_back(d.hi - win);
                anchors.push_back(d.lo - win);
            }
            for (double a : anchors) {
                a = std::clamp(a, 0.0, 1.0 - win);
                if (measure.mass_open({a, a + win}) >
                    2.0 * total / 3.0 + 1e-9 * std::max(1.0, total))
                    bad = true;
            }
            if (bad) {
                ++violations;
                std::cerr << "violation on trial " << t << ": scale " << L
                          << " admits an overweight window\n";
            }
        }
        std::cout << m_trials << " measures checked, " << violations
                  << " violations\n";
        return violations == 0 ? 0 : 1;
    }

    if (ann->parsed()) {
        const auto cfg = distort::io::read_anneal_config_file(ann_config);
        const Curve seed = distort::io::read_curve_file(ann_curve);
        const auto result = distort::anneal(seed, cfg);
        distort::io::write_curve_file(ann_out, result.best);
        std::ofstream trace(ann_trace);
        if (!trace) throw distort::io::IoError("cannot write: " + ann_trace);
        distort::io::write_trace_csv(trace, result.trace);
        std::cout << "best objective = " << result.best_objective << " ("
                  << result.trace.accepted << "/" << cfg.steps
                  << " steps accepted)\n";
        return 0;
    }

    if (sat->parsed()) {
        const Curve curve = distort::io::read_curve_file(sat_curve);
        const auto report =
            distort::saturation_report(curve, sat_kmin, sat_eta, sat_window);
        nlohmann::json j = distort::io::saturation_to_json(report);
        j["tool_version"] = kToolVersion;
        j["inputs"] = echo_inputs(argc, argv);
        write_text_file(sat_report, j.dump(2) + "\n");
        std::cout << "saturated fraction = " << report.fraction << "\n";
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const distort::io::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const distort::io::FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
