#include "distort/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace distort::io {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

Curve read_curve(std::istream& in, const std::string& name) {
    std::string line;
    bool closed = false;
    bool have_header = false;
    std::vector<Vec3<double>> vertices;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!have_header) {
            if (t == "closed")
                closed = true;
            else if (t == "open")
                closed = false;
            else
                throw FormatError("curve file line " + std::to_string(lineno) +
                                  ": expected 'closed' or 'open'");
            have_header = true;
            continue;
        }
        std::istringstream ss(t);
        double x, y, z;
        if (!(ss >> x >> y >> z))
            throw FormatError("curve file line " + std::to_string(lineno) +
                              ": expected three decimal coordinates");
        std::string rest;
        if (ss >> rest)
            throw FormatError("curve file line " + std::to_string(lineno) +
                              ": trailing tokens after the coordinates");
        vertices.emplace_back(x, y, z);
    }
    if (!have_header) throw FormatError("curve file: missing open/closed header");
    try {
        return Curve(std::move(vertices), closed, name);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("curve file: ") + e.what());
    }
}

Curve read_curve_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open curve file: " + path);
    return read_curve(in, path);
}

void write_curve(std::ostream& out, const Curve& curve) {
    if (!curve.name().empty()) out << "# " << curve.name() << "\n";
    out << (curve.closed() ? "closed" : "open") << "\n";
    for (const auto& v : curve.vertices())
        out << format_double(v.x()) << ' ' << format_double(v.y()) << ' '
            << format_double(v.z()) << "\n";
}

void write_curve_file(const std::string& path, const Curve& curve) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write curve file: " + path);
    write_curve(out, curve);
    if (!out) throw IoError("write failed: " + path);
}

nlohmann::json report_to_json(const DistortionReport<double>& report) {
    nlohmann::json j;
    j["delta"] = report.delta;
    auto pairs = nlohmann::json::array();
    for (const auto& p : report.argmax_pairs)
        pairs.push_back(nlohmann::json::array({p.s, p.t}));
    j["argmax_pairs"] = std::move(pairs);
    if (std::isfinite(report.thickness))
        j["thickness"] = report.thickness;
    else
        j["thickness"] = "inf";
    auto shadow = nlohmann::json::array();
    for (const auto& s : report.shadow)
        shadow.push_back(nlohmann::json::array({s.s, s.value}));
    j["shadow"] = std::move(shadow);
    auto drcs = nlohmann::json::array();
    for (const auto& d : report.drcs)
        drcs.push_back(nlohmann::json::array({d.s, d.t, d.value}));
    j["drcs"] = std::move(drcs);
    j["sample_density"] = report.sample_density;
    return j;
}

nlohmann::json saturation_to_json(const SaturationReport<double>& report) {
    nlohmann::json j;
    j["fraction"] = report.fraction;
    j["delta"] = report.delta;
    auto windows = nlohmann::json::array();
    for (const auto& w : report.windows) {
        windows.push_back({{"lo", w.lo},
                           {"hi", w.hi},
                           {"kappa", w.kappa},
                           {"max_shadow", w.max_shadow},
                           {"straight", w.straight},
                           {"drc_hit", w.drc_hit},
                           {"saturated", w.saturated}});
    }
    j["windows"] = std::move(windows);
    return j;
}

nlohmann::json measure_to_json(const CurvatureMeasure<double>& measure) {
    nlohmann::json j;
    auto atoms = nlohmann::json::array();
    for (const auto& a : measure.atoms())
        atoms.push_back(nlohmann::json::array({a.position, a.mass}));
    j["atoms"] = std::move(atoms);
    auto density = nlohmann::json::array();
    for (const auto& d : measure.density())
        density.push_back(nlohmann::json::array({d.lo, d.hi, d.rate}));
    j["density"] = std::move(density);
    return j;
}

void write_shadow_csv(std::ostream& out,
                      const std::vector<ShadowSample<double>>& shadow) {
    out << "s,value\n";
    for (const auto& s : shadow)
        out << format_double(s.s) << ',' << format_double(s.value) << "\n";
}

void write_trace_csv(std::ostream& out, const AnnealTrace<double>& trace) {
    out << "step,temp,length,delta,tau,move,accepted,feasible\n";
    static const char* kind_names[] = {"inscribe", "corner", "perturb"};
    for (const auto& s : trace.steps) {
        out << s.step << ',' << format_double(s.temperature) << ','
            << format_double(s.length) << ',' << format_double(s.delta) << ','
            << format_double(s.tau) << ','
            << kind_names[static_cast<int>(s.move)] << ','
            << (s.accepted ? 1 : 0) << ',' << (s.feasible ? 1 : 0) << "\n";
    }
}

AnnealConfig<double> read_anneal_config(std::istream& in) {
    AnnealConfig<double> cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        auto as_double = [&] {
            try {
                size_t used = 0;
                const double x = std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
                return x;
            } catch (const std::exception&) {
                throw FormatError("config line " + std::to_string(lineno) +
                                  ": bad number '" + value + "'");
            }
        };
        if (key == "objective") {
            if (value == "length")
                cfg.objective = AnnealObjective::length;
            else if (value == "distortion")
                cfg.objective = AnnealObjective::distortion;
            else
                throw FormatError("config line " + std::to_string(lineno) +
                                  ": objective must be length or distortion");
        } else if (key == "C")
            cfg.C = as_double();
        else if (key == "b")
            cfg.b = as_double();
        else if (key == "tau_min")
            cfg.tau_min = as_double();
        else if (key == "seed")
            cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
        else if (key == "t_initial")
            cfg.t_initial = as_double();
        else if (key == "cooling")
            cfg.cooling = as_double();
        else if (key == "steps")
            cfg.steps = static_cast<int>(as_double());
        else if (key == "w_inscribe")
            cfg.w_inscribe = as_double();
        else if (key == "w_corner")
            cfg.w_corner = as_double();
        else if (key == "w_perturb")
            cfg.w_perturb = as_double();
        else if (key == "eps_prop")
            cfg.eps_prop = as_double();
        else if (key == "tol_constraint")
            cfg.tol_constraint = as_double();
        else if (key == "perturb_scale")
            cfg.perturb_scale = as_double();
        else if (key == "inscribe_window")
            cfg.inscribe_window = as_double();
        else
            throw FormatError("config line " + std::to_string(lineno) +
                              ": unknown key '" + key + "'");
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    return cfg;
}

AnnealConfig<double> read_anneal_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    return read_anneal_config(in);
}

}  // namespace distort::io
