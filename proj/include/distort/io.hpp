#pragma once

// File formats: the plain-text curve format, JSON reports, CSV traces, and
// the key=value annealing configuration. Concrete double precision; writers
// emit 17 significant digits so round trips are bit exact.

#include "distort/anneal.hpp"
#include "distort/distortion.hpp"

#include <iosfwd>
#include <nlohmann/json_fwd.hpp>

namespace distort::io {

using Curve = PolygonalCurve<double>;

class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class FormatError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Curve file format: optional '#' comment lines, then "closed" or "open",
/// then one vertex per line as three whitespace-separated decimals.
Curve read_curve(std::istream& in, const std::string& name = {});
Curve read_curve_file(const std::string& path);
void write_curve(std::ostream& out, const Curve& curve);
void write_curve_file(const std::string& path, const Curve& curve);

nlohmann::json report_to_json(const DistortionReport<double>& report);
nlohmann::json saturation_to_json(const SaturationReport<double>& report);
nlohmann::json measure_to_json(const CurvatureMeasure<double>& measure);

void write_shadow_csv(std::ostream& out,
                      const std::vector<ShadowSample<double>>& shadow);
void write_trace_csv(std::ostream& out, const AnnealTrace<double>& trace);

/// Annealing configuration: '#' comments and "key = value" lines. Unknown
/// keys are rejected.
AnnealConfig<double> read_anneal_config(std::istream& in);
AnnealConfig<double> read_anneal_config_file(const std::string& path);

}  // namespace distort::io
