#include "report.hpp"

#include "stark/numformat.hpp"

namespace stark {

using nlohmann::ordered_json;

ordered_json fit_to_json(const FitResult& fit) {
  return ordered_json{{"exponent", fit.exponent},
                      {"stderr", fit.stderr_},
                      {"amplitude", fit.amplitude},
                      {"r_squared", fit.r_squared},
                      {"window", {fit.window_lo, fit.window_hi}},
                      {"points", fit.points}};
}

ordered_json peak_to_json(const PeakRow& row) {
  return ordered_json{{"eta", format_double(row.eta)},
                      {"L", row.L},
                      {"N", row.N},
                      {"h_max", row.peak.h_max},
                      {"qfi_max", row.peak.qfi_max},
                      {"bracket", {row.peak.bracket_lo, row.peak.bracket_hi}},
                      {"grid_resolution", row.peak.grid_resolution},
                      {"at_edge", row.peak.at_edge}};
}

ordered_json collapse_to_json(const CollapseResult& res) {
  return ordered_json{
      {"h_c", res.h_c},
      {"alpha", res.alpha},
      {"nu", res.nu},
      {"alpha_over_nu", res.alpha / res.nu},
      {"quality", res.quality},
      {"iterations", res.iterations},
      {"uncertainty",
       {{"h_c", res.unc_h_c}, {"alpha", res.unc_alpha}, {"nu", res.unc_nu}}}};
}

ordered_json scaling_to_json(const ScalingRelationReport& rep) {
  return ordered_json{{"alpha_over_nu", rep.alpha_over_nu},
                      {"alpha_over_nu_err", rep.alpha_over_nu_err},
                      {"beta", rep.beta},
                      {"beta_err", rep.beta_err},
                      {"deviation", rep.deviation},
                      {"tolerance", rep.tolerance},
                      {"pass", rep.pass}};
}

ordered_json eta_to_json(const EtaAnalysis& a) {
  ordered_json j;
  j["eta"] = format_double(a.eta);

  j["peaks"] = ordered_json::array();
  for (const PeakRow& p : a.peaks) j["peaks"].push_back(peak_to_json(p));

  const auto put_fit = [&](const char* key, const std::optional<FitResult>& f) {
    j[key] = f ? fit_to_json(*f) : ordered_json(nullptr);
  };
  put_fit("beta_peak", a.beta_peak);
  put_fit("beta_smallfield", a.beta_smallfield);
  j["smallfield_h"] = a.smallfield_h;

  ordered_json z;
  z["extended"] = a.z_extended ? fit_to_json(*a.z_extended) : ordered_json(nullptr);
  z["transition"] =
      a.z_transition ? fit_to_json(*a.z_transition) : ordered_json(nullptr);
  z["localized"] =
      a.z_localized ? fit_to_json(*a.z_localized) : ordered_json(nullptr);
  z["localized_h"] = a.localized_h;
  j["z"] = z;

  j["collapse"] =
      a.collapse_fit ? collapse_to_json(*a.collapse_fit) : ordered_json(nullptr);

  put_fit("alpha_fit", a.alpha_fit);
  j["alpha_anchor"] = a.alpha_anchor;

  j["scaling_relation"] = a.scaling_relation
                              ? scaling_to_json(*a.scaling_relation)
                              : ordered_json(nullptr);

  if (a.normalized_exponent) {
    j["normalized_qfi_exponent"] =
        ordered_json{{"value", a.normalized_exponent->value},
                     {"stderr", a.normalized_exponent->stderr_}};
  } else {
    j["normalized_qfi_exponent"] = nullptr;
  }

  j["errors"] = a.errors;
  return j;
}

ordered_json config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  for (const auto& [key, value] : cfg.items()) j[key] = value;
  return j;
}

std::string render_report(const PipelineResult& result) {
  ordered_json j;
  j["config"] = config_to_json(result.config);
  j["rows"] = ordered_json{
      {"total", result.rows.size()},
      {"valid", result.rows.size() - result.invalid_rows},
      {"invalid", result.invalid_rows}};
  j["eta"] = ordered_json::array();
  for (const EtaAnalysis& a : result.etas) j["eta"].push_back(eta_to_json(a));
  j["outputs"] = result.outputs;
  return j.dump(2) + "\n";
}

} // namespace stark
