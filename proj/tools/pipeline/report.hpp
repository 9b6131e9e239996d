#pragma once

#include <string>

#include <json.hpp>

#include "pipeline.hpp"

namespace stark {

// JSON fragments shared by the report file and the machine-readable CLI
// output. eta values are serialized as strings so "inf" survives.
nlohmann::ordered_json fit_to_json(const FitResult& fit);
nlohmann::ordered_json peak_to_json(const PeakRow& row);
nlohmann::ordered_json collapse_to_json(const CollapseResult& res);
nlohmann::ordered_json scaling_to_json(const ScalingRelationReport& rep);
nlohmann::ordered_json eta_to_json(const EtaAnalysis& a);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

// The full pipeline report: resolved config, row statistics, per-eta
// analyses, list of files written. Two-space indented, trailing newline.
std::string render_report(const PipelineResult& result);

} // namespace stark
