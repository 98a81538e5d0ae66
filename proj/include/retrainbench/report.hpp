#pragma once

#include <string>
#include <vector>

namespace retrainbench {

/// Renders rel_rmsse.svg, rel_smql.svg, rel_ct.svg, cost.svg,
/// optimal_hist.svg and summary.txt from a completed artifact directory.
/// Every SVG is self-contained and embeds its plotted values in a
/// <metadata id="chart-data"> JSON block. Throws MissingArtifact when a
/// required input file is absent.
std::vector<std::string> write_report(const std::string& artifact_dir);

/// Extracts the embedded chart-data JSON text from an SVG file.
std::string extract_chart_data(const std::string& svg_path);

}  // namespace retrainbench
