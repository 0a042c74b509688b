#pragma once

#include <optional>
#include <string>
#include <vector>

namespace iic::cli {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<std::optional<double>> y;  // nullopt breaks the line
};

// Minimal standalone SVG line chart with axes and a legend.
std::string LinePlotSvg(const std::string& title, const std::string& x_label,
                        const std::string& y_label, const std::vector<PlotSeries>& series);

}  // namespace iic::cli
