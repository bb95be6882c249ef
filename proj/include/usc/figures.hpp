// figures.hpp - data tables behind each published panel, one CSV per panel
#pragma once

#include <string>
#include <vector>

#include "usc/result_table.hpp"

namespace usc {

struct FigurePanel {
    std::string name; // e.g. "fig3_b"
    ResultTable table;
};

const std::vector<std::string>& figure_ids();

// 10^0 .. 10^5 with 400 points per decade
std::vector<double> figure_time_grid();

// throws ConfigInvalid for an unknown id
std::vector<FigurePanel> make_figure(const std::string& id, int threads = 0);

// writes <out_dir>/<panel>.csv and returns the paths
std::vector<std::string> write_figure(const std::string& id, const std::string& out_dir, int threads = 0);

} // namespace usc
