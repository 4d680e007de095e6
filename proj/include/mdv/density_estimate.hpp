#pragma once

#include <map>
#include <string>
#include <vector>

namespace mdv {

// Evaluation grid, estimated density values, and the scalar configuration
// that produced them (serialized alongside the values as a JSON sidecar).
struct DensityEstimate {
    std::vector<double> x_grid;
    std::vector<double> values;
    std::string route;
    std::map<std::string, double> params;
};

}  // namespace mdv
