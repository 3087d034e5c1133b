#ifndef FNPDE_HEATMAP_HPP
#define FNPDE_HEATMAP_HPP

#include <string>
#include <vector>

namespace fnpde {

// Renders a rectangular grid as an 8-bit PNM image with linear scaling
// between the grid min and max; the scaling is recorded in a sidecar text
// file "<out>.scale". color = false writes grayscale P5, color = true a
// simple blue-to-red P6 ramp. Throws on a ragged grid.
void render_heatmap(const std::vector<std::vector<double>>& grid, const std::string& out_path,
                    bool color = false);

}  // namespace fnpde

#endif
