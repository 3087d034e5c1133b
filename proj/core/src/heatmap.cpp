#include "fnpde/heatmap.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fnpde {

void render_heatmap(const std::vector<std::vector<double>>& grid, const std::string& out_path,
                    bool color) {
    if (grid.empty() || grid.front().empty()) throw std::invalid_argument("heatmap: empty grid");
    const std::size_t w = grid.front().size();
    double lo = grid[0][0], hi = grid[0][0];
    for (const auto& row : grid) {
        if (row.size() != w) throw std::invalid_argument("heatmap: ragged grid");
        for (double v : row) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const double span = hi > lo ? hi - lo : 1.0;

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("heatmap: cannot open " + out_path);
    out << (color ? "P6" : "P5") << "\n" << w << " " << grid.size() << "\n255\n";
    for (const auto& row : grid) {
        for (double v : row) {
            const double t = (v - lo) / span;
            const int g = std::clamp(static_cast<int>(t * 255.0 + 0.5), 0, 255);
            if (color) {
                const unsigned char rgb[3] = {static_cast<unsigned char>(g), 0,
                                              static_cast<unsigned char>(255 - g)};
                out.write(reinterpret_cast<const char*>(rgb), 3);
            } else {
                const unsigned char b = static_cast<unsigned char>(g);
                out.write(reinterpret_cast<const char*>(&b), 1);
            }
        }
    }

    std::ofstream scale(out_path + ".scale", std::ios::binary);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "min %.17g\nmax %.17g\n", lo, hi);
    scale << buf;
}

}  // namespace fnpde
