// Scalar block operators (a b; d g) on Z_2: bounded iff a = g and d = 0. Prints the Z_2
// norm estimate across sizes and the fitted growth class for a few choices.

#include <iomanip>
#include <iostream>
#include <vector>

#include "kpz2/normest.hpp"

int main() {
    using namespace kpz2;
    const std::vector<double> sizes{64, 128, 256, 512, 1024};
    const double cases[][4] = {{1, 0, 0, 1}, {2, -1, 0, 2}, {1, 0, 1, 1}, {2, 0, 0, 1}};
    std::cout << std::setprecision(5);
    for (const auto& c : cases) {
        std::vector<double> vals;
        std::cout << "(" << c[0] << ' ' << c[1] << "; " << c[2] << ' ' << c[3] << "):";
        for (double n : sizes) {
            Z2SearchOptions opt;
            opt.samples = 8;
            opt.ascent_steps = 50;
            vals.push_back(z2_opnorm_est(scalar_matrix(c[0], c[1], c[2], c[3], Eigen::Index(n)), opt).value);
            std::cout << ' ' << vals.back();
        }
        std::cout << "  -> " << to_string(growth_trend(sizes, vals).fit) << '\n';
    }
}
