// KP, its numerical section and the two Z_2 quasinorm presentations on a few vectors.

#include <iomanip>
#include <iostream>

#include "kpz2/random.hpp"
#include "kpz2/z2core.hpp"

int main() {
    using namespace kpz2;
    std::cout << std::setprecision(6);
    for (Eigen::Index n : {8, 64, 512}) {
        const SeqVec s = spread(n);
        const SeqVec w = kp_map(s);
        const SeqVec back = kp_inverse(w);
        std::cout << "n=" << n << "  ||KP spread|| = " << w.norm() << " (log n = " << std::log(double(n))
                  << ")  round trip error " << (back - s).norm() << '\n';
    }

    Rng rng(7);
    const Eigen::Index n = 128;
    for (int i = 0; i < 4; ++i) {
        const Z2Vec z(rng.gaussian(n), rng.gaussian(n));
        const double q = z2_quasinorm(z);
        const double jq = z2_quasinorm_jq(z, 60);
        std::cout << "random z: ||z|| = " << q << "  jq-presentation " << jq << "  ratio " << jq / q
                  << '\n';
    }
}
