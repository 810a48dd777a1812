#include "sseg/connected.hpp"

#include <queue>

namespace sseg {

std::vector<std::size_t> label_components(const std::vector<std::uint8_t>& labels,
                                          const std::array<std::size_t, 3>& extents, int cls,
                                          std::vector<int>& component_of) {
    const std::size_t Z = extents[0], Y = extents[1], X = extents[2];
    component_of.assign(labels.size(), -1);
    std::vector<std::size_t> sizes;
    for (std::size_t seed = 0; seed < labels.size(); ++seed) {
        if (labels[seed] != cls || component_of[seed] != -1) continue;
        const int comp = static_cast<int>(sizes.size());
        std::size_t count = 0;
        std::queue<std::size_t> frontier;
        component_of[seed] = comp;
        frontier.push(seed);
        while (!frontier.empty()) {
            const std::size_t v = frontier.front();
            frontier.pop();
            ++count;
            const long z = static_cast<long>(v / (Y * X));
            const long y = static_cast<long>((v / X) % Y);
            const long x = static_cast<long>(v % X);
            const long dz[6] = {-1, 1, 0, 0, 0, 0};
            const long dy[6] = {0, 0, -1, 1, 0, 0};
            const long dx[6] = {0, 0, 0, 0, -1, 1};
            for (int n = 0; n < 6; ++n) {
                const long zz = z + dz[n], yy = y + dy[n], xx = x + dx[n];
                if (zz < 0 || yy < 0 || xx < 0 || zz >= static_cast<long>(Z) ||
                    yy >= static_cast<long>(Y) || xx >= static_cast<long>(X))
                    continue;
                const std::size_t u =
                    (static_cast<std::size_t>(zz) * Y + static_cast<std::size_t>(yy)) * X +
                    static_cast<std::size_t>(xx);
                if (labels[u] == cls && component_of[u] == -1) {
                    component_of[u] = comp;
                    frontier.push(u);
                }
            }
        }
        sizes.push_back(count);
    }
    return sizes;
}

}  // namespace sseg
