#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "chatter/stability_oracle.hpp"

namespace chatter {

struct MapOptions {
  std::string title;
  int width = 640;
  int height = 480;
  // (speed index, depth index) cells drawn in the misclassified color.
  std::vector<std::pair<std::size_t, std::size_t>> misclassified;
};

// One <rect class="cell ..."> per grid point, the boundary as a gray
// polyline and a legend. Output bytes depend only on the inputs.
std::string render_map(const LabelGrid& grid, const LobeBoundary& boundary,
                       const MapOptions& options = {});

}  // namespace chatter
