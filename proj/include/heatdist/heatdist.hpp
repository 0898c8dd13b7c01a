#pragma once

#include "heatdist/analysis.hpp"
#include "heatdist/datasets.hpp"
#include "heatdist/diffuse.hpp"
#include "heatdist/error.hpp"
#include "heatdist/graph.hpp"
#include "heatdist/io.hpp"
#include "heatdist/linalg.hpp"
#include "heatdist/matrix.hpp"
#include "heatdist/parallel.hpp"
#include "heatdist/random.hpp"

namespace heatdist {
inline constexpr const char* kVersion = "0.1.0";
}
