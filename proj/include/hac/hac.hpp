#pragma once

#include "hac/chamfer.hpp"
#include "hac/classical.hpp"
#include "hac/dataset.hpp"
#include "hac/dendrogram.hpp"
#include "hac/engine.hpp"
#include "hac/io.hpp"
#include "hac/linkage.hpp"
#include "hac/metrics.hpp"
#include "hac/min_tracking_map.hpp"
#include "hac/oracle.hpp"
#include "hac/parallel.hpp"
#include "hac/tradeoff.hpp"
