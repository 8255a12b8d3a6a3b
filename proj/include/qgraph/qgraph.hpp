#pragma once

#include "qgraph/errors.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/graph_io.hpp"
#include "qgraph/interlacing.hpp"
#include "qgraph/morse.hpp"
#include "qgraph/partition_energy.hpp"
#include "qgraph/spectral.hpp"
