#pragma once

#include "gcnet/beam_net.hpp"
#include "gcnet/curve.hpp"
#include "gcnet/curve_cover.hpp"
#include "gcnet/data.hpp"
#include "gcnet/detect.hpp"
#include "gcnet/error.hpp"
#include "gcnet/graph_stats.hpp"
#include "gcnet/io.hpp"
#include "gcnet/poly_net.hpp"
#include "gcnet/rng.hpp"
#include "gcnet/smoothness.hpp"
#include "gcnet/synth.hpp"
#include "gcnet/volumes.hpp"
