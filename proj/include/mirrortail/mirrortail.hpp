#pragma once

#include "mirrortail/rng.hpp"
#include "mirrortail/parallel.hpp"
#include "mirrortail/geometry.hpp"
#include "mirrortail/problem.hpp"
#include "mirrortail/noise.hpp"
#include "mirrortail/smd.hpp"
#include "mirrortail/bounds.hpp"
#include "mirrortail/diagnostics.hpp"
#include "mirrortail/concentration.hpp"
#include "mirrortail/experiment.hpp"
#include "mirrortail/trace_suite.hpp"
