#pragma once

// Umbrella header for the shapecap library: procedurally generated
// abstract-shape scenes, compositional English captions with
// model-theoretic truth labels, and bias-audited dataset emission.

#include "shapecap/audit.hpp"
#include "shapecap/captiongen.hpp"
#include "shapecap/dataset.hpp"
#include "shapecap/errors.hpp"
#include "shapecap/grammar.hpp"
#include "shapecap/oracle.hpp"
#include "shapecap/png.hpp"
#include "shapecap/rational.hpp"
#include "shapecap/render.hpp"
#include "shapecap/rng.hpp"
#include "shapecap/semantics.hpp"
#include "shapecap/world.hpp"
