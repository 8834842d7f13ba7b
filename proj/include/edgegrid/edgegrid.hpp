#pragma once

// Umbrella header for the whole pipeline.

#include "edgegrid/canny.hpp"
#include "edgegrid/errors.hpp"
#include "edgegrid/eval.hpp"
#include "edgegrid/features.hpp"
#include "edgegrid/grid.hpp"
#include "edgegrid/image.hpp"
#include "edgegrid/image_io.hpp"
#include "edgegrid/labels.hpp"
#include "edgegrid/model_io.hpp"
#include "edgegrid/pipeline.hpp"
#include "edgegrid/select.hpp"
#include "edgegrid/svm.hpp"
#include "edgegrid/synth.hpp"
