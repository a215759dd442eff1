#pragma once

// Umbrella header for the full flow-aware embedding pipeline.

#include "flowartist/core.hpp"
#include "flowartist/csv.hpp"
#include "flowartist/dataset.hpp"
#include "flowartist/diffusion.hpp"
#include "flowartist/kernel.hpp"
#include "flowartist/losses.hpp"
#include "flowartist/metrics.hpp"
#include "flowartist/mlp.hpp"
#include "flowartist/pipeline.hpp"
#include "flowartist/serialize.hpp"
#include "flowartist/svg.hpp"
#include "flowartist/trainer.hpp"
