#pragma once

#include "zw3d/attacks.hpp"
#include "zw3d/corpus.hpp"
#include "zw3d/dibr.hpp"
#include "zw3d/eval.hpp"
#include "zw3d/feature.hpp"
#include "zw3d/frameio.hpp"
#include "zw3d/fusion.hpp"
#include "zw3d/pipeline.hpp"
#include "zw3d/registry.hpp"
#include "zw3d/vss.hpp"
